//! Lower bounds on the mean squared error and the short-time expansion
//! check that ties the quadratic gain rate to the QFI.

use crate::error::{Error, Result};
use crate::estimation::{self, ProbeState, Spectrum};
use crate::priors::Prior;

/// Bayesian Cramér-Rao bound: `1 / (I(p0) + t^2 F_h(rho))`.
///
/// Requires a prior with finite Fisher information; the error from
/// non-differentiable priors propagates.
pub fn bcrb(prior: &Prior, state: &ProbeState, spectrum: &Spectrum, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    let info = prior.fisher_information()?;
    let f = estimation::qfi(state, spectrum);
    Ok(1.0 / (info + t * t * f))
}

/// Entropy bound on the MSE for a d-level probe:
/// `exp(2 H(p0)) / (d^2 2 pi e)`. For a Gaussian prior this is (sigma/d)^2.
pub fn entropic_bound(prior: &Prior, dim: usize) -> Result<f64> {
    if dim < 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dim,
        });
    }
    let h = prior.entropy()?;
    let d = dim as f64;
    Ok((2.0 * h).exp() / (d * d * 2.0 * std::f64::consts::PI * std::f64::consts::E))
}

/// Fitted coefficient of `t^2` in `V0 - mse(t)` over t in {1e-3, 2e-3, 4e-3}.
/// Contract: equals `V0^2 * qfi` within 1%.
pub fn short_time_check(prior: &Prior, state: &ProbeState, spectrum: &Spectrum) -> Result<f64> {
    let ts = [1e-3, 2e-3, 4e-3];
    let mut num = 0.0;
    let mut den = 0.0;
    for &t in &ts {
        let pair = estimation::averaged_pair(prior, state, spectrum, t)?;
        let sol = estimation::personick_solve(&pair)?;
        let dv = estimation::gain(&pair, &sol);
        num += dv * t * t;
        den += t.powi(4);
    }
    Ok(num / den)
}
