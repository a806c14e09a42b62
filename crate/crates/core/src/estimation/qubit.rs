//! Closed-form optimal measurement for a single qubit probe in the
//! equal-superposition state, valid for any (centered) prior.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{averaged_pair, AveragedPair, ProbeState, Spectrum};
use crate::priors::Prior;
use crate::C64;

/// Closed-form solution of the optimal-observable equation for the qubit
/// probe `(|0> + |1>)/sqrt(2)` under the spectrum (1, -1), written in terms
/// of `r = Re p0~(t)`, `i = Im p0~(t)` and their time derivatives.
///
/// Returns the 2x2 observable and the variance decrease `tr(eta S)`.
/// Singular at `|p0~(t)| = 1` (t = 0 or a deterministic prior); callers use
/// the symmetric-case solution `S = 2 eta` or t > 0 there.
pub fn qubit_general_solution(prior: &Prior, t: f64) -> Result<(DMatrix<C64>, f64)> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    let p = prior.cf_raw(t);
    let dp = prior.cf_derivative_raw(t);
    let (r, im) = (p.re, p.im);
    let (rp, ip) = (dp.re, dp.im);

    let denom = r * r + im * im - 1.0;
    if denom.abs() < 1e-12 {
        return Err(Error::SingularDenominator);
    }

    // Derived by solving the 2x2 Sylvester system analytically with
    // gamma = [[1, conj(p)], [p, 1]] / 2 and eta[0,1] = (i' + i r') / 2:
    // diagonal u/2 with u = 2 (r i' - i r') / denom, off-diagonal
    // z = 2 eta01 - conj(p) u / 2.
    let u = 2.0 * (r * ip - im * rp) / denom;
    let eta01 = C64::new(ip, rp) * 0.5;
    let z = 2.0 * eta01 - p.conj() * (u / 2.0);
    let s = DMatrix::from_row_slice(2, 2, &[
        C64::new(u / 2.0, 0.0),
        z,
        z.conj(),
        C64::new(u / 2.0, 0.0),
    ]);

    // gain = 2 Re(conj(eta01) z); equivalent closed form:
    // i'^2 + r'^2 - (r i' - i r')^2 / denom
    let g = ip * ip + rp * rp - (r * ip - im * rp).powi(2) / denom;
    Ok((s, g))
}

/// The averaged pair the closed form refers to, for cross-checks.
pub fn qubit_pair(prior: &Prior, t: f64) -> Result<AveragedPair> {
    averaged_pair(prior, &ProbeState::flat(2), &Spectrum::qubit(), t)
}
