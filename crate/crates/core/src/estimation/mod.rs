//! Optimal Bayesian measurements for a probe state under an effective
//! spectrum: averaged operators, the Sylvester-equation solver for the
//! optimal Hermitian observable, the mean squared error it attains, a
//! brute-force posterior oracle, and the QFI/SLD short-time machinery.

pub mod bounds;
pub mod qubit;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::priors::Prior;
use crate::C64;

/// Eigenvalues of the optimal observable closer than this are merged into a
/// single outcome; the relabeling is physically irrelevant.
const ESTIMATOR_MERGE_GAP: f64 = 1e-9;

/// Effective eigenvalues of the engineered Hamiltonian, one per level,
/// stored in non-increasing order with |lambda| <= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts the levels into canonical non-increasing order.
    pub fn new(mut lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidSchedule("empty spectrum".into()));
        }
        if let Some(&l) = lambdas.iter().find(|l| !l.is_finite()) {
            let _ = l;
            return Err(Error::NonFinite("spectrum"));
        }
        if let Some(&l) = lambdas.iter().find(|l| l.abs() > 1.0 + 1e-12) {
            return Err(Error::InfeasibleSpectrum(l));
        }
        lambdas.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum(lambdas))
    }

    /// The equally gapped n-level spectrum spanning [-1, 1].
    pub fn equally_gapped(n: usize) -> Self {
        assert!(n >= 2);
        let step = 2.0 / (n - 1) as f64;
        Spectrum((0..n).map(|l| 1.0 - step * l as f64).collect())
    }

    pub fn qubit() -> Self {
        Spectrum(vec![1.0, -1.0])
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Smallest gap between consecutive distinct levels; 0 when all levels
    /// coincide.
    pub fn min_gap(&self) -> f64 {
        self.0
            .windows(2)
            .map(|w| w[0] - w[1])
            .filter(|g| *g > 1e-12)
            .fold(f64::INFINITY, f64::min)
            .min(self.0[0] - self.0[self.0.len() - 1])
    }

    pub fn spectral_radius(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, l| m.max(l.abs()))
    }
}

/// Pure probe state: amplitudes over the effective levels, unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeState(Vec<C64>);

impl ProbeState {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSchedule("empty state".into()));
        }
        let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite("state coefficients"));
        }
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSchedule(format!(
                "state norm^2 = {norm_sq}, expected 1"
            )));
        }
        Ok(ProbeState(coeffs))
    }

    /// Builds a normalized state from arbitrary (not all zero) amplitudes.
    pub fn normalized(coeffs: Vec<C64>) -> Result<Self> {
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidSchedule("cannot normalize zero state".into()));
        }
        ProbeState::new(coeffs.into_iter().map(|c| c / norm).collect())
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        ProbeState::normalized(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Flat superposition over n levels.
    pub fn flat(n: usize) -> Self {
        let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        ProbeState(vec![a; n])
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[index] = C64::new(1.0, 0.0);
        ProbeState(v)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// The prior-averaged state and its first frequency moment at time `t`.
#[derive(Debug, Clone)]
pub struct AveragedPair {
    pub gamma: DMatrix<C64>,
    pub eta: DMatrix<C64>,
    pub t: f64,
    /// Prior mean, reapplied to estimator values on output.
    pub offset: f64,
}

/// Spectral decomposition of the optimal Hermitian observable: projective
/// outcomes `projectors[m]` with estimator values `estimators[m]`.
#[derive(Debug, Clone)]
pub struct MeasurementSolution {
    pub s: DMatrix<C64>,
    /// Estimator values in centered frequency coordinates.
    pub estimators: Vec<f64>,
    pub projectors: Vec<DMatrix<C64>>,
    /// Prior mean; physical estimators are `estimators + offset`.
    pub offset: f64,
}

impl MeasurementSolution {
    pub fn physical_estimators(&self) -> Vec<f64> {
        self.estimators.iter().map(|w| w + self.offset).collect()
    }

    pub fn outcomes(&self) -> usize {
        self.estimators.len()
    }
}

/// Phase coefficients accumulated by each level: level `l` carries the
/// factor `exp(-i w phi_l / 2)`. Free evolution under a spectrum for time
/// `t` gives `phi_l = lambda_l t`; phase freezing produces other vectors.
pub fn phases_of(spectrum: &Spectrum, t: f64) -> Vec<f64> {
    spectrum.levels().iter().map(|l| l * t).collect()
}

/// Averaged pair for free evolution under `spectrum` for time `t`.
///
/// `gamma[l, m] = c_l conj(c_m) p0~(t (lambda_m - lambda_l) / 2)` and
/// `eta[l, m] = c_l conj(c_m) (-i) p0~'(t (lambda_m - lambda_l) / 2)`,
/// matching the convention that level `l` acquires the phase
/// `exp(-i w lambda_l t / 2)`.
pub fn averaged_pair(
    prior: &Prior,
    state: &ProbeState,
    spectrum: &Spectrum,
    t: f64,
) -> Result<AveragedPair> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::NonFinite("evolution time"));
    }
    if state.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            got: state.dim(),
        });
    }
    averaged_pair_phases(prior, state, &phases_of(spectrum, t), t)
}

/// Averaged pair for an arbitrary per-level phase vector.
pub fn averaged_pair_phases(
    prior: &Prior,
    state: &ProbeState,
    phases: &[f64],
    t: f64,
) -> Result<AveragedPair> {
    let n = state.dim();
    if phases.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phases.len(),
        });
    }
    let c = state.coeffs();
    let mut gamma = DMatrix::<C64>::zeros(n, n);
    let mut eta = DMatrix::<C64>::zeros(n, n);
    for l in 0..n {
        for m in 0..n {
            let s = (phases[m] - phases[l]) / 2.0;
            let w = c[l] * c[m].conj();
            gamma[(l, m)] = w * prior.cf_raw(s);
            eta[(l, m)] = w * (-C64::i()) * prior.cf_derivative_raw(s);
        }
    }
    Ok(AveragedPair {
        gamma: linalg::hermitize(&gamma),
        eta: linalg::hermitize(&eta),
        t,
        offset: prior.mean(),
    })
}

/// Solve `gamma S + S gamma = 2 eta` for the optimal observable and
/// decompose it into estimator values and projectors.
pub fn personick_solve(pair: &AveragedPair) -> Result<MeasurementSolution> {
    let s = linalg::solve_sylvester_psd(&pair.gamma, &pair.eta)?;
    let (vals, q) = linalg::herm_eigen(&s);
    let n = vals.len();

    // group eigenvalues closer than the merge gap (vals sorted decreasing)
    let mut estimators = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[end - 1] - vals[end]).abs() < ESTIMATOR_MERGE_GAP {
            end += 1;
        }
        let mut proj = DMatrix::<C64>::zeros(n, n);
        let mut value = 0.0;
        for i in start..end {
            let v = q.column(i);
            proj += v * v.adjoint();
            value += vals[i];
        }
        estimators.push(value / (end - start) as f64);
        projectors.push(proj);
        start = end;
    }
    Ok(MeasurementSolution {
        s,
        estimators,
        projectors,
        offset: pair.offset,
    })
}

/// Variance decrease achieved by the observable: `tr(eta S)`.
pub fn gain(pair: &AveragedPair, sol: &MeasurementSolution) -> f64 {
    (&pair.eta * &sol.s).trace().re
}

/// Variance decrease of the optimal observable without decomposing it into
/// outcomes; the cheap path for optimizer loops.
pub fn optimal_gain(pair: &AveragedPair) -> Result<f64> {
    let s = linalg::solve_sylvester_psd(&pair.gamma, &pair.eta)?;
    Ok((&pair.eta * &s).trace().re)
}

/// Mean posterior variance attained by the measurement: `V0 - tr(eta S)`.
pub fn mse(prior: &Prior, pair: &AveragedPair, sol: &MeasurementSolution) -> f64 {
    prior.variance() - gain(pair, sol)
}

/// Per-outcome statistics of the brute-force posterior simulation.
#[derive(Debug, Clone)]
pub struct BayesOutcome {
    pub probability: f64,
    pub posterior_mean: f64,
    pub posterior_variance: f64,
}

/// Result of the posterior bookkeeping oracle.
#[derive(Debug, Clone)]
pub struct BayesCheck {
    /// Mean posterior variance, sum of p_m Var(p(w|m)).
    pub mse: f64,
    /// One entry per measurement outcome; `None` for zero-probability
    /// outcomes, which are skipped.
    pub outcomes: Vec<Option<BayesOutcome>>,
}

/// Brute-force mean posterior variance on a grid prior: for every outcome,
/// apply Bayes' rule pointwise and accumulate the posterior variances.
/// Independent of the `mse` evaluation path through `tr(eta S)`.
pub fn simulate_bayes(
    prior: &Prior,
    state: &ProbeState,
    spectrum: &Spectrum,
    t: f64,
    sol: &MeasurementSolution,
) -> Result<BayesCheck> {
    let (points, weights) = prior.grid_data()?;
    if state.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            got: state.dim(),
        });
    }
    let n = state.dim();
    let c = state.coeffs();
    let lambdas = spectrum.levels();

    let mut out = Vec::with_capacity(sol.projectors.len());
    let mut total = 0.0;
    for proj in &sol.projectors {
        // likelihood of this outcome at every grid frequency
        let mut lik = Vec::with_capacity(points.len());
        for &w in points {
            let psi = DVector::from_iterator(
                n,
                (0..n).map(|l| c[l] * C64::from_polar(1.0, -0.5 * w * lambdas[l] * t)),
            );
            let p = (psi.adjoint() * proj * &psi)[(0, 0)].re;
            lik.push(p.clamp(0.0, 1.0));
        }
        let evidence: f64 = weights.iter().zip(&lik).map(|(w, l)| w * l).sum();
        if evidence <= 1e-15 {
            out.push(None);
            continue;
        }
        let post: Vec<f64> = weights
            .iter()
            .zip(&lik)
            .map(|(w, l)| w * l / evidence)
            .collect();
        let mean: f64 = points.iter().zip(&post).map(|(x, p)| x * p).sum();
        let var: f64 = points
            .iter()
            .zip(&post)
            .map(|(x, p)| (x - mean) * (x - mean) * p)
            .sum();
        total += evidence * var;
        out.push(Some(BayesOutcome {
            probability: evidence,
            posterior_mean: mean,
            posterior_variance: var,
        }));
    }
    Ok(BayesCheck {
        mse: total,
        outcomes: out,
    })
}

/// Quantum Fisher information of a pure probe state with respect to the
/// generator `h = diag(lambda) / 2`: `4 (<h^2> - <h>^2)`.
pub fn qfi(state: &ProbeState, spectrum: &Spectrum) -> f64 {
    let w = state.weights();
    let h1: f64 = w
        .iter()
        .zip(spectrum.levels())
        .map(|(p, l)| p * l / 2.0)
        .sum();
    let h2: f64 = w
        .iter()
        .zip(spectrum.levels())
        .map(|(p, l)| p * l * l / 4.0)
        .sum();
    4.0 * (h2 - h1 * h1)
}

/// Symmetric logarithmic derivative: solves `rho L + L rho = -2i [h, rho]`
/// on the support of `rho` with the same Sylvester machinery as
/// [`personick_solve`]. For pure states `tr(rho L^2)` recovers the QFI.
pub fn sld(state: &ProbeState, spectrum: &Spectrum) -> Result<DMatrix<C64>> {
    let n = state.dim();
    if spectrum.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: spectrum.dim(),
        });
    }
    let c = DVector::from_column_slice(state.coeffs());
    let rho = &c * c.adjoint();
    let h = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        spectrum.levels().iter().map(|l| C64::new(l / 2.0, 0.0)),
    ));
    let comm = &h * &rho - &rho * &h;
    let rhs = comm * (-C64::i());
    linalg::solve_sylvester_psd(&rho, &rhs)
}

/// `tr(rho L^2)` for a pure state `rho = |psi><psi|`.
pub fn sld_qfi(state: &ProbeState, l: &DMatrix<C64>) -> f64 {
    let c = DVector::from_column_slice(state.coeffs());
    let lc = l * &c;
    (lc.adjoint() * &lc)[(0, 0)].re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> Prior {
        Prior::gaussian(0.0, 1.0).unwrap()
    }

    #[test]
    fn spectrum_rejects_infeasible_levels() {
        assert!(matches!(
            Spectrum::new(vec![1.2, -0.5]),
            Err(Error::InfeasibleSpectrum(_))
        ));
        // canonical order is non-increasing
        let sp = Spectrum::new(vec![-0.5, 1.0, 0.25]).unwrap();
        assert_eq!(sp.levels(), &[1.0, 0.25, -0.5]);
        assert!((sp.min_gap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pair_at_zero_time_is_density_matrix() {
        let p = gaussian();
        let st = ProbeState::flat(3);
        let sp = Spectrum::new(vec![1.0, 0.0, -1.0]).unwrap();
        let pair = averaged_pair(&p, &st, &sp, 0.0).unwrap();
        for l in 0..3 {
            for m in 0..3 {
                let expect = st.coeffs()[l] * st.coeffs()[m].conj();
                assert!((pair.gamma[(l, m)] - expect).norm() < 1e-14);
                assert!(pair.eta[(l, m)].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn qubit_pair_matches_characteristic_function() {
        let p = gaussian();
        let st = ProbeState::flat(2);
        let pair = averaged_pair(&p, &st, &Spectrum::qubit(), 1.0).unwrap();
        let half_cf = 0.5 * (-0.5f64).exp();
        assert!((pair.gamma[(0, 1)].re - half_cf).abs() < 1e-14);
        assert!(pair.gamma[(0, 1)].im.abs() < 1e-15);
        // eta = i * (real antisymmetric): [1,0] entry +i |p'(1)| / 2
        assert!((pair.eta[(1, 0)] - C64::new(0.0, half_cf)).norm() < 1e-14);
        assert!((pair.eta[(0, 1)] + C64::new(0.0, half_cf)).norm() < 1e-14);
    }

    #[test]
    fn symmetric_qubit_solution_is_twice_eta() {
        let p = gaussian();
        let st = ProbeState::flat(2);
        let pair = averaged_pair(&p, &st, &Spectrum::qubit(), 1.0).unwrap();
        let sol = personick_solve(&pair).unwrap();
        let diff = &sol.s - pair.eta.scale(2.0);
        assert!(linalg::frobenius(&diff) < 1e-12);
        assert!((gain(&pair, &sol) - (-1.0f64).exp()).abs() < 1e-12);
        assert!((mse(&p, &pair, &sol) - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn zero_eta_gives_zero_solution() {
        let p = gaussian();
        let st = ProbeState::flat(2);
        let pair = averaged_pair(&p, &st, &Spectrum::qubit(), 0.0).unwrap();
        let sol = personick_solve(&pair).unwrap();
        assert!(linalg::frobenius(&sol.s) < 1e-12);
        assert!((mse(&p, &pair, &sol) - p.variance()).abs() < 1e-12);
    }

    #[test]
    fn solution_reconstructs_and_projectors_complete() {
        let p = gaussian();
        let st = ProbeState::from_real(&[0.6, 0.5, 0.4, 0.48]).unwrap();
        let sp = Spectrum::new(vec![1.0, 0.3, -0.4, -1.0]).unwrap();
        let pair = averaged_pair(&p, &st, &sp, 0.8).unwrap();
        let sol = personick_solve(&pair).unwrap();

        let mut rebuilt = DMatrix::<C64>::zeros(4, 4);
        let mut total = DMatrix::<C64>::zeros(4, 4);
        for (w, proj) in sol.estimators.iter().zip(&sol.projectors) {
            rebuilt += proj.scale(*w);
            total += proj;
        }
        assert!(linalg::frobenius(&(rebuilt - &sol.s)) < 1e-10);
        assert!(linalg::frobenius(&(total - DMatrix::identity(4, 4))) < 1e-10);
    }

    #[test]
    fn qfi_values() {
        assert!((qfi(&ProbeState::flat(2), &Spectrum::qubit()) - 1.0).abs() < 1e-14);
        assert_eq!(qfi(&ProbeState::basis(3, 0), &Spectrum::equally_gapped(3)), 0.0);
        // flat n-level equally gapped: 4 Var(lambda/2) of equally spaced points
        let n = 5;
        let sp = Spectrum::equally_gapped(n);
        let var: f64 = sp.levels().iter().map(|l| l * l / 4.0).sum::<f64>() / n as f64;
        assert!((qfi(&ProbeState::flat(n), &sp) - 4.0 * var).abs() < 1e-13);
    }

    #[test]
    fn sld_recovers_qfi() {
        let st = ProbeState::flat(2);
        let sp = Spectrum::qubit();
        let l = sld(&st, &sp).unwrap();
        assert!((sld_qfi(&st, &l) - qfi(&st, &sp)).abs() < 1e-10);

        // eigenstate of h: commutator vanishes, L = 0 on support
        let e = ProbeState::basis(3, 1);
        let l = sld(&e, &Spectrum::equally_gapped(3)).unwrap();
        assert!(linalg::frobenius(&l) < 1e-12);
    }

    #[test]
    fn sld_random_states_residual(){
        let states = [
            [0.2, 0.5, 0.6],
            [0.9, 0.1, 0.3],
            [0.55, 0.55, 0.55],
        ];
        let sp = Spectrum::new(vec![0.9, 0.1, -0.7]).unwrap();
        for raw in states {
            let st = ProbeState::from_real(&raw).unwrap();
            let l = sld(&st, &sp).unwrap();
            let c = DVector::from_column_slice(st.coeffs());
            let rho = &c * c.adjoint();
            let h = DMatrix::from_diagonal(&DVector::from_iterator(
                3,
                sp.levels().iter().map(|x| C64::new(x / 2.0, 0.0)),
            ));
            let rhs = (&h * &rho - &rho * &h) * (-C64::i());
            let p = linalg::support_projector(&rho);
            let resid = &p * (&rho * &l + &l * &rho - rhs.scale(2.0)) * &p;
            assert!(linalg::frobenius(&resid) < 1e-10);
            assert!((sld_qfi(&st, &l) - qfi(&st, &sp)).abs() < 1e-10);
        }
    }

    #[test]
    fn estimators_report_physical_offset() {
        let p = Prior::gaussian(2.5, 1.0).unwrap();
        let st = ProbeState::flat(2);
        let pair = averaged_pair(&p, &st, &Spectrum::qubit(), 1.0).unwrap();
        let sol = personick_solve(&pair).unwrap();
        let phys = sol.physical_estimators();
        for (c, p) in sol.estimators.iter().zip(&phys) {
            assert!((p - c - 2.5).abs() < 1e-12);
        }
    }
}
