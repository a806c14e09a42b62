//! Numerical optimization drivers: optimal probe states for a fixed
//! spectrum and time, optimal measurement times, equally gapped n-level
//! sweeps, and the two-qubit degeneracy-lifting study.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engineering::{self, SwapSchedule};
use crate::error::{Error, Result};
use crate::estimation::{self, bounds, MeasurementSolution, ProbeState, Spectrum};
use crate::priors::Prior;
use crate::simplex::{self, OptDiagnostics, SimplexOptions};

/// Number of deterministic restarts per state optimization.
const RESTARTS: usize = 8;

/// Result of a probe-state optimization at fixed spectrum and time.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub state: ProbeState,
    pub spectrum: Spectrum,
    pub t: f64,
    pub mse: f64,
    pub solution: MeasurementSolution,
    pub diagnostics: OptDiagnostics,
    /// Set when a non-symmetric prior forced the complex-coefficient search.
    pub complex_fallback: bool,
}

/// Map unconstrained hyperspherical angles to unit-norm amplitudes.
pub fn hyperspherical_amplitudes(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut amps = Vec::with_capacity(n);
    let mut tail = 1.0;
    for &a in angles {
        amps.push(tail * a.cos());
        tail *= a.sin();
    }
    amps.push(tail);
    amps
}

/// Angles reproducing the given nonnegative unit amplitudes.
pub fn amplitudes_to_angles(amps: &[f64]) -> Vec<f64> {
    let n = amps.len();
    let mut angles = Vec::with_capacity(n - 1);
    let mut tail = 1.0f64;
    for &c in &amps[..n - 1] {
        let ratio = if tail > 1e-15 { (c / tail).clamp(-1.0, 1.0) } else { 1.0 };
        let a = ratio.acos();
        angles.push(a);
        tail *= a.sin();
    }
    angles
}

fn state_from_params(params: &[f64], n: usize, complex: bool) -> ProbeState {
    let amps = hyperspherical_amplitudes(&params[..n - 1]);
    // the error is invariant under per-level phases, so |amps| loses nothing
    let coeffs: Vec<crate::C64> = amps
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let phi = if complex && k > 0 { params[n - 2 + k] } else { 0.0 };
            crate::C64::from_polar(a.abs(), phi)
        })
        .collect();
    ProbeState::normalized(coeffs).expect("parametrized state normalizes")
}

/// Minimize the mean posterior variance over probe states at fixed
/// `(spectrum, t)`. Symmetric priors restrict to nonnegative real
/// coefficients; other priors fall back to a complex-coefficient search
/// and set the warning flag.
pub fn optimize_state(
    prior: &Prior,
    spectrum: &Spectrum,
    t: f64,
    seed: u64,
) -> Result<OptResult> {
    let n = spectrum.dim();
    let complex = !prior.is_symmetric();
    let dim = if complex { 2 * (n - 1) } else { n - 1 };

    let objective = |params: &[f64]| -> f64 {
        let state = state_from_params(params, n, complex);
        match estimation::averaged_pair(prior, &state, spectrum, t)
            .and_then(|pair| estimation::optimal_gain(&pair))
        {
            Ok(g) => -g,
            Err(_) => f64::INFINITY,
        }
    };

    let mut starts = simplex::det_start_points(dim, RESTARTS, 0.15, 1.40, seed);
    // flat-state warm start
    let mut flat = amplitudes_to_angles(&vec![1.0 / (n as f64).sqrt(); n]);
    flat.resize(dim, 0.0);
    starts.push(flat);

    let opts = SimplexOptions::default();
    let (params, _, diagnostics) = simplex::simplex_min_restarts(objective, &starts, &opts);

    let state = state_from_params(&params, n, complex);
    let pair = estimation::averaged_pair(prior, &state, spectrum, t)?;
    let solution = estimation::personick_solve(&pair)?;
    let mse = estimation::mse(prior, &pair, &solution);
    Ok(OptResult {
        state,
        spectrum: spectrum.clone(),
        t,
        mse,
        solution,
        diagnostics,
        complex_fallback: complex,
    })
}

/// How the probe state is chosen while searching over the time axis.
#[derive(Debug, Clone, Copy)]
pub enum StateChoice<'a> {
    Fixed(&'a ProbeState),
    Optimized { seed: u64 },
}

/// Search window for the optimal measurement time: `[0, 20 / sigma_gap]`
/// with `sigma_gap = sigma * (min spectral gap) / 2`.
pub fn tmax_window(prior: &Prior, spectrum: &Spectrum) -> f64 {
    let gap = spectrum.min_gap();
    20.0 / (prior.sigma() * gap / 2.0)
}

/// Locate the measurement time minimizing the error, by a coarse scan over
/// the window refined with golden-section search to 1e-6 relative.
pub fn find_tmax(
    prior: &Prior,
    choice: StateChoice,
    spectrum: &Spectrum,
) -> Result<(f64, f64)> {
    if let StateChoice::Fixed(state) = choice {
        if estimation::qfi(state, spectrum) < 1e-14 {
            return Err(Error::FlatObjective);
        }
    }
    let hi = tmax_window(prior, spectrum);
    let objective = |t: f64| -> f64 {
        let value = match choice {
            StateChoice::Fixed(state) => estimation::averaged_pair(prior, state, spectrum, t)
                .and_then(|pair| estimation::optimal_gain(&pair))
                .map(|g| prior.variance() - g),
            StateChoice::Optimized { seed } => {
                optimize_state(prior, spectrum, t, seed).map(|r| r.mse)
            }
        };
        value.unwrap_or(f64::INFINITY)
    };
    let scan = match choice {
        StateChoice::Fixed(_) => 600,
        StateChoice::Optimized { .. } => 150,
    };
    let (t, m) = simplex::scan_then_golden(objective, 0.0, hi, scan, 1e-8);
    Ok((t, m))
}

/// One cell of the equally gapped n-level sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub t: f64,
    pub mse: f64,
    pub bound_entropic: f64,
    pub bound_bcrb: Option<f64>,
    pub converged: bool,
}

/// The default sweep grid: 200 uniform times on `[0, 6 / sigma]`.
pub fn default_t_grid(prior: &Prior, points: usize) -> Vec<f64> {
    let hi = 6.0 / prior.sigma();
    (0..points)
        .map(|i| hi * i as f64 / (points - 1) as f64)
        .collect()
}

/// Optimize the probe state for every `(n, t)` cell over equally gapped
/// spectra. Cells are independent and evaluated in parallel; the output
/// order is deterministic (n-major, then t).
pub fn nlevel_sweep(
    prior: &Prior,
    n_range: RangeInclusive<usize>,
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let cells: Vec<(usize, f64)> = n_range
        .flat_map(|n| t_grid.iter().map(move |&t| (n, t)))
        .collect();
    cells
        .into_par_iter()
        .map(|(n, t)| {
            let spectrum = Spectrum::equally_gapped(n);
            let result = optimize_state(prior, &spectrum, t, seed)?;
            let bound_entropic = bounds::entropic_bound(prior, n)?;
            let bound_bcrb = bounds::bcrb(prior, &result.state, &spectrum, t).ok();
            Ok(SweepRow {
                n,
                t,
                mse: result.mse,
                bound_entropic,
                bound_bcrb,
                converged: result.diagnostics.converged,
            })
        })
        .collect()
}

/// The smallest level count attaining the envelope (within `slack`) at
/// each sweep time, ordered by time.
pub fn best_level_counts(rows: &[SweepRow], slack: f64) -> Vec<(f64, usize)> {
    envelope(rows)
        .into_iter()
        .map(|(t, best)| {
            let n = rows
                .iter()
                .filter(|r| r.t == t && r.mse <= best + slack)
                .map(|r| r.n)
                .min()
                .expect("envelope cell");
            (t, n)
        })
        .collect()
}

/// Handover time from n to n+1 levels: the first sweep time at or past the
/// minimum of the n-level curve where the (n+1)-level curve lies below it.
/// Before its minimum the curves are nearly degenerate; the visible
/// crossing happens once the n-level error turns back up.
pub fn crossover_time(rows: &[SweepRow], n: usize) -> Option<f64> {
    let mut curve_n: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n == n)
        .map(|r| (r.t, r.mse))
        .collect();
    curve_n.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t_min = curve_n
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(t, _)| t)?;
    curve_n
        .into_iter()
        .filter(|&(t, _)| t >= t_min)
        .find(|&(t, mse_n)| {
            rows.iter()
                .any(|r| r.n == n + 1 && r.t == t && r.mse < mse_n)
        })
        .map(|(t, _)| t)
}

/// Best achievable error per time over all swept level counts.
pub fn envelope(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    let mut ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.into_iter()
        .map(|t| {
            let best = rows
                .iter()
                .filter(|r| r.t == t)
                .map(|r| r.mse)
                .fold(f64::INFINITY, f64::min);
            (t, best)
        })
        .collect()
}

/// Optimum of the two-spin lifted family at one swap fraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftedOptimum {
    /// Swap fraction of the total evolution time.
    pub x: f64,
    pub t: f64,
    pub mse: f64,
    /// Effective eigenvalues, level-aligned with the state.
    pub levels: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Coefficient of the frequency in each level's accumulated phase,
    /// `lambda_l t / 2`.
    pub phase_coefficients: Vec<f64>,
    /// Positive estimator values of the optimal measurement, decreasing.
    pub estimators: Vec<f64>,
    /// Moduli of the optimal measurement eigenvector components, one row
    /// per positive estimator.
    pub projector_amplitudes: Vec<Vec<f64>>,
    /// Gauge-invariant relative phases `arg(v_l conj(v_mirror(l))) / 2`.
    pub projector_phases: Vec<Vec<f64>>,
}

/// Full two-spin study: free evolution against swap-lifted spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoQubitReport {
    /// Best error of the free spectrum (1, 0, 0, -1) over states and time
    /// (the degenerate zero pair merges into one effective level).
    pub free_mse: f64,
    pub free_t: f64,
    pub free_amplitudes: Vec<f64>,
    pub lifted: LiftedOptimum,
    /// free_mse / lifted.mse.
    pub improvement: f64,
    /// Largest drift of the error after freezing the phases at the optimum.
    pub frozen_deviation: f64,
}

fn lifted_levels(x: f64) -> Result<Vec<f64>> {
    let base = Spectrum::new(vec![1.0, 0.0, 0.0, -1.0])?;
    let schedule = SwapSchedule {
        pairs: vec![(0, 1, x), (3, 2, x)],
        dimension: 4,
    };
    engineering::swap_effective_spectrum(&base, &schedule)
}

/// Error of the best symmetric 4-level state for the lifted spectrum at
/// swap fraction `x` and time `t`.
fn lifted_mse(prior: &Prior, x: f64, t: f64, angles: &[f64]) -> f64 {
    let Ok(levels) = lifted_levels(x) else {
        return f64::INFINITY;
    };
    let amps = hyperspherical_amplitudes(angles);
    let coeffs: Vec<crate::C64> = amps.iter().map(|&a| crate::C64::new(a, 0.0)).collect();
    let Ok((spectrum, state)) = engineering::canonical_pairing(&levels, &coeffs) else {
        return f64::INFINITY;
    };
    estimation::averaged_pair(prior, &state, &spectrum, t)
        .and_then(|pair| estimation::optimal_gain(&pair))
        .map(|g| prior.variance() - g)
        .unwrap_or(f64::INFINITY)
}

/// Compare free two-spin evolution against swap-lifted spectra for a
/// standard Gaussian prior: optimizes (x, t, state) for the lifted family,
/// extracts the optimal state, phases and measurement, and checks that
/// freezing the phases at the optimum holds the error constant.
pub fn two_qubit_study(prior: &Prior, seed: u64) -> Result<TwoQubitReport> {
    // free evolution: the doubly degenerate zero level merges, leaving the
    // distinct spectrum (1, 0, -1)
    let free_spectrum = Spectrum::new(vec![1.0, 0.0, -1.0])?;
    let (free_t, free_mse) = find_tmax(prior, StateChoice::Optimized { seed }, &free_spectrum)?;
    let free_best = optimize_state(prior, &free_spectrum, free_t, seed)?;

    // coarse grid over (x, t) with a cheap inner state optimization
    let quick = SimplexOptions {
        max_iters: 400,
        diameter_tol: 1e-7,
        ..SimplexOptions::default()
    };
    let xs: Vec<f64> = (0..26).map(|i| 0.5 + 0.5 * i as f64 / 25.0).collect();
    let t_hi = 8.0 / prior.sigma();
    let ts: Vec<f64> = (1..=60).map(|i| t_hi * i as f64 / 60.0).collect();
    let coarse: Vec<(f64, f64, f64)> = xs
        .par_iter()
        .flat_map(|&x| ts.par_iter().map(move |&t| (x, t)))
        .map(|(x, t)| {
            let starts = simplex::det_start_points(3, 3, 0.2, 1.3, seed);
            let (_, m, _) =
                simplex::simplex_min_restarts(|a| lifted_mse(prior, x, t, a), &starts, &quick);
            (x, t, m)
        })
        .collect();
    let &(x0, t0, _) = coarse
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("non-empty grid");

    // joint refinement over (x, t, angles)
    let full = SimplexOptions {
        max_iters: 8000,
        ..SimplexOptions::default()
    };
    let joint = |p: &[f64]| lifted_mse(prior, p[0], p[1], &p[2..]);
    let mut starts = vec![];
    let base_angles = amplitudes_to_angles(&[0.5; 4]);
    starts.push([vec![x0, t0], base_angles.clone()].concat());
    for delta in simplex::det_start_points(5, 5, -0.12, 0.12, seed ^ 0x5eed) {
        let mut s = [vec![x0, t0], base_angles.clone()].concat();
        for (v, d) in s.iter_mut().zip(&delta) {
            *v += d;
        }
        starts.push(s);
    }
    let (params, _, _) = simplex::simplex_min_restarts(joint, &starts, &full);
    let (x_star, t_star) = (params[0], params[1]);

    let levels = lifted_levels(x_star)?;
    let amps_raw = hyperspherical_amplitudes(&params[2..]);
    let coeffs: Vec<crate::C64> = amps_raw
        .iter()
        .map(|&a| crate::C64::new(a.abs(), 0.0))
        .collect();
    let (spectrum, state) = engineering::canonical_pairing(&levels, &coeffs)?;
    let pair = estimation::averaged_pair(prior, &state, &spectrum, t_star)?;
    let solution = estimation::personick_solve(&pair)?;
    let mse = estimation::mse(prior, &pair, &solution);

    let phase_coefficients: Vec<f64> = spectrum
        .levels()
        .iter()
        .map(|l| l * t_star / 2.0)
        .collect();

    // positive estimators in decreasing order with their eigenvectors
    let (vals, vecs) = crate::linalg::herm_eigen(&solution.s);
    let mut estimators = Vec::new();
    let mut projector_amplitudes = Vec::new();
    let mut projector_phases = Vec::new();
    for i in 0..vals.len() {
        if vals[i] > 1e-9 {
            estimators.push(vals[i]);
            let v = vecs.column(i);
            let n = v.len();
            projector_amplitudes.push(v.iter().map(|z| z.norm()).collect());
            projector_phases.push(
                (0..n)
                    .map(|l| (v[l] * v[n - 1 - l].conj()).arg() / 2.0)
                    .collect(),
            );
        }
    }

    // freezing the phases at the optimum pins the error
    let frozen = engineering::freeze_phases(&spectrum, t_star, t_star)?;
    let mut frozen_deviation = 0.0f64;
    for factor in [1.0, 1.5, 2.0, 5.0] {
        let pair_f = estimation::averaged_pair_phases(prior, &state, &frozen, t_star * factor)?;
        let sol_f = estimation::personick_solve(&pair_f)?;
        let m = estimation::mse(prior, &pair_f, &sol_f);
        frozen_deviation = frozen_deviation.max((m - mse).abs());
    }

    Ok(TwoQubitReport {
        free_mse,
        free_t,
        free_amplitudes: free_best.state.weights().iter().map(|w| w.sqrt()).collect(),
        lifted: LiftedOptimum {
            x: x_star,
            t: t_star,
            mse,
            levels: spectrum.levels().to_vec(),
            amplitudes: state.weights().iter().map(|w| w.sqrt()).collect(),
            phase_coefficients,
            estimators,
            projector_amplitudes,
            projector_phases,
        },
        improvement: free_mse / mse,
        frozen_deviation,
    })
}
