//! End-to-end estimation strategies.
//!
//! The on-the-fly protocol keeps a single preparation alive: controls at
//! multiples of a step `tau` split population between adjacent phase tracks
//! so that the running state stays (nearly) optimal as more effective
//! levels become populated. The sequential strategy instead measures and
//! re-prepares, with step times chosen under a Gaussian approximation of
//! the running posterior.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{self, ProbeState, Spectrum};
use crate::priors::Prior;
use crate::simplex::{self, OptDiagnostics, SimplexOptions};

/// Largest supported number of on-the-fly control steps.
pub const MAX_ONTHEFLY_STEPS: usize = 9;

/// Largest supported exact sequential simulation depth (the outcome tree
/// has 2^steps leaves).
pub const MAX_SEQUENTIAL_STEPS: usize = 12;

/// Heuristic stroboscopic step for a Gaussian prior, in units of 1/sigma.
pub const TAU_FACTOR: f64 = 0.775;

/// One population component of the running state: `weight` is the squared
/// amplitude, the accumulated phase coefficient is `grid * tau`, and `sign`
/// is the electronic rate (+1 or -1) it carried over the last interval.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepComponent {
    pub amplitude: f64,
    pub grid: i32,
    pub sign: i8,
}

/// State of the protocol at one measurement opportunity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolStep {
    /// Time of this step, a multiple of tau.
    pub time: f64,
    /// Population components ordered by decreasing phase coefficient.
    pub components: Vec<StepComponent>,
    /// Mean posterior variance if the optimal measurement is performed now.
    pub mse_if_measured_now: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub tau: f64,
    pub steps: Vec<ProtocolStep>,
    /// Set when the reshuffle optimizer found no admissible improvement and
    /// the trace stops early.
    pub truncated: bool,
    pub diagnostics: OptDiagnostics,
}

impl ProtocolStep {
    /// Merge components with equal accumulated phase into effective levels:
    /// amplitudes add in quadrature, phases sorted in decreasing order.
    /// Returns (phase coefficients, amplitudes).
    pub fn merged(&self, tau: f64) -> (Vec<f64>, Vec<f64>) {
        let mut grids: Vec<i32> = self.components.iter().map(|c| c.grid).collect();
        grids.sort_unstable();
        grids.dedup();
        grids.reverse();
        let amps: Vec<f64> = grids
            .iter()
            .map(|&g| {
                self.components
                    .iter()
                    .filter(|c| c.grid == g)
                    .map(|c| c.amplitude * c.amplitude)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        (grids.iter().map(|&g| g as f64 * tau).collect(), amps)
    }

    /// Number of populated effective levels.
    pub fn level_count(&self, tau: f64) -> usize {
        let (_, amps) = self.merged(tau);
        amps.iter().filter(|a| **a > 1e-9).count()
    }

    /// Effective spectrum (phase coefficient / time) and merged state.
    pub fn spectrum_state(&self, tau: f64) -> Result<(Spectrum, ProbeState)> {
        let (phases, amps) = self.merged(tau);
        let spectrum = Spectrum::new(phases.iter().map(|p| p / self.time).collect())?;
        let state = ProbeState::from_real(&amps)?;
        Ok((spectrum, state))
    }
}

impl ProtocolTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// CSV rows `(step, time, level_index, weight, phase_coefficient, mse)`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,time,level_index,weight,phase_coefficient,mse")?;
        for (k, step) in self.steps.iter().enumerate() {
            for (i, c) in step.components.iter().enumerate() {
                writeln!(
                    w,
                    "{},{:.12e},{},{:.12e},{:.12e},{:.12e}",
                    k,
                    step.time,
                    i,
                    c.amplitude * c.amplitude,
                    c.grid as f64 * self.tau,
                    step.mse_if_measured_now
                )?;
            }
        }
        Ok(())
    }
}

/// Evaluate the mean posterior variance of a merged state with phase
/// coefficients `phases` at nominal time `t`.
fn merged_mse(prior: &Prior, phases: &[f64], amps: &[f64], t: f64) -> Result<f64> {
    let state = ProbeState::from_real(amps)?;
    let pair = estimation::averaged_pair_phases(prior, &state, phases, t)?;
    let sol = estimation::personick_solve(&pair)?;
    Ok(estimation::mse(prior, &pair, &sol))
}

/// Run the stroboscopic protocol: starting from the equal two-level
/// superposition, introduce one effective level per step by splitting each
/// running level between the two electronic rates, choosing the splits that
/// minimize the error at the next measurement opportunity.
pub fn onthefly_run(
    prior: &Prior,
    steps: usize,
    tau: Option<f64>,
    seed: u64,
) -> Result<ProtocolTrace> {
    if !prior.is_symmetric() {
        return Err(Error::InvalidPrior(
            "the stroboscopic protocol expects a symmetric prior".into(),
        ));
    }
    if steps > MAX_ONTHEFLY_STEPS {
        return Err(Error::TooManySteps(steps, MAX_ONTHEFLY_STEPS));
    }
    let tau = tau.unwrap_or(TAU_FACTOR / prior.sigma());
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::NonFinite("tau"));
    }

    let opts = SimplexOptions {
        step: 0.3,
        ..SimplexOptions::default()
    };
    let mut diagnostics = OptDiagnostics::default();
    let mut truncated = false;

    // merged state at time k tau: amplitudes on the phase grid
    // g in {-k, -k+2, ..., k}
    let half = 0.5f64.sqrt();
    let mut grids: Vec<i32> = vec![1, -1];
    let mut amps: Vec<f64> = vec![half, half];

    let first = ProtocolStep {
        time: tau,
        components: vec![
            StepComponent { amplitude: half, grid: 1, sign: 1 },
            StepComponent { amplitude: half, grid: -1, sign: -1 },
        ],
        mse_if_measured_now: merged_mse(
            prior,
            &[tau, -tau],
            &amps,
            tau,
        )?,
    };
    let mut trace = vec![first];

    for k in 1..=steps {
        let t_next = (k + 1) as f64 * tau;
        let n_src = amps.len();
        let src_amps = amps.clone();
        let src_grids = grids.clone();

        // next phase grid: one more level, shifted parity
        let next_grids: Vec<i32> = (0..=k + 1)
            .map(|m| (k as i32 + 1) - 2 * m as i32)
            .collect();
        let next_phases: Vec<f64> = next_grids.iter().map(|&g| g as f64 * tau).collect();

        // split angles: source m sends cos(a_m) up (+tau) and sin(a_m) down
        let objective = |angles: &[f64]| -> f64 {
            let mut next = vec![0.0f64; next_grids.len()];
            for m in 0..n_src {
                let up = src_amps[m] * angles[m].cos();
                let dn = src_amps[m] * angles[m].sin();
                let up_slot = next_grids
                    .iter()
                    .position(|&g| g == src_grids[m] + 1)
                    .expect("up slot on grid");
                let dn_slot = next_grids
                    .iter()
                    .position(|&g| g == src_grids[m] - 1)
                    .expect("down slot on grid");
                next[up_slot] += up * up;
                next[dn_slot] += dn * dn;
            }
            let merged: Vec<f64> = next.iter().map(|w| w.sqrt()).collect();
            merged_mse(prior, &next_phases, &merged, t_next).unwrap_or(f64::INFINITY)
        };

        let starts = simplex::det_start_points(n_src, 8, 0.0, std::f64::consts::FRAC_PI_2, seed ^ k as u64);
        let (best_angles, best_mse, diag) = simplex::simplex_min_restarts(objective, &starts, &opts);
        diagnostics.iterations += diag.iterations;
        diagnostics.restarts += diag.restarts;
        diagnostics.converged |= diag.converged;

        let prev_mse = trace.last().unwrap().mse_if_measured_now;
        if !best_mse.is_finite() || best_mse > prev_mse + 1e-12 {
            truncated = true;
            break;
        }

        // materialize the optimal splits as trace components
        let mut components = Vec::with_capacity(2 * n_src);
        let mut next = vec![0.0f64; next_grids.len()];
        for m in 0..n_src {
            let up = (src_amps[m] * best_angles[m].cos()).abs();
            let dn = (src_amps[m] * best_angles[m].sin()).abs();
            components.push(StepComponent { amplitude: up, grid: src_grids[m] + 1, sign: 1 });
            components.push(StepComponent { amplitude: dn, grid: src_grids[m] - 1, sign: -1 });
            let up_slot = next_grids.iter().position(|&g| g == src_grids[m] + 1).unwrap();
            let dn_slot = next_grids.iter().position(|&g| g == src_grids[m] - 1).unwrap();
            next[up_slot] += up * up;
            next[dn_slot] += dn * dn;
        }
        components.sort_by_key(|c| std::cmp::Reverse((c.grid, c.sign)));
        components.retain(|c| c.amplitude > 1e-12);

        // renormalize against float drift
        let norm: f64 = next.iter().sum::<f64>().sqrt();
        grids = next_grids;
        amps = next.iter().map(|w| w.sqrt() / norm).collect();

        trace.push(ProtocolStep {
            time: t_next,
            components,
            mse_if_measured_now: best_mse,
        });
    }

    Ok(ProtocolTrace {
        tau,
        steps: trace,
        truncated,
        diagnostics,
    })
}

/// Apply two-level rotations between adjacent entries of a weight vector,
/// in the listed order. Each rotation `(i, angle)` acts on entries
/// `(i, i+1)`; the Euclidean norm is preserved.
pub fn reshuffle_reachable(weights: &[f64], rotations: &[(usize, f64)]) -> Result<Vec<f64>> {
    let norm_sq: f64 = weights.iter().map(|w| w * w).sum();
    if (norm_sq - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSchedule(format!(
            "weights have squared norm {norm_sq}, expected 1"
        )));
    }
    let mut v = weights.to_vec();
    for &(i, angle) in rotations {
        if i + 1 >= v.len() {
            return Err(Error::PulseOutOfRange(i));
        }
        let (c, s) = (angle.cos(), angle.sin());
        let (a, b) = (v[i], v[i + 1]);
        v[i] = c * a - s * b;
        v[i + 1] = s * a + c * b;
    }
    Ok(v)
}

/// The sine-profile state over n levels, `c_l ~ sin(pi l / (n + 1))`; its
/// weights satisfy the adjacent-reshuffle property, so it is reachable by
/// the stroboscopic controls. Standard form, sourced from the phase
/// estimation literature rather than derived here.
pub fn sine_state(n: usize) -> ProbeState {
    let raw: Vec<f64> = (1..=n)
        .map(|l| (std::f64::consts::PI * l as f64 / (n as f64 + 1.0)).sin())
        .collect();
    ProbeState::from_real(&raw).expect("sine state normalizes")
}

/// Geometric measurement plan under the Gaussian posterior approximation:
/// every step shrinks the variance by `R = 1 - A exp(-A)` and runs for
/// `t_k = sqrt(A / V_k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequentialPlan {
    pub a: f64,
    pub r: f64,
    pub v0: f64,
    /// Variances V_0 .. V_steps.
    pub variances: Vec<f64>,
    /// Interrogation times t_0 .. t_{steps-1}.
    pub times: Vec<f64>,
    /// Cumulative times T_0 .. T_steps.
    pub cumulative: Vec<f64>,
}

/// Per-step variance reduction factor `R = 1 - A exp(-A)`.
pub fn reduction_factor(a: f64) -> f64 {
    1.0 - a * (-a).exp()
}

/// Asymptotic inverse-variance rate: `1/V ~ coeff * T^2` with
/// `coeff = (R^{-1/2} - 1)^2 / A`.
pub fn asymptotic_coefficient(a: f64) -> f64 {
    let r = reduction_factor(a);
    (r.powf(-0.5) - 1.0).powi(2) / a
}

pub fn sequential_plan(v0: f64, a: f64, steps: usize) -> Result<SequentialPlan> {
    if !(v0.is_finite() && v0 > 0.0) {
        return Err(Error::NonFinite("initial variance"));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::NonFinite("step constant A"));
    }
    let r = reduction_factor(a);
    if !(0.0 < r && r < 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "reduction factor {r} outside (0, 1)"
        )));
    }
    let variances: Vec<f64> = (0..=steps).map(|k| r.powi(k as i32) * v0).collect();
    let times: Vec<f64> = variances[..steps].iter().map(|v| (a / v).sqrt()).collect();
    let denom = r.powf(-0.5) - 1.0;
    let cumulative: Vec<f64> = (0..=steps)
        .map(|k| (a / v0).sqrt() * (r.powf(-(k as f64) / 2.0) - 1.0) / denom)
        .collect();
    Ok(SequentialPlan {
        a,
        r,
        v0,
        variances,
        times,
        cumulative,
    })
}

/// Maximize the asymptotic coefficient over the step constant A.
pub fn sequential_optimize_a() -> (f64, f64) {
    let (a, neg) = simplex::scan_then_golden(|a| -asymptotic_coefficient(a), 1e-3, 10.0, 2000, 1e-10);
    (a, -neg)
}

/// Exact sequential estimation on a grid prior: run the optimal qubit
/// measurement at each given time, enumerate the full outcome tree, and
/// return the exact mean posterior variance. The Gaussian-approximation
/// plan is the coarse model; this is its oracle.
pub fn sequential_simulate(prior: &Prior, steps: usize, times: &[f64]) -> Result<f64> {
    if steps > MAX_SEQUENTIAL_STEPS {
        return Err(Error::TooManySteps(steps, MAX_SEQUENTIAL_STEPS));
    }
    if times.len() < steps {
        return Err(Error::DimensionMismatch {
            expected: steps,
            got: times.len(),
        });
    }
    prior.grid_data()?;
    fn recurse(prior: &Prior, remaining: &[f64]) -> Result<f64> {
        let Some((&t, rest)) = remaining.split_first() else {
            return Ok(prior.variance());
        };
        let state = ProbeState::flat(2);
        let spectrum = Spectrum::qubit();
        let pair = estimation::averaged_pair(prior, &state, &spectrum, t)?;
        let sol = estimation::personick_solve(&pair)?;
        let (points, _) = prior.grid_data()?;
        let c = state.coeffs();
        let mut acc = 0.0;
        for proj in &sol.projectors {
            let lik: Vec<f64> = points
                .iter()
                .map(|&w| {
                    let psi = nalgebra::DVector::from_iterator(
                        2,
                        (0..2).map(|l| {
                            c[l] * crate::C64::from_polar(
                                1.0,
                                -0.5 * w * spectrum.levels()[l] * t,
                            )
                        }),
                    );
                    ((psi.adjoint() * proj * &psi)[(0, 0)].re).clamp(0.0, 1.0)
                })
                .collect();
            match prior.posterior_update(&lik) {
                Ok((posterior, evidence)) => {
                    acc += evidence * recurse(&posterior, rest)?;
                }
                Err(Error::ZeroEvidence) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(acc)
    }
    recurse(prior, &times[..steps])
}
