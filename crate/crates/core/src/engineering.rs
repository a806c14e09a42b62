//! Degeneracy lifting: timed control schedules that turn a sensing qubit
//! plus auxiliary levels into an effective multi-level system with a chosen
//! spectrum and state, plus the multi-qubit variants (swap-based lifting,
//! phase freezing, band capacity).
//!
//! A schedule acts on the register spanned by `|j, k>` with electronic
//! branch `j` in {0, 1} and ancilla index `k >= 1`; the two source levels
//! `|0,1>` and `|1,1>` hold the initial amplitudes `(c0, s0)`. An event on
//! destination branch `j` at time `t_e` rotates amplitude out of the
//! opposite source `|1-j, 1>` into the fresh level `|j, k>`, which then
//! accumulates phase at the electronic rate of branch `j`. At total time
//! `t` the level carries the effective eigenvalue
//! `mu = (1 - 2 j) (1 - 2 t_e / t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{ProbeState, Spectrum};
use crate::C64;

/// One timed control rotation: moves amplitude from the source level
/// `|1-branch, 1>` into the destination level `|branch, ancilla>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftEvent {
    /// Destination electronic branch, 0 or 1.
    pub branch: u8,
    /// Destination ancilla index, >= 2 (index 1 names the source levels).
    pub ancilla: usize,
    /// Time of the rotation, in [0, total_time].
    pub time: f64,
    /// Rotation angle in [0, pi/2]; sin(angle) of the source moves over.
    pub angle: f64,
}

/// Basis label of one level of the lifted register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelLabel {
    pub branch: u8,
    pub ancilla: usize,
}

/// A complete lifting schedule: initial source split plus timed rotations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftSchedule {
    /// Amplitudes `(c0, s0)` of the source levels `|0,1>` and `|1,1>`.
    pub initial_split: (f64, f64),
    pub events: Vec<LiftEvent>,
    pub total_time: f64,
}

/// Final state of a simulated schedule: complex amplitudes per level, in
/// the order `[(0,1), (1,1), events...]`.
#[derive(Debug, Clone)]
pub struct LiftedState {
    pub labels: Vec<LevelLabel>,
    pub amps: Vec<C64>,
}

impl LiftSchedule {
    pub fn validate(&self) -> Result<()> {
        let (c0, s0) = self.initial_split;
        if !(c0.is_finite() && s0.is_finite()) || c0 < 0.0 || s0 < 0.0 {
            return Err(Error::InvalidSchedule("bad initial split".into()));
        }
        if (c0 * c0 + s0 * s0 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSchedule(
                "initial split is not normalized".into(),
            ));
        }
        if !self.total_time.is_finite() || self.total_time < 0.0 {
            return Err(Error::InvalidSchedule("bad total time".into()));
        }
        let mut last_time = [0.0f64; 2];
        let mut seen: Vec<LevelLabel> = Vec::new();
        for e in &self.events {
            if e.branch > 1 {
                return Err(Error::InvalidSchedule(format!("branch {} not in {{0,1}}", e.branch)));
            }
            if e.ancilla < 2 {
                return Err(Error::InvalidSchedule(
                    "ancilla index must be >= 2 (1 names the sources)".into(),
                ));
            }
            if !(0.0..=self.total_time + 1e-12).contains(&e.time) {
                return Err(Error::InvalidSchedule(format!(
                    "event time {} outside [0, {}]",
                    e.time, self.total_time
                )));
            }
            if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&e.angle) {
                return Err(Error::InvalidSchedule(format!(
                    "angle {} outside [0, pi/2]",
                    e.angle
                )));
            }
            let b = e.branch as usize;
            if e.time < last_time[b] - 1e-12 {
                return Err(Error::InvalidSchedule(
                    "times must be non-decreasing within each branch".into(),
                ));
            }
            last_time[b] = e.time;
            let label = LevelLabel {
                branch: e.branch,
                ancilla: e.ancilla,
            };
            if seen.contains(&label) {
                return Err(Error::InvalidSchedule(format!(
                    "level ({}, {}) used twice",
                    e.branch, e.ancilla
                )));
            }
            seen.push(label);
        }
        Ok(())
    }

    /// Level labels in simulation order: the two sources, then the events.
    pub fn labels(&self) -> Vec<LevelLabel> {
        let mut labels = vec![
            LevelLabel { branch: 0, ancilla: 1 },
            LevelLabel { branch: 1, ancilla: 1 },
        ];
        labels.extend(self.events.iter().map(|e| LevelLabel {
            branch: e.branch,
            ancilla: e.ancilla,
        }));
        labels
    }

    /// Effective eigenvalue of every level, aligned with [`Self::labels`].
    /// The sources keep `+1` and `-1`; an event on branch `j` at time `t_e`
    /// yields `(1 - 2 j)(1 - 2 t_e / total_time)`.
    pub fn effective_eigenvalues(&self) -> Vec<f64> {
        let mut mus = vec![1.0, -1.0];
        for e in &self.events {
            let sign = 1.0 - 2.0 * e.branch as f64;
            let lam = if self.total_time > 0.0 {
                1.0 - 2.0 * e.time / self.total_time
            } else {
                1.0
            };
            mus.push(sign * lam);
        }
        mus
    }

    /// Coefficients produced by the stick-breaking angle chain, aligned
    /// with [`Self::labels`]. Within each destination branch, in event
    /// order: `c = source * sin(angle) * prod(cos(earlier angles))`; the
    /// sources keep `split * prod(cos(all angles draining them))`.
    pub fn coefficients(&self) -> Vec<f64> {
        let (c0, s0) = self.initial_split;
        // events on destination branch j drain source 1-j
        let mut remaining = [c0, s0];
        let mut coeffs = Vec::with_capacity(self.events.len() + 2);
        coeffs.push(0.0); // placeholder for (0,1)
        coeffs.push(0.0); // placeholder for (1,1)
        for e in &self.events {
            let src = 1 - e.branch as usize;
            coeffs.push(remaining[src] * e.angle.sin());
            remaining[src] *= e.angle.cos();
        }
        coeffs[0] = remaining[0];
        coeffs[1] = remaining[1];
        coeffs
    }
}

/// Canonical schedule (times only) realizing a target spectrum at total
/// time `t`: every target eigenvalue `mu`, taken in non-increasing order,
/// becomes a destination-branch-0 level rotated out of `|1,1>` at
/// `t_e = t (1 - mu) / 2`, so the rotation times are non-decreasing and the
/// effective eigenvalues round-trip exactly. All population starts in the
/// `|1,1>` source (`initial_split = (0, 1)`); angles are left at zero for
/// [`angles_from_coefficients`] to fill.
pub fn lift_times_from_spectrum(spectrum: &Spectrum, t: f64) -> Result<LiftSchedule> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidSchedule(format!("total time {t} must be positive")));
    }
    if spectrum.spectral_radius() > 1.0 + 1e-12 {
        return Err(Error::InfeasibleSpectrum(spectrum.spectral_radius()));
    }
    let events = spectrum
        .levels()
        .iter()
        .enumerate()
        .map(|(i, &mu)| LiftEvent {
            branch: 0,
            ancilla: i + 2,
            time: t * (1.0 - mu) / 2.0,
            angle: 0.0,
        })
        .collect();
    let schedule = LiftSchedule {
        initial_split: (0.0, 1.0),
        events,
        total_time: t,
    };
    schedule.validate()?;
    Ok(schedule)
}

/// Target coefficients for a schedule: one amplitude per event (aligned
/// with the event list) plus the residual amplitudes left in the sources.
#[derive(Debug, Clone)]
pub struct LiftTarget {
    pub event_coeffs: Vec<f64>,
    /// Amplitude left in `|0,1>` after all branch-1 events.
    pub residual0: f64,
    /// Amplitude left in `|1,1>` after all branch-0 events.
    pub residual1: f64,
}

impl LiftTarget {
    /// Target with nothing left in the sources.
    pub fn drained(event_coeffs: Vec<f64>) -> Self {
        LiftTarget {
            event_coeffs,
            residual0: 0.0,
            residual1: 0.0,
        }
    }
}

/// Invert the stick-breaking chain: fill in the rotation angles so the
/// schedule's forward map reproduces `target`. Coefficients must be
/// nonnegative and consistent with the initial split branch by branch
/// (events on branch `j` plus the residual of source `1-j` must carry the
/// squared amplitude of that source).
pub fn angles_from_coefficients(
    schedule: &LiftSchedule,
    target: &LiftTarget,
) -> Result<LiftSchedule> {
    if target.event_coeffs.len() != schedule.events.len() {
        return Err(Error::DimensionMismatch {
            expected: schedule.events.len(),
            got: target.event_coeffs.len(),
        });
    }
    for &c in target
        .event_coeffs
        .iter()
        .chain([&target.residual0, &target.residual1])
    {
        if c < 0.0 {
            return Err(Error::NegativeCoefficient(c));
        }
    }
    let (c0, s0) = schedule.initial_split;
    // per-branch normalization check
    let mut branch_sum = [target.residual1 * target.residual1, target.residual0 * target.residual0];
    for (e, c) in schedule.events.iter().zip(&target.event_coeffs) {
        branch_sum[e.branch as usize] += c * c;
    }
    if (branch_sum[0] - s0 * s0).abs() > 1e-9 || (branch_sum[1] - c0 * c0).abs() > 1e-9 {
        return Err(Error::InvalidSchedule(format!(
            "targets are inconsistent with the initial split: branch sums ({}, {}) vs ({}, {})",
            branch_sum[0],
            branch_sum[1],
            s0 * s0,
            c0 * c0
        )));
    }

    let mut out = schedule.clone();
    // mass still ahead of each event on its source: the suffix sum of the
    // later targets plus the source residual. Keeps the chain exact even
    // when a source drains completely.
    let mut ahead = [
        target.residual0 * target.residual0,
        target.residual1 * target.residual1,
    ];
    let mut suffix = vec![0.0f64; out.events.len()];
    for (i, (e, &c)) in out.events.iter().zip(&target.event_coeffs).enumerate().rev() {
        let src = 1 - e.branch as usize;
        ahead[src] += c * c;
        suffix[i] = ahead[src];
    }
    for (i, (e, &c)) in out
        .events
        .iter_mut()
        .zip(&target.event_coeffs)
        .enumerate()
    {
        if suffix[i] <= 1e-300 {
            // zero-amplitude tail: angle 0 avoids 0/0 in the chain
            e.angle = 0.0;
            continue;
        }
        e.angle = (c * c / suffix[i]).sqrt().clamp(0.0, 1.0).asin();
    }
    out.validate()?;
    Ok(out)
}

/// Closed-form final state: coefficient chain and per-level phases
/// `exp(-i (w/2) mu t)`, aligned with [`LiftSchedule::labels`].
pub fn closed_form_state(schedule: &LiftSchedule, omega: f64) -> Vec<C64> {
    let coeffs = schedule.coefficients();
    let mus = schedule.effective_eigenvalues();
    coeffs
        .iter()
        .zip(&mus)
        .map(|(&c, &mu)| C64::from_polar(c, -0.5 * omega * mu * schedule.total_time))
        .collect()
}

/// Simulate the schedule directly: piecewise free evolution at the
/// electronic rates interleaved with the rotation events.
pub fn simulate_lift(schedule: &LiftSchedule, omega: f64) -> Result<LiftedState> {
    schedule.validate()?;
    let labels = schedule.labels();
    let n = labels.len();
    let mut amps = vec![C64::new(0.0, 0.0); n];
    amps[0] = C64::new(schedule.initial_split.0, 0.0);
    amps[1] = C64::new(schedule.initial_split.1, 0.0);
    // electronic sign of each level: branch 0 runs at +1, branch 1 at -1
    let signs: Vec<f64> = labels.iter().map(|l| 1.0 - 2.0 * l.branch as f64).collect();

    let mut order: Vec<usize> = (0..schedule.events.len()).collect();
    order.sort_by(|&a, &b| schedule.events[a].time.total_cmp(&schedule.events[b].time));

    let mut now = 0.0;
    let advance = |amps: &mut Vec<C64>, from: f64, to: f64| {
        let dt = to - from;
        if dt <= 0.0 {
            return;
        }
        for (a, s) in amps.iter_mut().zip(&signs) {
            *a *= C64::from_polar(1.0, -0.5 * omega * s * dt);
        }
    };

    for &ei in &order {
        let e = &schedule.events[ei];
        advance(&mut amps, now, e.time);
        now = now.max(e.time);
        let src = 1 - e.branch as usize; // source level index in `labels`
        let dst = 2 + ei;
        let (cos, sin) = (e.angle.cos(), e.angle.sin());
        let a_src = amps[src];
        let a_dst = amps[dst];
        amps[src] = cos * a_src - sin * a_dst;
        amps[dst] = sin * a_src + cos * a_dst;
    }
    advance(&mut amps, now, schedule.total_time);
    Ok(LiftedState { labels, amps })
}

/// Swap schedule on a multi-qubit register: disjoint level pairs swapped at
/// a fraction of the total evolution time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwapSchedule {
    /// `(a, b, x)`: swap levels `a` and `b` at time `x T`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub dimension: usize,
}

/// Effective eigenvalues after the swaps, aligned with the base levels:
/// a pair `(a, b, x)` yields `x l_a + (1-x) l_b` on `a` and
/// `(1-x) l_a + x l_b` on `b`; untouched levels are unchanged.
///
/// The result is level-aligned with `base` and deliberately not reordered;
/// use [`canonical_pairing`] to sort it together with a state.
pub fn swap_effective_spectrum(base: &Spectrum, schedule: &SwapSchedule) -> Result<Vec<f64>> {
    if schedule.dimension != base.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            got: schedule.dimension,
        });
    }
    let mut used = vec![false; base.dim()];
    let mut out = base.levels().to_vec();
    for &(a, b, x) in &schedule.pairs {
        if a >= base.dim() || b >= base.dim() {
            return Err(Error::PulseOutOfRange(a.max(b)));
        }
        if a == b {
            return Err(Error::OverlappingSwapPairs(a));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidSchedule(format!("swap fraction {x} outside [0,1]")));
        }
        for idx in [a, b] {
            if used[idx] {
                return Err(Error::OverlappingSwapPairs(idx));
            }
            used[idx] = true;
        }
        let (la, lb) = (base.levels()[a], base.levels()[b]);
        out[a] = x * la + (1.0 - x) * lb;
        out[b] = (1.0 - x) * la + x * lb;
    }
    Ok(out)
}

/// Jointly sort level values and state amplitudes into the canonical
/// non-increasing spectrum order.
pub fn canonical_pairing(levels: &[f64], amps: &[C64]) -> Result<(Spectrum, ProbeState)> {
    if levels.len() != amps.len() {
        return Err(Error::DimensionMismatch {
            expected: levels.len(),
            got: amps.len(),
        });
    }
    let mut idx: Vec<usize> = (0..levels.len()).collect();
    idx.sort_by(|&a, &b| levels[b].total_cmp(&levels[a]));
    let spectrum = Spectrum::new(idx.iter().map(|&i| levels[i]).collect())?;
    let state = ProbeState::new(idx.iter().map(|&i| amps[i]).collect())?;
    Ok((spectrum, state))
}

/// Accumulated phase coefficients with every level frozen at `t_star`:
/// constant `lambda_l t_star` for any evaluation time `t >= t_star`.
pub fn freeze_phases(spectrum: &Spectrum, t_star: f64, t: f64) -> Result<Vec<f64>> {
    if t < t_star {
        return Err(Error::FreezeAfterEnd { t_star, t });
    }
    Ok(spectrum.levels().iter().map(|l| l * t_star).collect())
}

/// Usable level count and spectral radius factor when an N-qubit register
/// restricts itself to the middle excitation band `N/4 <= k <= 3N/4`:
/// conservatively the smallest multiplicity in the band, with the spectral
/// width halved.
pub fn band_capacity(n_qubits: usize) -> Result<(usize, f64)> {
    if n_qubits < 2 {
        return Err(Error::InvalidSchedule("need at least two qubits".into()));
    }
    let n = n_qubits as f64;
    let k_lo = (n / 4.0).ceil() as usize;
    let k_hi = (3.0 * n / 4.0).floor() as usize;
    let mut min_mult = f64::INFINITY;
    for k in k_lo..=k_hi {
        min_mult = min_mult.min(ln_binom(n_qubits, k));
    }
    Ok((min_mult.exp().round() as usize, 0.5))
}

/// `ln C(n, ceil(n/4)) / n`: the exponential growth rate of the usable
/// band capacity, approaching 0.5623 for large registers.
pub fn band_growth_rate(n_qubits: usize) -> f64 {
    let k = (n_qubits as f64 / 4.0).ceil() as usize;
    ln_binom(n_qubits, k) / n_qubits as f64
}

fn ln_binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 0.0;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}
