//! Compilation of an (effective spectrum, probe state) protocol onto
//! trapped-ion pulse primitives, and direct unitary simulation of the
//! electronic ⊗ motional register for verification.
//!
//! The register has four electronic levels {g, e, g', e'} and motional
//! levels 1..=n. The sensing field acts as `H = B (|g><g| - |e><e|)`; the
//! primed levels are static and only hold population transiently. Hiding
//! pulses `G_l` and `E_l` swap `|g', j> <-> |g, j+l>` and
//! `|e', j> <-> |e, j+l>`; pulses that would push population past the
//! motional cutoff are compile errors, never silent truncations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{ProbeState, Spectrum};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Electronic {
    G,
    E,
    GPrime,
    EPrime,
}

impl Electronic {
    fn index(self) -> usize {
        match self {
            Electronic::G => 0,
            Electronic::E => 1,
            Electronic::GPrime => 2,
            Electronic::EPrime => 3,
        }
    }
}

/// Pulse vocabulary. `G`, `E`, `XPrime`, `SigmaX` and `RedSideband` are
/// hardware primitives; `Flip` and `TwoLevelV` are standard composites
/// whose primitive realization [`expand_pulse`] provides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IonPulse {
    /// Swap `|g', j> <-> |g, j+l>` for all valid j.
    G { l: usize },
    /// Swap `|e', j> <-> |e, j+l>` for all valid j.
    E { l: usize },
    /// Swap g' and e' at every motional index.
    XPrime,
    /// Swap g and e at every motional index.
    SigmaX,
    /// Red sideband: swap `|e, j> <-> |g, j+1>`.
    RedSideband,
    /// Controlled flip `U_k`: sigma_x on the g/e pair at motional k only.
    Flip { k: usize },
    /// Arbitrary unitary on the motional pair (k1, k2) within the g sector,
    /// realized through the auxiliary levels.
    TwoLevelV { k1: usize, k2: usize, v: [[C64; 2]; 2] },
    /// Arbitrary unitary on the auxiliary pair {g', e'}.
    AuxUnitary { v: [[C64; 2]; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduledPulse {
    pub time: f64,
    pub pulse: IonPulse,
}

/// Full compiled protocol: preparation and flip pulses plus the ordered
/// motional measurement plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IonSchedule {
    pub cutoff: usize,
    pub levels: usize,
    pub total_time: f64,
    pub field: Option<f64>,
    pub pulses: Vec<ScheduledPulse>,
    /// Motional indices measured as two-outcome projections, in order.
    pub measurement: Vec<usize>,
}

/// State of the electronic ⊗ motional register.
#[derive(Debug, Clone)]
pub struct IonState {
    amps: Vec<C64>,
    cutoff: usize,
}

impl IonState {
    pub fn new(amps: Vec<C64>, cutoff: usize) -> Result<Self> {
        if amps.len() != 4 * cutoff {
            return Err(Error::DimensionMismatch {
                expected: 4 * cutoff,
                got: amps.len(),
            });
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSchedule(format!(
                "ion state norm^2 = {norm}, expected 1"
            )));
        }
        Ok(IonState { amps, cutoff })
    }

    /// The preparation starting point `|g, 1>`.
    pub fn ground(cutoff: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 4 * cutoff];
        amps[0] = C64::new(1.0, 0.0);
        IonState { amps, cutoff }
    }

    pub fn basis(el: Electronic, k: usize, cutoff: usize) -> Self {
        let mut st = IonState {
            amps: vec![C64::new(0.0, 0.0); 4 * cutoff],
            cutoff,
        };
        let idx = st.index(el, k);
        st.amps[idx] = C64::new(1.0, 0.0);
        st
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn index(&self, el: Electronic, k: usize) -> usize {
        debug_assert!((1..=self.cutoff).contains(&k));
        el.index() * self.cutoff + (k - 1)
    }

    pub fn amp(&self, el: Electronic, k: usize) -> C64 {
        self.amps[self.index(el, k)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Population in an electronic sector.
    pub fn sector_population(&self, el: Electronic) -> f64 {
        (1..=self.cutoff).map(|k| self.amp(el, k).norm_sqr()).sum()
    }

    fn swap(&mut self, a: (Electronic, usize), b: (Electronic, usize)) {
        let ia = self.index(a.0, a.1);
        let ib = self.index(b.0, b.1);
        self.amps.swap(ia, ib);
    }

    fn apply_two_level(&mut self, a: (Electronic, usize), b: (Electronic, usize), v: &[[C64; 2]; 2]) {
        let ia = self.index(a.0, a.1);
        let ib = self.index(b.0, b.1);
        let (x, y) = (self.amps[ia], self.amps[ib]);
        self.amps[ia] = v[0][0] * x + v[0][1] * y;
        self.amps[ib] = v[1][0] * x + v[1][1] * y;
    }

    /// Free field evolution for duration `dt`: g and e sectors pick
    /// opposite phases, primed sectors are static.
    pub fn evolve(&mut self, b: f64, dt: f64) {
        let g_phase = C64::from_polar(1.0, -b * dt);
        let e_phase = C64::from_polar(1.0, b * dt);
        for k in 1..=self.cutoff {
            let ig = self.index(Electronic::G, k);
            let ie = self.index(Electronic::E, k);
            self.amps[ig] *= g_phase;
            self.amps[ie] *= e_phase;
        }
    }
}

fn check_unitary(v: &[[C64; 2]; 2]) -> Result<()> {
    let m = DMatrix::from_row_slice(2, 2, &[v[0][0], v[0][1], v[1][0], v[1][1]]);
    let dev = (&m * m.adjoint() - DMatrix::identity(2, 2))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if dev > 1e-12 {
        return Err(Error::InvalidSchedule(format!(
            "pulse parameters are not unitary (deviation {dev:.2e})"
        )));
    }
    Ok(())
}

/// Apply one pulse exactly. Hiding pulses and sidebands refuse to act when
/// population would couple past the motional cutoff.
pub fn apply_pulse(state: &IonState, pulse: &IonPulse) -> Result<IonState> {
    let n = state.cutoff;
    let mut out = state.clone();
    match pulse {
        IonPulse::G { l } | IonPulse::E { l } => {
            let (hidden, open) = match pulse {
                IonPulse::G { .. } => (Electronic::GPrime, Electronic::G),
                _ => (Electronic::EPrime, Electronic::E),
            };
            // hidden |j> pairs with open |j+l>; a hidden level whose partner
            // lies past the cutoff must be empty
            for j in 1..=n {
                if j + l > n && state.amp(hidden, j).norm() > 1e-12 {
                    return Err(Error::MotionalOverflow(j + l));
                }
            }
            for j in 1..=n {
                if j + l <= n {
                    out.swap((hidden, j), (open, j + l));
                }
            }
        }
        IonPulse::XPrime => {
            for k in 1..=n {
                out.swap((Electronic::GPrime, k), (Electronic::EPrime, k));
            }
        }
        IonPulse::SigmaX => {
            for k in 1..=n {
                out.swap((Electronic::G, k), (Electronic::E, k));
            }
        }
        IonPulse::RedSideband => {
            if state.amp(Electronic::E, n).norm() > 1e-12 {
                return Err(Error::MotionalOverflow(n + 1));
            }
            for j in 1..n {
                out.swap((Electronic::E, j), (Electronic::G, j + 1));
            }
        }
        IonPulse::Flip { k } => {
            if !(1..=n).contains(k) {
                return Err(Error::PulseOutOfRange(*k));
            }
            out.swap((Electronic::G, *k), (Electronic::E, *k));
        }
        IonPulse::TwoLevelV { k1, k2, v } => {
            if !(1..=n).contains(k1) || !(1..=n).contains(k2) || k1 == k2 {
                return Err(Error::PulseOutOfRange(*k1.max(k2)));
            }
            check_unitary(v)?;
            out.apply_two_level((Electronic::G, *k1), (Electronic::G, *k2), v);
        }
        IonPulse::AuxUnitary { v } => {
            check_unitary(v)?;
            for k in 1..=n {
                out.apply_two_level((Electronic::GPrime, k), (Electronic::EPrime, k), v);
            }
        }
    }
    Ok(out)
}

/// The hiding sandwich `G_l E_l X' G_l E_l` (application order: E, G, X',
/// E, G), which acts as sigma_x on every motional index above l. Shift 0
/// collapses to a bare sigma_x.
fn hiding_sandwich(l: usize) -> Vec<IonPulse> {
    if l == 0 {
        vec![IonPulse::SigmaX]
    } else {
        vec![
            IonPulse::E { l },
            IonPulse::G { l },
            IonPulse::XPrime,
            IonPulse::E { l },
            IonPulse::G { l },
        ]
    }
}

/// Primitive pulse sequence implementing the controlled flip `U_k` on a
/// register with motional cutoff `n`: sandwiches with shifts k and k-1
/// cancel everywhere except motional k; at the top level `k = n` the
/// shift-(n-1) sandwich alone suffices.
pub fn compile_flip(k: usize, n: usize) -> Result<Vec<IonPulse>> {
    if !(1..=n).contains(&k) {
        return Err(Error::PulseOutOfRange(k));
    }
    let mut pulses = Vec::new();
    if k < n {
        pulses.extend(hiding_sandwich(k));
    }
    pulses.extend(hiding_sandwich(k - 1));
    Ok(pulses)
}

/// Transfer sequence `M` bringing `|g, k1>` and `|g, k2>` to the auxiliary
/// pair `(|g', 1>, |e', 1>)`, in application order.
fn transfer_sequence(k1: usize, k2: usize) -> Vec<IonPulse> {
    vec![
        IonPulse::Flip { k: k1 },
        IonPulse::E { l: k1 - 1 },
        IonPulse::XPrime,
        IonPulse::Flip { k: k2 },
        IonPulse::E { l: k2 - 1 },
    ]
}

/// Realize a composite pulse in terms of simpler ones: flips become hiding
/// sandwiches, two-level motional unitaries become transfer–rotate–return
/// sequences through the auxiliary levels.
pub fn expand_pulse(pulse: &IonPulse, n: usize) -> Result<Vec<IonPulse>> {
    match pulse {
        IonPulse::Flip { k } => compile_flip(*k, n),
        IonPulse::TwoLevelV { k1, k2, v } => {
            if *k1.max(k2) > n {
                return Err(Error::PulseOutOfRange(*k1.max(k2)));
            }
            let forward = transfer_sequence(*k1, *k2);
            let mut back = forward.clone();
            back.reverse();
            let mut seq = forward;
            seq.push(IonPulse::AuxUnitary { v: *v });
            seq.extend(back);
            Ok(seq)
        }
        other => Ok(vec![other.clone()]),
    }
}

/// Compile a protocol: prepare `|g> ⊗ sum c_k |k>` from `|g, 1>` via
/// two-level rotations, flip level `k` at `t_k = t (lambda_k + 1) / 2`, and
/// measure the motional register as a chain of two-outcome projections.
/// The final free state is `|e> ⊗ sum c_k exp(-i B lambda_k t) |k>`.
///
/// The emitted measurement plan acts on the motional sector after the
/// electronic state has factored out; measurements that entangle the
/// electronic and motional sectors are not compiled. Rotating the motional
/// register with [`IonPulse::TwoLevelV`] pulses before the plan realizes
/// any projective measurement in a rotated motional basis.
pub fn compile_protocol(
    spectrum: &Spectrum,
    state: &ProbeState,
    t: f64,
    cutoff: usize,
) -> Result<IonSchedule> {
    let levels = spectrum.dim();
    if state.dim() != levels {
        return Err(Error::DimensionMismatch {
            expected: levels,
            got: state.dim(),
        });
    }
    if levels > cutoff {
        return Err(Error::PulseOutOfRange(levels));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NonFinite("protocol time"));
    }

    let mut pulses = Vec::new();

    // preparation: place amplitudes top-down so each rotation meets an
    // empty destination. The rotation for level k splits off its share of
    // the mass still ahead of it; prefix sums keep the split exact even
    // when the source drains completely.
    let c = state.coeffs();
    let mut prefix = vec![0.0f64; levels];
    let mut acc = 0.0;
    for (k, ck) in c.iter().enumerate() {
        acc += ck.norm_sqr();
        prefix[k] = acc;
    }
    for k in (2..=levels).rev() {
        let rho = c[k - 1].norm();
        let phi = c[k - 1].arg();
        let ahead = prefix[k - 1];
        if ahead <= 1e-300 {
            continue;
        }
        let sin = (rho * rho / ahead).sqrt().clamp(0.0, 1.0);
        let cos = (prefix[k - 2] / ahead).sqrt().clamp(0.0, 1.0);
        let v = [
            [C64::new(cos, 0.0), -C64::from_polar(sin, -phi)],
            [C64::from_polar(sin, phi), C64::new(cos, 0.0)],
        ];
        pulses.push(ScheduledPulse {
            time: 0.0,
            pulse: IonPulse::TwoLevelV { k1: 1, k2: k, v },
        });
    }
    // residual phase on level 1
    let phi1 = c[0].arg();
    if phi1.abs() > 1e-15 && cutoff >= 2 {
        let v = [
            [C64::from_polar(1.0, phi1), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ];
        pulses.push(ScheduledPulse {
            time: 0.0,
            pulse: IonPulse::TwoLevelV { k1: 1, k2: 2, v },
        });
    }

    // flips at t_k = t (lambda_k + 1) / 2, emitted in level order so equal
    // times resolve by the stable sort
    for (k, &lambda) in spectrum.levels().iter().enumerate() {
        pulses.push(ScheduledPulse {
            time: t * (lambda + 1.0) / 2.0,
            pulse: IonPulse::Flip { k: k + 1 },
        });
    }

    Ok(IonSchedule {
        cutoff,
        levels,
        total_time: t,
        field: None,
        pulses,
        measurement: (1..=levels).collect(),
    })
}

/// Compile the protocol a lifting schedule realizes: its effective
/// eigenvalues and stick-breaking coefficients, canonicalized and mapped
/// onto the motional register at the schedule's total time.
pub fn compile_from_lift(
    schedule: &crate::engineering::LiftSchedule,
    cutoff: usize,
) -> Result<IonSchedule> {
    schedule.validate()?;
    let mus = schedule.effective_eigenvalues();
    let coeffs: Vec<C64> = schedule
        .coefficients()
        .into_iter()
        .map(|c| C64::new(c, 0.0))
        .collect();
    let (spectrum, state) = crate::engineering::canonical_pairing(&mus, &coeffs)?;
    compile_protocol(&spectrum, &state, schedule.total_time, cutoff)
}

/// Simulate a pulse list under the field `B` for total time `t`: free
/// evolution between pulses, pulses applied instantaneously in stable time
/// order.
pub fn simulate_ion(
    pulses: &[ScheduledPulse],
    b: f64,
    t: f64,
    initial: &IonState,
) -> Result<IonState> {
    let mut order: Vec<usize> = (0..pulses.len()).collect();
    order.sort_by(|&a, &z| pulses[a].time.total_cmp(&pulses[z].time));
    let mut state = initial.clone();
    let mut now = 0.0;
    for &i in &order {
        let p = &pulses[i];
        if !(0.0..=t + 1e-12).contains(&p.time) {
            return Err(Error::InvalidSchedule(format!(
                "pulse time {} outside [0, {t}]",
                p.time
            )));
        }
        if p.time > now {
            state.evolve(b, p.time - now);
            now = p.time;
        }
        state = apply_pulse(&state, &p.pulse)?;
    }
    if t > now {
        state.evolve(b, t - now);
    }
    Ok(state)
}

/// The state the compiled protocol should produce:
/// `|e> ⊗ sum c_k exp(-i B lambda_k t) |k>`.
pub fn effective_target(
    spectrum: &Spectrum,
    state: &ProbeState,
    b: f64,
    t: f64,
    cutoff: usize,
) -> Result<IonState> {
    let mut amps = vec![C64::new(0.0, 0.0); 4 * cutoff];
    for (k, (&lambda, &c)) in spectrum.levels().iter().zip(state.coeffs()).enumerate() {
        amps[Electronic::E.index() * cutoff + k] = c * C64::from_polar(1.0, -b * lambda * t);
    }
    IonState::new(amps, cutoff)
}

/// Compose the chain of two-outcome measurements `{P_k, rest}` on a state
/// living in the e sector: flip level k, read out the electronic state,
/// and continue on the dark branch. Returns the outcome distribution over
/// the planned indices plus the final remainder probability.
pub fn measurement_distribution(state: &IonState, plan: &[usize]) -> Result<Vec<f64>> {
    let mut current = state.clone();
    let mut dist = Vec::with_capacity(plan.len() + 1);
    let mut remaining_prob = 1.0;
    for &k in plan {
        if !(1..=state.cutoff()).contains(&k) {
            return Err(Error::PulseOutOfRange(k));
        }
        let flipped = apply_pulse(&current, &IonPulse::Flip { k })?;
        // bright outcome: population now in the g sector at motional k
        let p_bright = flipped.amp(Electronic::G, k).norm_sqr();
        dist.push(remaining_prob * p_bright);
        // dark branch: project out level k, flip back, renormalize
        let mut dark = flipped.clone();
        let idx = dark.index(Electronic::G, k);
        dark.amps[idx] = C64::new(0.0, 0.0);
        let norm = dark.norm();
        if norm < 1e-150 {
            remaining_prob = 0.0;
            current = dark;
            continue;
        }
        for a in dark.amps.iter_mut() {
            *a /= norm;
        }
        current = apply_pulse(&dark, &IonPulse::Flip { k })?;
        remaining_prob *= 1.0 - p_bright;
    }
    dist.push(remaining_prob);
    Ok(dist)
}
