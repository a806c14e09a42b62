//! Round-trip and simulation-oracle checks for the lifting schedules.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speclift::engineering::{
    self, angles_from_coefficients, canonical_pairing, lift_times_from_spectrum, simulate_lift,
    LiftEvent, LiftSchedule, LiftTarget, SwapSchedule,
};
use speclift::estimation::Spectrum;
use speclift::C64;

#[test]
fn lift_roundtrip_reproduces_phase_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.gen_range(2..=8);
        let spectrum = common::random_spectrum(&mut rng, n);
        let t = rng.gen_range(0.5..4.0);
        let schedule = lift_times_from_spectrum(&spectrum, t).unwrap();

        // effective eigenvalues of the event levels reproduce the targets
        let mus = schedule.effective_eigenvalues();
        for (mu, l) in mus[2..].iter().zip(spectrum.levels()) {
            assert!((mu - l).abs() < 1e-12);
        }

        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let target = LiftTarget::drained(raw.iter().map(|x| x / norm).collect());
        let filled = angles_from_coefficients(&schedule, &target).unwrap();

        // forward coefficient chain reproduces the target
        let coeffs = filled.coefficients();
        for (c, want) in coeffs[2..].iter().zip(&target.event_coeffs) {
            assert!((c - want).abs() < 1e-12);
        }

        for _ in 0..20 {
            let omega = rng.gen_range(-5.0..5.0);
            let simulated = simulate_lift(&filled, omega).unwrap();
            let closed = engineering::closed_form_state(&filled, omega);
            for (a, b) in simulated.amps.iter().zip(&closed) {
                assert!((a - b).norm() < 1e-12, "omega = {omega}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn schedule_serializes_to_json() {
    let spectrum = Spectrum::new(vec![0.8, -0.1, -0.9]).unwrap();
    let schedule = lift_times_from_spectrum(&spectrum, 2.0).unwrap();
    let target = LiftTarget::drained(vec![0.6, 0.48, 0.64]);
    let filled = angles_from_coefficients(&schedule, &target).unwrap();
    let json = serde_json::to_string(&filled).unwrap();
    let back: LiftSchedule = serde_json::from_str(&json).unwrap();
    assert_eq!(filled.events.len(), back.events.len());
    for (a, b) in filled.events.iter().zip(&back.events) {
        assert_eq!(a, b);
    }
    assert_eq!(filled.total_time, back.total_time);
}

#[test]
fn two_step_scheme_embeds_as_four_levels() {
    // a two-step predefined-time scheme maps onto a 4-level register: both
    // sources split once at t1, giving the four phase paths +-t1 +- t2
    let (t1, t2) = (0.6, 1.1);
    let total = t1 + t2;
    let quarter = std::f64::consts::FRAC_PI_4;
    let schedule = LiftSchedule {
        initial_split: (0.5f64.sqrt(), 0.5f64.sqrt()),
        events: vec![
            LiftEvent { branch: 0, ancilla: 2, time: t1, angle: quarter },
            LiftEvent { branch: 1, ancilla: 2, time: t1, angle: quarter },
        ],
        total_time: total,
    };
    for omega in [0.3, -1.2, 2.4] {
        let lifted = simulate_lift(&schedule, omega).unwrap();
        // direct two-step evolution: amplitude 1/2 on each sign path
        let path = |s1: f64, s2: f64| {
            C64::from_polar(0.5, -0.5 * omega * (s1 * t1 + s2 * t2))
        };
        // labels: (0,1) residual keeps (+,+); (1,1) keeps (-,-);
        // (0,2) flips from source 1: (-,+); (1,2) flips from source 0: (+,-)
        let expect = [path(1.0, 1.0), path(-1.0, -1.0), path(-1.0, 1.0), path(1.0, -1.0)];
        for (a, b) in lifted.amps.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12, "omega = {omega}: {a} vs {b}");
        }
    }
}

#[test]
fn swap_matches_full_two_qubit_simulation() {
    // two spins, H eigenvalues (1, 0, 0, -1) in units of omega/2 per level
    // pair; a swap of levels (a, b) at fraction x leaves the population
    // that started at `a` sitting at `b` with the mixed phase coefficient
    let base = Spectrum::new(vec![1.0, 0.0, 0.0, -1.0]).unwrap();
    let x = 0.64;
    let total = 2.3;
    let schedule = SwapSchedule {
        pairs: vec![(0, 1, x), (3, 2, x)],
        dimension: 4,
    };
    let eff = engineering::swap_effective_spectrum(&base, &schedule).unwrap();

    let omega = 1.7;
    let phase = |lambda: f64, dt: f64| C64::from_polar(1.0, -0.5 * omega * lambda * dt);
    // direct simulation: evolve, permute, evolve
    let perm = [1usize, 0, 3, 2];
    for start in 0..4 {
        let lam = base.levels();
        let first = phase(lam[start], x * total);
        let end = perm[start];
        let second = phase(lam[end], (1.0 - x) * total);
        let direct = first * second;
        let effective = phase(eff[start], total);
        assert!(
            (direct - effective).norm() < 1e-12,
            "level {start}: {direct} vs {effective}"
        );
    }
}

#[test]
fn swap_preserves_spectral_radius_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let base = common::random_spectrum(&mut rng, n);
        let mut available: Vec<usize> = (0..n).collect();
        let mut pairs = Vec::new();
        while available.len() >= 2 && rng.gen_bool(0.7) {
            let a = available.remove(rng.gen_range(0..available.len()));
            let b = available.remove(rng.gen_range(0..available.len()));
            pairs.push((a, b, rng.gen_range(0.0..1.0)));
        }
        let schedule = SwapSchedule { pairs, dimension: n };
        let eff = engineering::swap_effective_spectrum(&base, &schedule).unwrap();
        let radius = eff.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        assert!(radius <= base.spectral_radius() + 1e-12);
    }
}

#[test]
fn canonical_pairing_sorts_levels_with_state() {
    let levels = [0.3, 0.7];
    let amps = [C64::new(0.6, 0.0), C64::new(0.8, 0.0)];
    let (spectrum, state) = canonical_pairing(&levels, &amps).unwrap();
    assert_eq!(spectrum.levels(), &[0.7, 0.3]);
    assert_eq!(state.coeffs(), &[amps[1], amps[0]]);
}
