//! Independent oracles shared by the integration tests: quadrature,
//! finite differences, and brute-force operator averaging. These must stay
//! independent of the implementation paths they check.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use speclift::estimation::{ProbeState, Spectrum};
use speclift::priors::Prior;
use speclift::C64;

/// Trapezoid quadrature of `f` over [a, b].
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / (n - 1) as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n - 1 {
        acc += f(a + h * i as f64);
    }
    acc * h
}

/// Characteristic function of a density by direct quadrature.
pub fn cf_quadrature<F: Fn(f64) -> f64>(density: F, s: f64, a: f64, b: f64, n: usize) -> C64 {
    let re = trapezoid(|w| (s * w).cos() * density(w), a, b, n);
    let im = trapezoid(|w| (s * w).sin() * density(w), a, b, n);
    C64::new(re, im)
}

/// Central finite difference of a complex-valued function.
pub fn central_diff<F: Fn(f64) -> C64>(f: F, s: f64, h: f64) -> C64 {
    (f(s + h) - f(s - h)) / (2.0 * h)
}

pub fn standard_normal_density(sigma: f64) -> impl Fn(f64) -> f64 {
    move |w: f64| (-0.5 * w * w / (sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Brute-force averaged operators on a grid prior: explicit sums of
/// `U(w) rho U(w)^dag` weighted by the grid masses (and by frequency for
/// the first-moment operator). Independent of the characteristic-function
/// construction in the library.
pub fn brute_force_pair(
    grid: &Prior,
    state: &ProbeState,
    spectrum: &Spectrum,
    t: f64,
) -> (DMatrix<C64>, DMatrix<C64>) {
    let (points, weights) = grid.grid_data().expect("grid prior");
    let n = state.dim();
    let mut gamma = DMatrix::<C64>::zeros(n, n);
    let mut eta = DMatrix::<C64>::zeros(n, n);
    for (&w, &p) in points.iter().zip(weights) {
        let psi: Vec<C64> = state
            .coeffs()
            .iter()
            .zip(spectrum.levels())
            .map(|(c, l)| c * C64::from_polar(1.0, -0.5 * w * l * t))
            .collect();
        for i in 0..n {
            for j in 0..n {
                let rho_ij = psi[i] * psi[j].conj();
                gamma[(i, j)] += p * rho_ij;
                eta[(i, j)] += p * w * rho_ij;
            }
        }
    }
    (gamma, eta)
}

/// Deterministic random unit state with complex amplitudes.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> ProbeState {
    let coeffs: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ProbeState::normalized(coeffs).expect("random state")
}

/// Deterministic random unit state with nonnegative real amplitudes.
pub fn random_positive_state<R: Rng>(rng: &mut R, n: usize) -> ProbeState {
    let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    ProbeState::from_real(&coeffs).expect("random state")
}

/// Deterministic random spectrum inside the unit radius, sorted.
pub fn random_spectrum<R: Rng>(rng: &mut R, n: usize) -> Spectrum {
    let levels: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Spectrum::new(levels).expect("random spectrum")
}

pub fn frob(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
