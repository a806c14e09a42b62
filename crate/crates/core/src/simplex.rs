//! Derivative-free minimization: a dense Nelder-Mead simplex with
//! deterministic restarts, and golden-section refinement for 1-D searches.
//!
//! The optimization problems in this crate are small (at most nine
//! parameters) and smooth, so a compact simplex search with a handful of
//! deterministic restarts is reliable and keeps every run bit-reproducible.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Terminate when the simplex diameter falls below this.
    pub diameter_tol: f64,
    /// Terminate when the function spread across the simplex falls below this.
    pub f_tol: f64,
    /// Initial step used to build the starting simplex.
    pub step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iters: 4000,
            diameter_tol: 1e-10,
            f_tol: 1e-13,
            step: 0.35,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct OptDiagnostics {
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

/// One Nelder-Mead run from a single starting point.
pub fn simplex_min<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &SimplexOptions,
) -> (Vec<f64>, f64, OptDiagnostics) {
    let n = x0.len();
    assert!(n >= 1);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    let mut fs: Vec<f64> = pts.iter().map(|p| f(p)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iters = 0;
    let mut converged = false;
    while iters < opts.max_iters {
        iters += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| pts[i].clone()).collect();
        let fs_re: Vec<f64> = order.iter().map(|&i| fs[i]).collect();
        pts = reordered;
        fs = fs_re;

        let diameter = pts[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[0])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if diameter < opts.diameter_tol || (fs[n] - fs[0]).abs() < opts.f_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = pts[n].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let f_r = f(&reflect);

        if f_r < fs[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let f_e = f(&expand);
            if f_e < f_r {
                pts[n] = expand;
                fs[n] = f_e;
            } else {
                pts[n] = reflect;
                fs[n] = f_r;
            }
        } else if f_r < fs[n - 1] {
            pts[n] = reflect;
            fs[n] = f_r;
        } else {
            let (base, f_base) = if f_r < fs[n] {
                (reflect.clone(), f_r)
            } else {
                (worst.clone(), fs[n])
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&base)
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let f_c = f(&contract);
            if f_c < f_base {
                pts[n] = contract;
                fs[n] = f_c;
            } else {
                // shrink toward the best vertex
                for i in 1..=n {
                    for j in 0..n {
                        pts[i][j] = pts[0][j] + sigma * (pts[i][j] - pts[0][j]);
                    }
                    fs[i] = f(&pts[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if fs[i] < fs[best] {
            best = i;
        }
    }
    (
        pts[best].clone(),
        fs[best],
        OptDiagnostics {
            iterations: iters,
            restarts: 1,
            converged,
        },
    )
}

/// Minimize over several deterministic starting points, keeping the best.
pub fn simplex_min_restarts<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    starts: &[Vec<f64>],
    opts: &SimplexOptions,
) -> (Vec<f64>, f64, OptDiagnostics) {
    assert!(!starts.is_empty());
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut diag = OptDiagnostics::default();
    for x0 in starts {
        let (x, fx, d) = simplex_min(&mut f, x0, opts);
        diag.iterations += d.iterations;
        diag.restarts += 1;
        diag.converged |= d.converged;
        if best.as_ref().map_or(true, |(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.unwrap();
    (x, fx, diag)
}

/// Deterministic quasi-random start points in `[lo, hi]^dim`, reproducible
/// from `seed` and the restart index.
pub fn det_start_points(dim: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|r| {
            let mut s = splitmix_init(seed, r as u64);
            (0..dim)
                .map(|_| lo + (hi - lo) * splitmix_next(&mut s))
                .collect()
        })
        .collect()
}

fn splitmix_init(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(stream.wrapping_mul(0xbf58476d1ce4e5b9))
        .wrapping_add(0x94d049bb133111eb)
}

fn splitmix_next(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Golden-section minimization on `[a, b]` for a unimodal objective.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let scale = a.abs().max(b.abs()).max(1e-30);
    while (b - a) > rel_tol * scale {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coarse scan followed by golden-section refinement around the best cell.
/// Robust to objectives with several local minima at desk scale.
pub fn scan_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    scan_points: usize,
    rel_tol: f64,
) -> (f64, f64) {
    assert!(scan_points >= 3);
    let step = (b - a) / (scan_points - 1) as f64;
    let mut best_i = 0;
    let mut best_f = f64::INFINITY;
    for i in 0..scan_points {
        let x = a + step * i as f64;
        let fx = f(x);
        if fx < best_f {
            best_f = fx;
            best_i = i;
        }
    }
    let lo = a + step * best_i.saturating_sub(1) as f64;
    let hi = (a + step * (best_i + 1) as f64).min(b);
    golden_min(f, lo, hi, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 2.0;
        let (x, fx, diag) = simplex_min(f, &[0.0, 0.0], &SimplexOptions::default());
        assert!(diag.converged);
        assert!((x[0] - 1.5).abs() < 1e-6);
        assert!((x[1] + 0.5).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn restarts_escape_local_minimum() {
        // double well with a shallow and a deep minimum
        let f = |x: &[f64]| {
            let t = x[0];
            (t * t - 1.0).powi(2) + 0.3 * t
        };
        let starts = det_start_points(1, 8, -2.0, 2.0, 7);
        let (x, _, _) = simplex_min_restarts(f, &starts, &SimplexOptions::default());
        assert!(x[0] < 0.0, "found shallow minimum at {}", x[0]);
    }

    #[test]
    fn golden_on_cosine() {
        let (x, _) = golden_min(|x| -x.cos(), -1.0, 2.0, 1e-9);
        assert!(x.abs() < 1e-6);
    }

    #[test]
    fn scan_then_golden_handles_revivals() {
        let f = |x: f64| -((x - 4.0).powi(2) + 0.2).recip() - ((x - 1.0).powi(2) + 0.5).recip();
        let (x, _) = scan_then_golden(f, 0.0, 6.0, 101, 1e-9);
        assert!((x - 3.97).abs() < 0.1);
    }

    #[test]
    fn start_points_are_reproducible() {
        let a = det_start_points(3, 4, 0.0, 1.0, 42);
        let b = det_start_points(3, 4, 0.0, 1.0, 42);
        assert_eq!(a, b);
        let c = det_start_points(3, 4, 0.0, 1.0, 43);
        assert_ne!(a, c);
    }
}
