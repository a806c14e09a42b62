//! Prior probability densities over the frequency and their transforms.
//!
//! All priors are shifted to zero mean at construction; the stored offset is
//! reapplied to estimator values on output. Three families are supported:
//! Gaussian, Uniform and Grid (point masses on an ordered set of
//! frequencies, e.g. a trapezoidal discretization of a continuous density).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Tolerance used by the computed symmetry flag.
const SYMMETRY_TOL: f64 = 1e-9;

/// Default number of points for discretizing a continuous prior.
pub const DEFAULT_GRID_POINTS: usize = 4001;

/// Default half-span of the discretization, in units of sigma.
pub const DEFAULT_GRID_SPAN_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PriorKind {
    /// Zero-mean Gaussian of width `sigma`.
    Gaussian { sigma: f64 },
    /// Zero-mean uniform density on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Point masses `weights` on centered `points` (strictly increasing).
    Grid { points: Vec<f64>, weights: Vec<f64> },
}

/// A prior density over the frequency, mean-centered with a stored offset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prior {
    kind: PriorKind,
    offset: f64,
    symmetric: bool,
}

impl Prior {
    pub fn gaussian(mean: f64, sigma: f64) -> Result<Self> {
        if !mean.is_finite() || !sigma.is_finite() {
            return Err(Error::NonFinite("gaussian parameters"));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidPrior(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Prior {
            kind: PriorKind::Gaussian { sigma },
            offset: mean,
            symmetric: true,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("uniform bounds"));
        }
        if hi <= lo {
            return Err(Error::InvalidPrior(format!("need hi > lo, got [{lo}, {hi}]")));
        }
        Ok(Prior {
            kind: PriorKind::Uniform {
                half_width: (hi - lo) / 2.0,
            },
            offset: (lo + hi) / 2.0,
            symmetric: true,
        })
    }

    /// Build a grid prior from physical points and nonnegative weights.
    /// Points are sorted, weights normalized, and the grid is mean-centered.
    pub fn grid(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::InvalidPrior("empty grid".into()));
        }
        if points.iter().chain(weights.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid entries"));
        }
        if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(Error::InvalidPrior(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidPrior("weights sum to zero".into()));
        }
        let mut idx: Vec<usize> = (0..points.len()).collect();
        idx.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        let points: Vec<f64> = idx.iter().map(|&i| points[i]).collect();
        let weights: Vec<f64> = idx.iter().map(|&i| weights[i] / total).collect();
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPrior("duplicate grid points".into()));
        }
        let mean: f64 = points.iter().zip(&weights).map(|(x, w)| x * w).sum();
        let centered: Vec<f64> = points.iter().map(|x| x - mean).collect();
        let symmetric = grid_is_symmetric(&centered, &weights);
        Ok(Prior {
            kind: PriorKind::Grid {
                points: centered,
                weights,
            },
            offset: mean,
            symmetric,
        })
    }

    /// Load a grid prior from a two-column CSV file with header `omega,weight`.
    pub fn from_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let headers = rdr.headers()?.clone();
        if headers.len() < 2
            || !headers[0].eq_ignore_ascii_case("omega")
            || !headers[1].eq_ignore_ascii_case("weight")
        {
            return Err(Error::InvalidPrior(format!(
                "expected CSV header `omega,weight`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let parse = |s: &str, what: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidPrior(format!("bad {what} entry `{s}`")))
            };
            points.push(parse(&record[0], "omega")?);
            weights.push(parse(&record[1], "weight")?);
        }
        Prior::grid(points, weights)
    }

    pub fn kind(&self) -> &PriorKind {
        &self.kind
    }

    /// The original mean, reapplied to estimator values on output.
    pub fn mean(&self) -> f64 {
        self.offset
    }

    /// Whether the centered density satisfies p(w) = p(-w) within 1e-9.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            PriorKind::Gaussian { sigma } => sigma * sigma,
            PriorKind::Uniform { half_width } => half_width * half_width / 3.0,
            PriorKind::Grid { points, weights } => {
                points.iter().zip(weights).map(|(x, w)| x * x * w).sum()
            }
        }
    }

    pub fn sigma(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Characteristic function of the centered density at `s`.
    pub fn cf(&self, s: f64) -> Result<C64> {
        if !s.is_finite() {
            return Err(Error::NonFinite("characteristic function argument"));
        }
        Ok(self.cf_raw(s))
    }

    /// Derivative of the characteristic function at `s`.
    pub fn cf_derivative(&self, s: f64) -> Result<C64> {
        if !s.is_finite() {
            return Err(Error::NonFinite("characteristic function argument"));
        }
        Ok(self.cf_derivative_raw(s))
    }

    pub(crate) fn cf_raw(&self, s: f64) -> C64 {
        match &self.kind {
            PriorKind::Gaussian { sigma } => {
                C64::new((-0.5 * sigma * sigma * s * s).exp(), 0.0)
            }
            PriorKind::Uniform { half_width } => C64::new(sinc(half_width * s), 0.0),
            PriorKind::Grid { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(&x, &w)| C64::from_polar(w, s * x))
                .sum(),
        }
    }

    pub(crate) fn cf_derivative_raw(&self, s: f64) -> C64 {
        match &self.kind {
            PriorKind::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                C64::new(-s2 * s * (-0.5 * s2 * s * s).exp(), 0.0)
            }
            PriorKind::Uniform { half_width } => {
                C64::new(half_width * dsinc(half_width * s), 0.0)
            }
            PriorKind::Grid { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(&x, &w)| C64::from_polar(w * x, s * x) * C64::i())
                .sum(),
        }
    }

    /// Differential entropy in nats. Grid priors are interpreted as a
    /// histogram density over trapezoidal cells around the points; a grid
    /// with fewer than two points has no bin width and is rejected.
    pub fn entropy(&self) -> Result<f64> {
        match &self.kind {
            PriorKind::Gaussian { sigma } => {
                Ok(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() + sigma.ln())
            }
            PriorKind::Uniform { half_width } => Ok((2.0 * half_width).ln()),
            PriorKind::Grid { points, weights } => {
                if points.len() < 2 {
                    return Err(Error::EntropyUndefined);
                }
                let widths = cell_widths(points);
                let mut h = 0.0;
                for (w, dx) in weights.iter().zip(&widths) {
                    if *w > 0.0 {
                        h -= w * (w / dx).ln();
                    }
                }
                Ok(h)
            }
        }
    }

    /// Fisher information of the density. Uniform priors are rejected:
    /// their density is not differentiable at the edges.
    pub fn fisher_information(&self) -> Result<f64> {
        match &self.kind {
            PriorKind::Gaussian { sigma } => Ok(1.0 / (sigma * sigma)),
            PriorKind::Uniform { .. } => Err(Error::FisherUndefined),
            PriorKind::Grid { points, weights } => {
                if points.len() < 3 {
                    return Err(Error::FisherUndefined);
                }
                let widths = cell_widths(points);
                let density: Vec<f64> =
                    weights.iter().zip(&widths).map(|(w, dx)| w / dx).collect();
                // a histogram density that does not vanish at the boundary
                // jumps there, like the continuous uniform family
                let peak = density.iter().fold(0.0f64, |m, &d| m.max(d));
                let n = points.len();
                if density[0] > 1e-9 * peak || density[n - 1] > 1e-9 * peak {
                    return Err(Error::FisherUndefined);
                }
                let mut info = 0.0;
                for j in 1..n - 1 {
                    if density[j] <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let dp = (density[j + 1] - density[j - 1]) / (points[j + 1] - points[j - 1]);
                    info += dp * dp / density[j] * widths[j];
                }
                Ok(info)
            }
        }
    }

    /// Pointwise Bayes update of a grid prior. Returns the posterior and the
    /// evidence (the prior-weighted probability of the observed outcome).
    pub fn posterior_update(&self, likelihood: &[f64]) -> Result<(Prior, f64)> {
        let PriorKind::Grid { points, weights } = &self.kind else {
            return Err(Error::InvalidPrior(
                "posterior update requires a grid prior".into(),
            ));
        };
        if likelihood.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: likelihood.len(),
            });
        }
        if let Some(&l) = likelihood
            .iter()
            .find(|&&l| !(0.0..=1.0 + 1e-12).contains(&l) || !l.is_finite())
        {
            return Err(Error::InvalidPrior(format!(
                "likelihood entry {l} outside [0, 1]"
            )));
        }
        let evidence: f64 = weights.iter().zip(likelihood).map(|(w, l)| w * l).sum();
        if evidence <= 0.0 {
            return Err(Error::ZeroEvidence);
        }
        let new_weights: Vec<f64> = weights
            .iter()
            .zip(likelihood)
            .map(|(w, l)| w * l / evidence)
            .collect();
        let physical: Vec<f64> = points.iter().map(|x| x + self.offset).collect();
        Ok((Prior::grid(physical, new_weights)?, evidence))
    }

    /// Discretize onto `n` uniform points. Gaussians span mean ± 8 sigma,
    /// uniforms their exact support; existing grids are returned unchanged.
    pub fn to_grid(&self, n: usize) -> Result<Prior> {
        match &self.kind {
            PriorKind::Grid { .. } => Ok(self.clone()),
            PriorKind::Gaussian { sigma } => {
                let span = DEFAULT_GRID_SPAN_SIGMAS * sigma;
                let pts: Vec<f64> = uniform_points(-span, span, n);
                let dens: Vec<f64> = pts
                    .iter()
                    .map(|x| (-0.5 * x * x / (sigma * sigma)).exp())
                    .collect();
                let physical: Vec<f64> = pts.iter().map(|x| x + self.offset).collect();
                Prior::grid(physical, trapezoid_masses(&pts, &dens))
            }
            PriorKind::Uniform { half_width } => {
                let pts = uniform_points(-half_width, *half_width, n);
                let dens = vec![1.0; n];
                let physical: Vec<f64> = pts.iter().map(|x| x + self.offset).collect();
                Prior::grid(physical, trapezoid_masses(&pts, &dens))
            }
        }
    }

    pub fn grid_default(&self) -> Result<Prior> {
        self.to_grid(DEFAULT_GRID_POINTS)
    }

    /// Centered grid points and weights; errors for continuous families.
    pub fn grid_data(&self) -> Result<(&[f64], &[f64])> {
        match &self.kind {
            PriorKind::Grid { points, weights } => Ok((points, weights)),
            _ => Err(Error::InvalidPrior("not a grid prior".into())),
        }
    }
}

fn uniform_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Trapezoidal quadrature masses for density samples on ordered points.
pub fn trapezoid_masses(points: &[f64], density: &[f64]) -> Vec<f64> {
    let widths = cell_widths(points);
    density.iter().zip(&widths).map(|(d, w)| d * w).collect()
}

/// Per-point cell widths of the trapezoid rule: half-cells at the edges.
fn cell_widths(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    (0..n)
        .map(|j| {
            let left = if j == 0 { points[0] } else { points[j - 1] };
            let right = if j == n - 1 { points[n - 1] } else { points[j + 1] };
            (right - left) / 2.0
        })
        .collect()
}

fn grid_is_symmetric(centered: &[f64], weights: &[f64]) -> bool {
    let n = centered.len();
    let scale = centered[n - 1].abs().max(centered[0].abs()).max(1e-300);
    for j in 0..n {
        let k = n - 1 - j;
        if (centered[j] + centered[k]).abs() > SYMMETRY_TOL * scale
            || (weights[j] - weights[k]).abs() > SYMMETRY_TOL
        {
            return false;
        }
    }
    true
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// d/dx [sin(x)/x].
fn dsinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        -x / 3.0 + x * x2 / 30.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}
