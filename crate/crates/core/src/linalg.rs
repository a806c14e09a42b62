//! Small dense Hermitian helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Relative support cutoff for positive-semidefinite solves: eigenvalue
/// pairs with `d_i + d_j < SUPPORT_CUTOFF * d_max` are treated as kernel.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Relative tolerance for declaring a right-hand side infeasible (it has
/// weight outside the support of the positive operator).
const FEASIBILITY_TOL: f64 = 1e-9;

pub fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn is_hermitian(m: &DMatrix<C64>, tol: f64) -> bool {
    frobenius(&(m - m.adjoint())) <= tol * frobenius(m).max(1.0)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and a unitary
/// matrix of column eigenvectors, eigenvalues sorted in decreasing order.
pub fn herm_eigen(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let se = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| se.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Solve `A X + X A = 2 B` for Hermitian `X`, where `A` is Hermitian positive
/// semidefinite and `B` is Hermitian with support inside the support of `A`.
///
/// In the eigenbasis of `A` the solution is `X_ij = 2 B_ij / (a_i + a_j)`;
/// kernel-kernel components are set to zero (they do not affect any
/// expectation value taken against `A`'s support). A right-hand side with
/// weight on the kernel block is rejected.
pub fn solve_sylvester_psd(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.nrows(),
        });
    }
    let (vals, q) = herm_eigen(a);
    let d_max = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cutoff = SUPPORT_CUTOFF * d_max.max(f64::MIN_POSITIVE);
    let b_scale = frobenius(b).max(f64::MIN_POSITIVE);

    let bt = q.adjoint() * b * &q;
    let mut xt = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = vals[i].max(0.0) + vals[j].max(0.0);
            if denom < cutoff {
                if bt[(i, j)].norm() > FEASIBILITY_TOL * b_scale {
                    return Err(Error::InfeasiblePair);
                }
            } else {
                xt[(i, j)] = 2.0 * bt[(i, j)] / denom;
            }
        }
    }
    Ok(hermitize(&(&q * xt * q.adjoint())))
}

/// Projector onto the support (non-kernel eigenspace) of a Hermitian PSD matrix.
pub fn support_projector(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let (vals, q) = herm_eigen(a);
    let d_max = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cutoff = SUPPORT_CUTOFF * d_max.max(f64::MIN_POSITIVE);
    let mut p = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        if vals[i] > cutoff {
            let v = q.column(i);
            p += v * v.adjoint();
        }
    }
    p
}
