//! Dense helpers and a small compressed-row sparse matrix.

mod sparse;

pub use sparse::{CsrMatrix, SparseCholesky, SparseLu, Triplets};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Solves `a x = b` by LU with partial pivoting, rejecting numerically
/// singular matrices (smallest pivot below `1e-13` times the largest).
pub fn solve_dense(a: &DMatrix<f64>, b: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|d| d.abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min < 1e-13 * max {
        return Err(Error::SingularSystem {
            context: context.to_owned(),
        });
    }
    lu.solve(b).ok_or_else(|| Error::SingularSystem {
        context: context.to_owned(),
    })
}
