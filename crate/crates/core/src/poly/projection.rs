use nalgebra::{DMatrix, DVector};

use super::basis::MonomialBasis;
use super::quadrature::QuadRule;
use crate::error::Result;
use crate::linalg::solve_dense;
use crate::mesh::Point3;

/// Coefficients over a monomial basis, `ncomp` components stored
/// component-major (`coeffs[c * basis.len() + i]`).
#[derive(Debug, Clone)]
pub struct PolyCoeffs {
    pub basis: MonomialBasis,
    pub ncomp: usize,
    pub coeffs: Vec<f64>,
}

impl PolyCoeffs {
    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.basis.len();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn eval(&self, x: &Point3) -> Vec<f64> {
        let phi = self.basis.values(x);
        (0..self.ncomp)
            .map(|c| self.component(c).iter().zip(&phi).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Gram matrix `int phi_i phi_j` of a basis on a quadrature rule.
pub fn gram_matrix(basis: &MonomialBasis, rule: &QuadRule) -> DMatrix<f64> {
    let n = basis.len();
    let mut g = DMatrix::zeros(n, n);
    let mut phi = vec![0.0; n];
    for (x, w) in rule.iter() {
        basis.eval(x, &mut phi);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] += w * phi[i] * phi[j];
            }
        }
    }
    g
}

/// L2-orthogonal projection of an `ncomp`-valued function onto `basis`.
///
/// `rule` should be exact for degree `2 * basis.degree` at least.
pub fn l2_project<F>(basis: &MonomialBasis, rule: &QuadRule, ncomp: usize, mut f: F) -> Result<PolyCoeffs>
where
    F: FnMut(&Point3) -> Vec<f64>,
{
    let n = basis.len();
    let g = gram_matrix(basis, rule);
    let mut rhs = DMatrix::zeros(n, ncomp);
    let mut phi = vec![0.0; n];
    for (x, w) in rule.iter() {
        basis.eval(x, &mut phi);
        let fx = f(x);
        for c in 0..ncomp {
            for i in 0..n {
                rhs[(i, c)] += w * fx[c] * phi[i];
            }
        }
    }
    let sol = solve_dense(&g, &rhs, "L2 projection Gram matrix")?;
    let mut coeffs = Vec::with_capacity(n * ncomp);
    for c in 0..ncomp {
        coeffs.extend(sol.column(c).iter());
    }
    Ok(PolyCoeffs {
        basis: basis.clone(),
        ncomp,
        coeffs,
    })
}

/// Scalar convenience wrapper.
pub fn l2_project_scalar<F>(basis: &MonomialBasis, rule: &QuadRule, mut f: F) -> Result<DVector<f64>>
where
    F: FnMut(&Point3) -> f64,
{
    let p = l2_project(basis, rule, 1, |x| vec![f(x)])?;
    Ok(DVector::from_vec(p.coeffs))
}
