use nalgebra::Matrix3;

use super::cases::{fracture_normal, ManufacturedCase};
use super::study::Discretization;
use crate::contact::ContactSolution;
use crate::error::{Error, Result};
use crate::mesh::Point3;
use crate::poly::{cell_rule, face_rule};

pub const ERROR_QUAD_ORDER: usize = 6;

/// Relative L2 errors of one solve. When an exact norm vanishes the
/// absolute error is reported instead and the matching flag is set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorRow {
    pub e_u: f64,
    pub e_jump: f64,
    pub e_grad: f64,
    pub e_lambda_n: f64,
    /// Absolute errors in the same order.
    pub absolute: [f64; 4],
    pub absolute_fallback: [bool; 4],
}

impl ErrorRow {
    pub fn as_array(&self) -> [f64; 4] {
        [self.e_u, self.e_jump, self.e_grad, self.e_lambda_n]
    }
}

fn ratio(err2: f64, ref2: f64) -> (f64, f64, bool) {
    let abs = err2.sqrt();
    if ref2 > 1e-300 {
        (abs / ref2.sqrt(), abs, false)
    } else {
        (abs, abs, true)
    }
}

pub fn compute_errors(case: &ManufacturedCase, disc: &Discretization, sol: &ContactSolution) -> Result<ErrorRow> {
    if !sol.converged {
        return Err(Error::NotConverged);
    }
    let mesh = &disc.mesh;
    let (mut eu, mut ru, mut eg, mut rg) = (0.0, 0.0, 0.0, 0.0);
    for co in &disc.ops.cells {
        let side = mesh.cells[co.cell].barycenter;
        let vl = co.gather(&sol.u);
        let rule = cell_rule(mesh, co.cell, ERROR_QUAD_ORDER)?;
        for (x, w) in rule.iter() {
            let u = case.displacement(x, &side);
            let g: Matrix3<f64> = case.gradient(x, &side);
            eu += w * (u - co.potential_at(&vl, x)).norm_squared();
            ru += w * u.norm_squared();
            eg += w * (g - co.potential_gradient_at(&vl, x)).norm_squared();
            rg += w * g.norm_squared();
        }
    }
    let (mut ej, mut rj, mut el, mut rl) = (0.0, 0.0, 0.0, 0.0);
    let n = fracture_normal();
    for (q, ff) in disc.fracture.faces.iter().enumerate() {
        let f = ff.face;
        let fo = &disc.ops.faces[f];
        let jh = crate::ddr::jump(mesh, &disc.fracture, &disc.ops, f, &sol.u)?;
        let lam_h = sol.multiplier(q).dot(&ff.normal);
        for (x, w) in face_rule(mesh, f, ERROR_QUAD_ORDER)?.iter() {
            let phi = fo.basis2.values(x);
            let jump_h = Point3::from_fn(|k, _| (0..phi.len()).map(|a| phi[a] * jh[(a, k)]).sum());
            let jump = case.jump(x);
            ej += w * (jump - jump_h).norm_squared();
            rj += w * jump.norm_squared();
            let lam = case.multiplier(x).dot(&n);
            el += w * (lam - lam_h).powi(2);
            rl += w * lam * lam;
        }
    }
    let parts = [ratio(eu, ru), ratio(ej, rj), ratio(eg, rg), ratio(el, rl)];
    Ok(ErrorRow {
        e_u: parts[0].0,
        e_jump: parts[1].0,
        e_grad: parts[2].0,
        e_lambda_n: parts[3].0,
        absolute: parts.map(|p| p.1),
        absolute_fallback: parts.map(|p| p.2),
    })
}
