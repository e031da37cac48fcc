//! Manufactured solutions with a single fracture on the plane `x = 0` of
//! `(-1, 1)^3`.
//!
//! Every displacement component is a sum of separable terms
//! `c a(x) b(y) d(z)` whose univariate factors have closed-form first and
//! second derivatives, so `grad u`, `sigma(u)` and `f = -div sigma(u)` are
//! exact.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::assembly::MaterialParams;
use crate::ddr::SidedField;
use crate::error::Result;
use crate::mesh::{Axis, BoxDomain, FracturePlane, Point3};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Factor {
    One,
    /// `t^n`
    Pow(i32),
    /// `sin(w t)`
    Sin(f64),
    /// `cos(w t)`
    Cos(f64),
}

impl Factor {
    /// Value, first and second derivative.
    fn jet(self, t: f64) -> [f64; 3] {
        match self {
            Factor::One => [1.0, 0.0, 0.0],
            Factor::Pow(0) => [1.0, 0.0, 0.0],
            Factor::Pow(1) => [t, 1.0, 0.0],
            Factor::Pow(n) => {
                let nf = n as f64;
                [t.powi(n), nf * t.powi(n - 1), nf * (nf - 1.0) * t.powi(n - 2)]
            }
            Factor::Sin(w) => {
                let (s, c) = (w * t).sin_cos();
                [s, w * c, -w * w * s]
            }
            Factor::Cos(w) => {
                let (s, c) = (w * t).sin_cos();
                [c, -w * s, -w * w * c]
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    coef: f64,
    f: [Factor; 3],
}

fn term(coef: f64, fx: Factor, fy: Factor, fz: Factor) -> Term {
    Term { coef, f: [fx, fy, fz] }
}

/// Value, gradient and Hessian of a scalar sum of terms.
fn eval_terms(terms: &[Term], x: &Point3) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let mut v = 0.0;
    let mut g = Vector3::zeros();
    let mut h = Matrix3::zeros();
    for t in terms {
        let j = [t.f[0].jet(x.x), t.f[1].jet(x.y), t.f[2].jet(x.z)];
        v += t.coef * j[0][0] * j[1][0] * j[2][0];
        for a in 0..3 {
            // Derivative orders per direction.
            let mut d = [0usize; 3];
            d[a] = 1;
            g[a] += t.coef * j[0][d[0]] * j[1][d[1]] * j[2][d[2]];
            for b in 0..3 {
                let mut d = [0usize; 3];
                d[a] += 1;
                d[b] += 1;
                h[(a, b)] += t.coef * j[0][d[0]] * j[1][d[1]] * j[2][d[2]];
            }
        }
    }
    (v, g, h)
}

/// Displacement branch: one list of terms per component.
type Branch = [Vec<Term>; 3];

#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub material: MaterialParams,
    pub threshold: f64,
    pub domain: BoxDomain,
    /// Branches for `z >= 0`, `z < 0, x < 0` and `z < 0, x >= 0`.
    branches: [Branch; 3],
}

/// Unit normal of the fracture pointing out of its positive side (`x < 0`).
pub fn fracture_normal() -> Point3 {
    Point3::x()
}

impl ManufacturedCase {
    pub fn fracture_planes(&self) -> Vec<FracturePlane> {
        vec![FracturePlane::full(Axis::X, 0.0, self.threshold)]
    }

    /// Branch index at `x`; points on the fracture take the side of `side`.
    fn branch(&self, x: &Point3, side: &Point3) -> usize {
        if x.z >= 0.0 {
            return 0;
        }
        let sx = if x.x.abs() < 1e-12 { side.x } else { x.x };
        if sx < 0.0 {
            1
        } else {
            2
        }
    }

    fn jets(&self, x: &Point3, side: &Point3) -> [(f64, Vector3<f64>, Matrix3<f64>); 3] {
        let b = &self.branches[self.branch(x, side)];
        [eval_terms(&b[0], x), eval_terms(&b[1], x), eval_terms(&b[2], x)]
    }

    pub fn displacement(&self, x: &Point3, side: &Point3) -> Point3 {
        let j = self.jets(x, side);
        Point3::new(j[0].0, j[1].0, j[2].0)
    }

    /// `out[(i, j)] = d_j u_i`.
    pub fn gradient(&self, x: &Point3, side: &Point3) -> Matrix3<f64> {
        let j = self.jets(x, side);
        Matrix3::from_rows(&[j[0].1.transpose(), j[1].1.transpose(), j[2].1.transpose()])
    }

    pub fn stress(&self, x: &Point3, side: &Point3) -> Matrix3<f64> {
        self.material.stress(&self.gradient(x, side))
    }

    /// `f = -div sigma(u) = -(G lap u + (G + L) grad div u)`.
    pub fn body_force(&self, x: &Point3, side: &Point3) -> Point3 {
        let j = self.jets(x, side);
        let (g, l) = (self.material.shear, self.material.lame);
        Point3::from_fn(|i, _| {
            let lap = j[i].2.trace();
            let grad_div: f64 = (0..3).map(|k| j[k].2[(i, k)]).sum();
            -(g * lap + (g + l) * grad_div)
        })
    }

    /// Multiplier `lambda = -sigma(u+) n+` at a fracture point.
    pub fn multiplier(&self, x: &Point3) -> Point3 {
        let n = fracture_normal();
        -(self.stress(x, &(x - n)) * n)
    }

    /// Traction jump `sigma(u+) n+ - sigma(u-) n+`.
    pub fn traction_imbalance(&self, x: &Point3) -> Point3 {
        let n = fracture_normal();
        self.stress(x, &(x - n)) * n - self.stress(x, &(x + n)) * n
    }

    /// `u+ - u-` at a fracture point.
    pub fn jump(&self, x: &Point3) -> Point3 {
        let n = fracture_normal();
        self.displacement(x, &(x - n)) - self.displacement(x, &(x + n))
    }

    pub fn displacement_field(&self) -> impl SidedField + '_ {
        move |x: &Point3, side: &Point3| self.displacement(x, side)
    }

    pub fn body_force_field(&self) -> impl SidedField + '_ {
        move |x: &Point3, side: &Point3| self.body_force(x, side)
    }
}

/// Frictionless case, `G = L = 1`, `g = 0`.
pub fn case_frictionless() -> Result<ManufacturedCase> {
    use Factor::*;
    let w = PI / 2.0;
    let upper: Branch = [
        vec![term(-1.0, Sin(w), Cos(w), Pow(2))],
        vec![term(1.0, One, One, Pow(2))],
        vec![term(1.0, Pow(2), One, Pow(2))],
    ];
    // p(z) = a z^4, p'(z) = 4 a z^3, int_0^x cos(w t) dt = sin(w x) / w.
    let lower = |a: f64| -> Branch {
        [
            vec![term(a, Cos(w), One, Pow(4))],
            vec![term(4.0 * a, Cos(w), One, Pow(3))],
            vec![term(-4.0 * a / w, Sin(w), One, Pow(3))],
        ]
    };
    Ok(ManufacturedCase {
        name: "frictionless".into(),
        material: MaterialParams::from_lame(1.0, 1.0)?,
        threshold: 0.0,
        domain: BoxDomain::symmetric_unit(),
        branches: [upper, lower(1.0), lower(2.0)],
    })
}

/// `(h(x, y) R(z) - s y, c R(z), x^2 R(z))` with `h = -sin x cos y`.
fn tresca_branches(scale: f64, g: f64) -> [Branch; 3] {
    use Factor::*;
    let br = |r: f64, c: f64| -> Branch {
        [
            vec![term(-scale * r, Sin(1.0), Cos(1.0), Pow(2)), term(-scale * g, One, Pow(1), One)],
            vec![term(scale * c * r, One, One, Pow(2))],
            vec![term(scale * r, Pow(2), One, Pow(2))],
        ]
    };
    [br(1.0, 1.0), br(0.25, 2.0), br(0.25, 1.0)]
}

/// Tresca case, `G = L = 1`, `g = 1`.
pub fn case_tresca() -> Result<ManufacturedCase> {
    Ok(ManufacturedCase {
        name: "tresca".into(),
        material: MaterialParams::from_lame(1.0, 1.0)?,
        threshold: 1.0,
        domain: BoxDomain::symmetric_unit(),
        branches: tresca_branches(1.0, 1.0),
    })
}

/// Nearly incompressible Tresca case, `G = 1`, `g = 1 / L`: a divergence-free
/// cubic field plus the Tresca field scaled by `1 / L`.
pub fn case_incompressible(lame: f64) -> Result<ManufacturedCase> {
    use Factor::*;
    let s = 1.0 / lame;
    let mut branches = tresca_branches(s, 1.0);
    for b in &mut branches {
        b[0].push(term(1.0, Pow(3), Cos(1.0), One));
        b[0].push(term(1.0, Pow(3), One, Sin(1.0)));
        b[1].push(term(-3.0, Pow(2), Sin(1.0), One));
        b[2].push(term(3.0, Pow(2), One, Cos(1.0)));
    }
    Ok(ManufacturedCase {
        name: "incompressible".into(),
        material: MaterialParams::from_lame(1.0, lame)?,
        threshold: s,
        domain: BoxDomain::symmetric_unit(),
        branches,
    })
}

/// Looks a case up by name; `lame` is used by the incompressible case only.
pub fn case_by_name(name: &str, lame: f64) -> Option<Result<ManufacturedCase>> {
    match name {
        "frictionless" => Some(case_frictionless()),
        "tresca" => Some(case_tresca()),
        "incompressible" => Some(case_incompressible(lame)),
        _ => None,
    }
}
