//! Semi-smooth Newton solver for the Tresca contact problem.
//!
//! The multiplier conditions are written as the fixed-point equations
//! `lambda_n = [lambda_n + beta_n J_n]_+` and
//! `lambda_t = [lambda_t + beta_t J_t]_g` on each fracture face, where `J`
//! is the mean jump `u_K,f - u_L,f` expressed in the face frame.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};

use crate::assembly::ReducedSystem;
use crate::error::{Error, Result};
use crate::linalg::{solve_dense, CsrMatrix, SparseCholesky, Triplets};

pub fn project_plus(r: f64) -> f64 {
    r.max(0.0)
}

/// Projection onto the closed ball of radius `g` centered at the origin.
pub fn project_ball(xi: &Vector3<f64>, g: f64) -> Vector3<f64> {
    let n = xi.norm();
    if n <= g {
        *xi
    } else if g == 0.0 {
        Vector3::zeros()
    } else {
        xi * (g / n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    /// `None` selects `10 (2G + L) / h_f` on each face.
    pub beta_n: Option<f64>,
    pub beta_t: Option<f64>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_iter: 50,
            beta_n: None,
            beta_t: None,
        }
    }
}

impl NewtonConfig {
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta_n = Some(beta);
        self.beta_t = Some(beta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.beta_n.is_none_or(|b| b > 0.0)
            && self.beta_t.is_none_or(|b| b > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("Newton tolerances and penalties must be positive".into()))
        }
    }

    /// `(beta_n, beta_t)` on every fracture face.
    pub fn betas(&self, sys: &ReducedSystem) -> Vec<(f64, f64)> {
        let stiff = 2.0 * sys.params.shear + sys.params.lame;
        sys.contact
            .iter()
            .map(|cf| {
                let d = 10.0 * stiff / cf.diameter;
                (self.beta_n.unwrap_or(d), self.beta_t.unwrap_or(d))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContactState {
    OpenStick = 0,
    ContactStick = 1,
    OpenSlip = 2,
    ContactSlip = 3,
}

impl ContactState {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone)]
pub struct ContactSolution {
    /// Full DOF vector, Dirichlet values included.
    pub u: DVector<f64>,
    /// Free DOFs only.
    pub u_free: DVector<f64>,
    /// Face multipliers in global components, three per fracture face.
    pub lambda: DVector<f64>,
    pub iterations: usize,
    pub states: Vec<ContactState>,
    pub history: Vec<f64>,
    pub converged: bool,
}

impl ContactSolution {
    pub fn multiplier(&self, q: usize) -> Vector3<f64> {
        Vector3::new(self.lambda[3 * q], self.lambda[3 * q + 1], self.lambda[3 * q + 2])
    }

    pub fn state_histogram(&self) -> [usize; 4] {
        let mut h = [0; 4];
        for s in &self.states {
            h[s.code() as usize] += 1;
        }
        h
    }
}

/// Mean jumps `J_f` in global components.
pub fn mean_jumps(sys: &ReducedSystem, u: &DVector<f64>) -> DVector<f64> {
    let mut j = sys.b.mul_vec(u) + &sys.b_offset;
    for (q, cf) in sys.contact.iter().enumerate() {
        for c in 0..3 {
            j[3 * q + c] /= cf.area;
        }
    }
    j
}

fn block(v: &DVector<f64>, q: usize) -> Vector3<f64> {
    Vector3::new(v[3 * q], v[3 * q + 1], v[3 * q + 2])
}

/// Complementarity function of one face in the face frame `(n, t1, t2)`,
/// with its generalized derivative `DP` with respect to the projection
/// argument.
#[derive(Debug, Clone, Copy)]
pub struct FaceEval {
    pub c: Vector3<f64>,
    pub dp: Matrix3<f64>,
}

pub fn face_eval(lam: &Vector3<f64>, jump: &Vector3<f64>, beta: (f64, f64), g: f64) -> FaceEval {
    let an = lam[0] + beta.0 * jump[0];
    let zeta = Vector2::new(lam[1] + beta.1 * jump[1], lam[2] + beta.1 * jump[2]);
    let mut dp = Matrix3::zeros();
    let pn = if an > 0.0 {
        dp[(0, 0)] = 1.0;
        an
    } else {
        0.0
    };
    let nz = zeta.norm();
    let pt = if g == 0.0 {
        Vector2::zeros()
    } else if nz <= g {
        dp[(1, 1)] = 1.0;
        dp[(2, 2)] = 1.0;
        zeta
    } else {
        let d = (Matrix2::identity() - zeta * zeta.transpose() / (nz * nz)) * (g / nz);
        dp.fixed_view_mut::<2, 2>(1, 1).copy_from(&d);
        zeta * (g / nz)
    };
    FaceEval {
        c: Vector3::new(lam[0] - pn, lam[1] - pt[0], lam[2] - pt[1]),
        dp,
    }
}

fn row_scale(beta: (f64, f64)) -> Vector3<f64> {
    let sn = 1.0 / beta.0.max(1.0);
    let st = 1.0 / beta.1.max(1.0);
    Vector3::new(sn, st, st)
}

struct Linearization {
    r: DVector<f64>,
    /// Per face: `s (I - DP) R` and `s DP diag(beta) R`.
    p1: Vec<Matrix3<f64>>,
    p2: Vec<Matrix3<f64>>,
}

fn linearize(sys: &ReducedSystem, betas: &[(f64, f64)], u: &DVector<f64>, lam: &DVector<f64>) -> Linearization {
    let n = sys.num_free();
    let m = sys.num_multipliers();
    let mut r = DVector::zeros(n + m);
    let r1 = sys.a.mul_vec(u) + sys.b.transpose_mul_vec(lam) - &sys.rhs;
    r.rows_mut(0, n).copy_from(&r1);
    let jumps = mean_jumps(sys, u);
    let mut p1 = Vec::with_capacity(sys.contact.len());
    let mut p2 = Vec::with_capacity(sys.contact.len());
    for (q, cf) in sys.contact.iter().enumerate() {
        let rot = cf.frame;
        let ev = face_eval(&(rot * block(lam, q)), &(rot * block(&jumps, q)), betas[q], cf.threshold);
        let s = Matrix3::from_diagonal(&row_scale(betas[q]));
        let bd = Matrix3::from_diagonal(&Vector3::new(betas[q].0, betas[q].1, betas[q].1));
        r.fixed_rows_mut::<3>(n + 3 * q).copy_from(&(s * ev.c));
        p1.push(s * (Matrix3::identity() - ev.dp) * rot);
        p2.push(s * ev.dp * bd * rot);
    }
    Linearization { r, p1, p2 }
}

/// Stacked residual `[A u + B^T lambda - F; C(u, lambda)]` with scaled
/// complementarity rows.
pub fn residual(sys: &ReducedSystem, config: &NewtonConfig, u: &DVector<f64>, lam: &DVector<f64>) -> DVector<f64> {
    linearize(sys, &config.betas(sys), u, lam).r
}

/// Generalized Jacobian of [`residual`] as a sparse matrix on `(u, lambda)`.
pub fn semismooth_jacobian(sys: &ReducedSystem, config: &NewtonConfig, u: &DVector<f64>, lam: &DVector<f64>) -> CsrMatrix {
    let lin = linearize(sys, &config.betas(sys), u, lam);
    let n = sys.num_free();
    let m = sys.num_multipliers();
    let mut t = Triplets::new(n + m, n + m);
    for (i, j, v) in sys.a.triplets() {
        t.push(i, j, v);
    }
    for (i, j, v) in sys.b.triplets() {
        t.push(j, n + i, v);
    }
    for (q, cf) in sys.contact.iter().enumerate() {
        let (p1, p2) = (&lin.p1[q], &lin.p2[q]);
        for a in 0..3 {
            for b in 0..3 {
                if p1[(a, b)] != 0.0 {
                    t.push(n + 3 * q + a, n + 3 * q + b, p1[(a, b)]);
                }
            }
            // -P2 (1/|f|) B_f
            for b in 0..3 {
                let coef = -p2[(a, b)] / cf.area;
                if coef == 0.0 {
                    continue;
                }
                for (j, v) in sys.b.row(3 * q + b) {
                    t.push(n + 3 * q + a, j, coef * v);
                }
            }
        }
    }
    t.to_csr()
}

/// Classifies each face from the final multipliers and mean jumps.
pub fn classify(sys: &ReducedSystem, u: &DVector<f64>, lam: &DVector<f64>) -> Vec<ContactState> {
    let jumps = mean_jumps(sys, u);
    let m = sys.contact.len();
    let lam_scale = (0..m)
        .map(|q| block(lam, q).norm().max(sys.contact[q].threshold))
        .fold(f64::MIN_POSITIVE, f64::max);
    let jump_scale = (0..m).map(|q| block(&jumps, q).norm()).fold(f64::MIN_POSITIVE, f64::max);
    let (tol_l, tol_j) = (1e-8 * lam_scale, 1e-8 * jump_scale);
    sys.contact
        .iter()
        .enumerate()
        .map(|(q, cf)| {
            let l = cf.frame * block(lam, q);
            let j = cf.frame * block(&jumps, q);
            let contact = l[0] > tol_l || j[0] >= -tol_j;
            let slip = Vector2::new(l[1], l[2]).norm() >= cf.threshold - tol_l;
            match (contact, slip) {
                (false, false) => ContactState::OpenStick,
                (true, false) => ContactState::ContactStick,
                (false, true) => ContactState::OpenSlip,
                (true, true) => ContactState::ContactSlip,
            }
        })
        .collect()
}

fn snapshot(sys: &ReducedSystem, u: &DVector<f64>, lam: &DVector<f64>) -> String {
    let h = classify(sys, u, lam).iter().fold([0usize; 4], |mut h, s| {
        h[s.code() as usize] += 1;
        h
    });
    format!("states 0/1/2/3 = {}/{}/{}/{}", h[0], h[1], h[2], h[3])
}

/// `W = S B A^-1 B^T` with `S = diag(1 / |f|)`.
fn schur_matrix(sys: &ReducedSystem, chol: &SparseCholesky) -> DMatrix<f64> {
    let n = sys.num_free();
    let m = sys.num_multipliers();
    let mut w = DMatrix::zeros(m, m);
    const BATCH: usize = 48;
    let mut start = 0;
    while start < m {
        let end = (start + BATCH).min(m);
        let cols: Vec<DVector<f64>> = (start..end)
            .map(|i| {
                let mut c = DVector::zeros(n);
                for (j, v) in sys.b.row(i) {
                    c[j] = v;
                }
                c
            })
            .collect();
        let z = chol.solve_many(&cols);
        for (k, zk) in z.iter().enumerate() {
            let col = mean_jumps_linear(sys, zk);
            w.set_column(start + k, &col);
        }
        start = end;
    }
    w
}

/// `S B x` without the Dirichlet offset.
fn mean_jumps_linear(sys: &ReducedSystem, x: &DVector<f64>) -> DVector<f64> {
    let mut j = sys.b.mul_vec(x);
    for (q, cf) in sys.contact.iter().enumerate() {
        for c in 0..3 {
            j[3 * q + c] /= cf.area;
        }
    }
    j
}

/// Semi-smooth Newton iteration. The displacement block is eliminated with
/// one sparse Cholesky factorization of `A`, so each step solves a dense
/// system in the multipliers only.
pub fn newton_solve(
    sys: &ReducedSystem,
    config: &NewtonConfig,
    initial: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<ContactSolution> {
    config.validate()?;
    let n = sys.num_free();
    let m = sys.num_multipliers();
    let chol = SparseCholesky::new(&sys.a)?;
    let betas = config.betas(sys);
    let (mut u, mut lam) = match initial {
        Some((u0, l0)) => (u0.clone(), l0.clone()),
        None => (chol.solve(&sys.rhs), DVector::zeros(m)),
    };
    if m == 0 {
        let hist = vec![linearize(sys, &betas, &u, &lam).r.norm()];
        return Ok(ContactSolution {
            u: sys.expand(&u),
            u_free: u,
            lambda: lam,
            iterations: 1,
            states: Vec::new(),
            history: hist,
            converged: true,
        });
    }
    let w = schur_matrix(sys, &chol);
    let mut lin = linearize(sys, &betas, &u, &lam);
    let r0 = lin.r.norm();
    // Relative to the residual of the zero state as well, since the elastic
    // initial guess can leave a residual below the roundoff floor.
    let reference = r0.max(linearize(sys, &betas, &DVector::zeros(n), &DVector::zeros(m)).r.norm());
    let target = config.rel_tol * reference + config.abs_tol;
    let mut history = vec![r0];
    let mut iterations = 0;
    while lin.r.norm() > target {
        if iterations >= config.max_iter {
            return Err(Error::NewtonNotConverged {
                iterations,
                last: lin.r.norm(),
                history,
            });
        }
        let r1 = lin.r.rows(0, n).into_owned();
        let c = lin.r.rows(n, m).into_owned();
        let y = chol.solve(&r1);
        let sby = mean_jumps_linear(sys, &y);
        let mut mat = DMatrix::zeros(m, m);
        let mut rhs = -c;
        for q in 0..sys.contact.len() {
            let (p1, p2) = (&lin.p1[q], &lin.p2[q]);
            let rows = 3 * q..3 * q + 3;
            let p2w = p2 * w.rows(3 * q, 3);
            mat.rows_mut(3 * q, 3).copy_from(&p2w);
            for a in 0..3 {
                for b in 0..3 {
                    mat[(3 * q + a, 3 * q + b)] += p1[(a, b)];
                }
            }
            let corr = p2 * block(&sby, q);
            for (k, i) in rows.enumerate() {
                rhs[i] -= corr[k];
            }
        }
        let dlam = solve_dense(&mat, &DMatrix::from_column_slice(m, 1, rhs.as_slice()), "Newton step")
            .map_err(|_| Error::SingularJacobian {
                active_set: snapshot(sys, &u, &lam),
            })?
            .column(0)
            .into_owned();
        let du = -(y + chol.solve(&sys.b.transpose_mul_vec(&dlam)));

        let current = lin.r.norm();
        let mut best: Option<(f64, DVector<f64>, DVector<f64>, Linearization)> = None;
        let mut step = 1.0;
        for _ in 0..=8 {
            let ut = &u + &du * step;
            let lt = &lam + &dlam * step;
            let lt_lin = linearize(sys, &betas, &ut, &lt);
            let norm = lt_lin.r.norm();
            let better = best.as_ref().is_none_or(|b| norm < b.0);
            if better {
                best = Some((norm, ut, lt, lt_lin));
            }
            if norm < current {
                break;
            }
            step *= 0.5;
        }
        let (norm, ut, lt, lt_lin) = best.expect("at least one trial step");
        let (norm, ut, lt, lt_lin) = if norm < current {
            (norm, ut, lt, lt_lin)
        } else {
            // No halving reduced the residual: keep the full step.
            let ut = &u + &du;
            let lt = &lam + &dlam;
            let l = linearize(sys, &betas, &ut, &lt);
            (l.r.norm(), ut, lt, l)
        };
        u = ut;
        lam = lt;
        lin = lt_lin;
        history.push(norm);
        iterations += 1;
    }
    let states = classify(sys, &u, &lam);
    Ok(ContactSolution {
        u: sys.expand(&u),
        u_free: u,
        lambda: lam,
        iterations,
        states,
        history,
        converged: true,
    })
}

/// Largest violation of `lambda_n >= 0` and `|lambda_t| <= g` over all faces.
pub fn admissibility_violation(sys: &ReducedSystem, lam: &DVector<f64>) -> f64 {
    sys.contact
        .iter()
        .enumerate()
        .map(|(q, cf)| {
            let l = cf.frame * block(lam, q);
            (-l[0]).max(Vector2::new(l[1], l[2]).norm() - cf.threshold).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Largest `|lambda_n J_n|` over all faces.
pub fn complementarity_violation(sys: &ReducedSystem, u: &DVector<f64>, lam: &DVector<f64>) -> f64 {
    let jumps = mean_jumps(sys, u);
    sys.contact
        .iter()
        .enumerate()
        .map(|(q, cf)| ((cf.frame * block(lam, q))[0] * (cf.frame * block(&jumps, q))[0]).abs())
        .fold(0.0, f64::max)
}
