//! Global stabilized elasticity operator, multiplier coupling and load.

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;

use crate::ddr::{interpolate_skeleton, CellOperators, DofMap, Operators, SidedField};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Triplets};
use crate::mesh::{FractureNetwork, Point3, PolyMesh};

/// Isotropic material with its Lamé coefficients and the stabilization
/// weight `mu1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub young: f64,
    pub poisson: f64,
    /// Shear modulus `G = E / (2 (1 + nu))`.
    pub shear: f64,
    /// First Lamé coefficient `L = nu E / ((1 + nu)(1 - 2 nu))`.
    pub lame: f64,
    pub mu1: f64,
}

impl MaterialParams {
    pub fn from_young_poisson(young: f64, poisson: f64) -> Result<Self> {
        if !(young > 0.0) || !(0.0..0.5).contains(&poisson) {
            return Err(Error::InvalidParameter(format!(
                "need E > 0 and 0 <= nu < 1/2, got E = {young}, nu = {poisson}"
            )));
        }
        let shear = young / (2.0 * (1.0 + poisson));
        let lame = poisson * young / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        Ok(Self {
            young,
            poisson,
            shear,
            lame,
            mu1: 2.0 * shear,
        })
    }

    /// From the Lamé pair `(G, L)`; `E` and `nu` are derived.
    pub fn from_lame(shear: f64, lame: f64) -> Result<Self> {
        if !(shear > 0.0) || !(lame >= 0.0) {
            return Err(Error::InvalidParameter(format!("need G > 0 and L >= 0, got G = {shear}, L = {lame}")));
        }
        Ok(Self {
            young: shear * (3.0 * lame + 2.0 * shear) / (lame + shear),
            poisson: lame / (2.0 * (lame + shear)),
            shear,
            lame,
            mu1: 2.0 * shear,
        })
    }

    pub fn with_mu1(mut self, mu1: f64) -> Result<Self> {
        if !(mu1 > 0.0) {
            return Err(Error::InvalidParameter(format!("stabilization weight must be positive, got {mu1}")));
        }
        self.mu1 = mu1;
        Ok(self)
    }

    /// `sigma(eps) = 2 G eps + L tr(eps) I`.
    pub fn stress(&self, grad: &Matrix3<f64>) -> Matrix3<f64> {
        let eps = (grad + grad.transpose()) * 0.5;
        eps * (2.0 * self.shear) + Matrix3::identity() * (self.lame * eps.trace())
    }
}

/// Local matrix of `(u, v) -> int_K sigma_h(u) : eps_h(v) + mu1 S_K(u, v)`
/// in the interleaved layout `3 * block + component`.
pub fn local_stiffness(co: &CellOperators, params: &MaterialParams) -> DMatrix<f64> {
    let nb = co.num_blocks();
    let mg: [DMatrix<f64>; 3] = std::array::from_fn(|j| &co.mass1 * &co.gradient[j]);
    let q = |j: usize, l: usize| co.gradient[j].transpose() * &mg[l];
    let qs: Vec<Vec<DMatrix<f64>>> = (0..3).map(|j| (0..3).map(|l| q(j, l)).collect()).collect();
    let (g, lam) = (params.shear, params.lame);
    let lap = &qs[0][0] + &qs[1][1] + &qs[2][2];
    let mut k = DMatrix::zeros(3 * nb, 3 * nb);
    for bp in 0..nb {
        for b in 0..nb {
            let s = params.mu1 * co.stabilization[(bp, b)];
            for kc in 0..3 {
                k[(3 * bp + kc, 3 * b + kc)] += g * lap[(bp, b)] + s;
                for m in 0..3 {
                    k[(3 * bp + kc, 3 * b + m)] += g * qs[m][kc][(bp, b)] + lam * qs[kc][m][(bp, b)];
                }
            }
        }
    }
    k
}

/// Geometry and threshold of a fracture face, as seen by the contact solver.
#[derive(Debug, Clone)]
pub struct ContactFace {
    pub face: usize,
    pub area: f64,
    pub diameter: f64,
    /// Rows: `n+`, `t1`, `t2`.
    pub frame: Matrix3<f64>,
    pub threshold: f64,
}

/// Assembled blocks on the full DOF vector.
#[derive(Debug, Clone)]
pub struct SystemBlocks {
    pub a: CsrMatrix,
    /// One row per fracture face and component: `B_f v = |f| (v_K,f - v_L,f)`.
    pub b: CsrMatrix,
    pub f: DVector<f64>,
    pub contact: Vec<ContactFace>,
    pub params: MaterialParams,
}

fn face_frame(n: &Point3) -> Matrix3<f64> {
    let helper = if n.x.abs() < 0.9 { Point3::x() } else { Point3::y() };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    let t2 = n.cross(&t1);
    Matrix3::from_rows(&[n.transpose(), t1.transpose(), t2.transpose()])
}

pub fn assemble<F: SidedField + ?Sized>(
    mesh: &PolyMesh,
    dofmap: &DofMap,
    ops: &Operators,
    params: &MaterialParams,
    fracture: &FractureNetwork,
    load: &F,
) -> Result<SystemBlocks> {
    let n = dofmap.num_dofs();
    let locals: Vec<(DMatrix<f64>, Point3)> = ops
        .cells
        .par_iter()
        .map(|co| {
            let cell = &mesh.cells[co.cell];
            let fk = co
                .rule
                .iter()
                .map(|(x, w)| load.value(x, &cell.barycenter) * w)
                .sum::<Point3>();
            (local_stiffness(co, params), fk)
        })
        .collect();
    let mut a = Triplets::new(n, n);
    let mut f = DVector::zeros(n);
    for (co, (k, fk)) in ops.cells.iter().zip(&locals) {
        let idx: Vec<usize> = co.blocks.iter().flat_map(|&b| [3 * b, 3 * b + 1, 3 * b + 2]).collect();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::UnresolvedDof(format!("index {bad} in cell {}", co.cell)));
        }
        for (li, &gi) in idx.iter().enumerate() {
            for (lj, &gj) in idx.iter().enumerate() {
                let v = k[(li, lj)];
                if v != 0.0 {
                    a.push(gi, gj, v);
                }
            }
        }
        let cb = dofmap.cell_block(co.cell);
        for c in 0..3 {
            f[3 * cb + c] += fk[c];
        }
    }
    let m = 3 * fracture.len();
    let mut b = Triplets::new(m, n);
    let mut contact = Vec::with_capacity(fracture.len());
    for (q, ff) in fracture.faces.iter().enumerate() {
        let face = &mesh.faces[ff.face];
        let (p, l) = dofmap
            .fracture_blocks(ff.face)
            .ok_or_else(|| Error::UnresolvedDof(format!("sides of fracture face {}", ff.face)))?;
        for c in 0..3 {
            b.push(3 * q + c, 3 * p + c, face.area);
            b.push(3 * q + c, 3 * l + c, -face.area);
        }
        contact.push(ContactFace {
            face: ff.face,
            area: face.area,
            diameter: face.diameter,
            frame: face_frame(&ff.normal),
            threshold: ff.threshold,
        });
    }
    Ok(SystemBlocks {
        a: a.to_csr(),
        b: b.to_csr(),
        f,
        contact,
        params: *params,
    })
}

/// Which scalar DOFs carry Dirichlet data and their values.
#[derive(Debug, Clone)]
pub struct DirichletData {
    pub mask: Vec<bool>,
    pub values: DVector<f64>,
}

/// Dirichlet data on the whole boundary, interpolated from `g` (vertex
/// values, edge and face means).
pub fn dirichlet_full<G: SidedField + ?Sized>(mesh: &PolyMesh, dofmap: &DofMap, g: &G) -> Result<DirichletData> {
    dirichlet_on(mesh, dofmap, g, |_| true)
}

/// Dirichlet data on the boundary faces accepted by `select`; the remaining
/// boundary is traction free.
pub fn dirichlet_on<G, S>(mesh: &PolyMesh, dofmap: &DofMap, g: &G, select: S) -> Result<DirichletData>
where
    G: SidedField + ?Sized,
    S: Fn(usize) -> bool,
{
    let mut mask = vec![false; dofmap.num_dofs()];
    let mut mark = |b: usize| {
        for c in 0..3 {
            mask[3 * b + c] = true;
        }
    };
    for (f, face) in mesh.faces.iter().enumerate() {
        if !face.is_boundary() || !select(f) {
            continue;
        }
        let cell = face.cells[0];
        mark(dofmap.face_block(f, cell));
        for &s in &face.vertices {
            mark(dofmap.vertex_block(s, cell).ok_or_else(|| Error::UnresolvedDof(format!("vertex {s}")))?);
        }
        for &e in &face.edges {
            mark(dofmap.edge_block(e, cell).ok_or_else(|| Error::UnresolvedDof(format!("edge {e}")))?);
        }
    }
    let mut values = interpolate_skeleton(mesh, dofmap, g)?;
    for (v, m) in values.iter_mut().zip(&mask) {
        if !m {
            *v = 0.0;
        }
    }
    Ok(DirichletData { mask, values })
}

/// System restricted to the free DOFs after lifting the Dirichlet data.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub free: Vec<usize>,
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub rhs: DVector<f64>,
    /// `B` applied to the lifted Dirichlet values.
    pub b_offset: DVector<f64>,
    pub lifted: DVector<f64>,
    pub contact: Vec<ContactFace>,
    pub params: MaterialParams,
}

impl ReducedSystem {
    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn num_multipliers(&self) -> usize {
        self.b.nrows
    }

    /// Full DOF vector from free values.
    pub fn expand(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = self.lifted.clone();
        for (k, &i) in self.free.iter().enumerate() {
            out[i] = u[k];
        }
        out
    }

    pub fn restrict(&self, full: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| full[i]))
    }
}

pub fn apply_dirichlet(system: &SystemBlocks, data: &DirichletData) -> ReducedSystem {
    let n = system.a.nrows;
    let free: Vec<usize> = (0..n).filter(|&i| !data.mask[i]).collect();
    let fixed: Vec<usize> = (0..n).filter(|&i| data.mask[i]).collect();
    let a_ff = system.a.select(&free, &free);
    let a_fd = system.a.select(&free, &fixed);
    let ud = DVector::from_iterator(fixed.len(), fixed.iter().map(|&i| data.values[i]));
    let mut rhs = DVector::from_iterator(free.len(), free.iter().map(|&i| system.f[i]));
    rhs -= a_fd.mul_vec(&ud);
    let rows: Vec<usize> = (0..system.b.nrows).collect();
    let b_f = system.b.select(&rows, &free);
    let b_offset = system.b.select(&rows, &fixed).mul_vec(&ud);
    ReducedSystem {
        free,
        a: a_ff,
        b: b_f,
        rhs,
        b_offset,
        lifted: data.values.clone(),
        contact: system.contact.clone(),
        params: system.params,
    }
}
