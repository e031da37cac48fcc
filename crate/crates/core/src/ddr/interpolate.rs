use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::dofmap::DofMap;
use super::operators::{Operators, QUAD_ORDER};
use crate::error::{Error, Result};
use crate::mesh::{FractureNetwork, Point3, PolyMesh};
use crate::poly::{cell_rule, edge_rule, QuadRule};

/// A vector field that may jump across the fracture network.
///
/// `side` is a point inside a cell adjacent to `x`; on the fracture the
/// field is evaluated as the limit from that cell's side.
pub trait SidedField: Sync {
    fn value(&self, x: &Point3, side: &Point3) -> Point3;
}

impl<F> SidedField for F
where
    F: Fn(&Point3, &Point3) -> Point3 + Sync,
{
    fn value(&self, x: &Point3, side: &Point3) -> Point3 {
        self(x, side)
    }
}

/// Wraps a field that is continuous everywhere.
pub struct Continuous<F>(pub F);

impl<F> SidedField for Continuous<F>
where
    F: Fn(&Point3) -> Point3 + Sync,
{
    fn value(&self, x: &Point3, _side: &Point3) -> Point3 {
        (self.0)(x)
    }
}

fn mean(rule: &QuadRule, f: impl Fn(&Point3) -> Point3) -> Point3 {
    let mut acc = Point3::zeros();
    for (x, w) in rule.iter() {
        acc += f(x) * w;
    }
    acc / rule.measure()
}

fn set(v: &mut DVector<f64>, block: usize, val: &Point3) {
    for c in 0..3 {
        v[3 * block + c] = val[c];
    }
}

/// Values of the boundary-trace DOFs (vertex classes, edge classes and face
/// sides); cell blocks are left at zero.
pub fn interpolate_skeleton<U: SidedField + ?Sized>(mesh: &PolyMesh, dofmap: &DofMap, u: &U) -> Result<DVector<f64>> {
    let mut v = DVector::zeros(dofmap.num_dofs());
    let bary = |c: usize| mesh.cells[c].barycenter;
    for s in 0..mesh.num_vertices() {
        for cls in dofmap.sides.vertex_classes(s) {
            let b = dofmap.vertex_block(s, cls[0]).expect("class member");
            set(&mut v, b, &u.value(&mesh.vertices[s], &bary(cls[0])));
        }
    }
    for e in 0..mesh.num_edges() {
        let rule = edge_rule(mesh, e, QUAD_ORDER)?;
        for cls in dofmap.sides.edge_classes(e) {
            let b = dofmap.edge_block(e, cls[0]).expect("class member");
            let side = bary(cls[0]);
            set(&mut v, b, &mean(&rule, |x| u.value(x, &side)));
        }
    }
    for (f, face) in mesh.faces.iter().enumerate() {
        let rule = crate::poly::face_rule(mesh, f, QUAD_ORDER)?;
        for &c in &face.cells {
            let side = bary(c);
            set(&mut v, dofmap.face_block(f, c), &mean(&rule, |x| u.value(x, &side)));
        }
    }
    Ok(v)
}

/// Interpolator onto the discrete space. The cell value is the mean of `u`
/// on the cell plus a correction that makes the divergence commute with
/// the interpolation up to P1.
pub fn interpolate<U: SidedField + ?Sized>(
    mesh: &PolyMesh,
    dofmap: &DofMap,
    ops: &Operators,
    u: &U,
) -> Result<DVector<f64>> {
    let mut v = interpolate_skeleton(mesh, dofmap, u)?;
    let cell_values: Vec<Point3> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| cell_value(mesh, ops, u, &v, c))
        .collect::<Result<_>>()?;
    for (c, val) in cell_values.iter().enumerate() {
        set(&mut v, dofmap.cell_block(c), val);
    }
    Ok(v)
}

fn cell_value<U: SidedField + ?Sized>(
    mesh: &PolyMesh,
    ops: &Operators,
    u: &U,
    v: &DVector<f64>,
    c: usize,
) -> Result<Point3> {
    let cell = &mesh.cells[c];
    let side = cell.barycenter;
    let rule = cell_rule(mesh, c, QUAD_ORDER)?;
    let co = &ops.cells[c];
    let vl = co.gather(v);
    let mut corr = Point3::zeros();
    for (i, &f) in cell.faces.iter().enumerate() {
        let n = cell.outward_normal(mesh, i);
        let fo = &ops.faces[f];
        let coeffs: DMatrix<f64> = &co.face_potentials[i] * &vl;
        for (x, w) in fo.rule.iter() {
            let q = fo.basis2.values(x);
            let ups = Point3::from_fn(|k, _| (0..q.len()).map(|a| q[a] * coeffs[(a, k)]).sum());
            let dn = (u.value(x, &side) - ups).dot(&n);
            corr += (x - cell.barycenter) * (w * dn);
        }
    }
    Ok(mean(&rule, |x| u.value(x, &side)) - corr / cell.volume)
}

/// Potential jump on a fracture face as a `6 x 3` coefficient matrix in the
/// face's P2 basis (`ops.faces[f].basis2`), positive side minus negative.
pub fn jump(
    mesh: &PolyMesh,
    fracture: &FractureNetwork,
    ops: &Operators,
    f: usize,
    v: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let q = fracture.index_of(f).ok_or(Error::NotFractureFace(f))?;
    let ff = &fracture.faces[q];
    Ok(ops.face_potential(mesh, f, ff.positive_cell, v)? - ops.face_potential(mesh, f, ff.negative_cell, v)?)
}

/// Mean jump `v_K,f - v_L,f` on a fracture face.
pub fn mean_jump(dofmap: &DofMap, f: usize, v: &DVector<f64>) -> Result<Point3> {
    let (p, n) = dofmap.fracture_blocks(f).ok_or(Error::NotFractureFace(f))?;
    Ok(Point3::from_fn(|c, _| v[3 * p + c] - v[3 * n + c]))
}
