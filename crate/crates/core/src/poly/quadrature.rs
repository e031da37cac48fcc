//! Quadrature on segments, polygons and polyhedra.
//!
//! Simplices use collapsed (Duffy) tensor rules built from Gauss–Jacobi
//! points, so a rule of order `q` integrates every polynomial of degree
//! `<= q` exactly. Polygons are split into triangles and polyhedra into a
//! tetrahedral fan rooted at the cell barycenter.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mesh::{Point3, PolyMesh};

pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, Default)]
pub struct QuadRule {
    pub points: Vec<Point3>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut(&Point3) -> f64>(&self, mut f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point3, f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    fn extend(&mut self, other: QuadRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}

/// Gauss–Jacobi nodes and weights on `[-1, 1]` for the weight `(1 - x)^alpha`.
pub fn gauss_jacobi(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let beta = 0.0;
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jac[(k, k)] = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        if k + 1 < n {
            let j = kf + 1.0;
            let num = 4.0 * j * (j + alpha) * (j + beta) * (j + ab);
            let s = 2.0 * j + ab;
            let den = s * s * (s + 1.0) * (s - 1.0);
            let b = (num / den).sqrt();
            jac[(k, k + 1)] = b;
            jac[(k + 1, k)] = b;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) / (alpha + 1.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

struct ReferenceRules {
    /// Points on `[0, 1]` with weights summing to 1.
    segment: Vec<(f64, f64)>,
    /// Barycentric-free coordinates `(u, v)` on the unit triangle, weights summing to 1/2.
    triangle: Vec<([f64; 2], f64)>,
    /// Coordinates `(u, v, w)` on the unit tetrahedron, weights summing to 1/6.
    tetrahedron: Vec<([f64; 3], f64)>,
}

fn reference(order: usize) -> &'static ReferenceRules {
    static RULES: OnceLock<Vec<ReferenceRules>> = OnceLock::new();
    &RULES.get_or_init(|| (0..=MAX_ORDER).map(build_reference).collect())[order]
}

fn build_reference(order: usize) -> ReferenceRules {
    let n = order / 2 + 1;
    let (x0, w0) = gauss_jacobi(n, 0.0);
    let (x1, w1) = gauss_jacobi(n, 1.0);
    let (x2, w2) = gauss_jacobi(n, 2.0);
    let segment = x0.iter().zip(&w0).map(|(x, w)| (0.5 * (1.0 + x), 0.5 * w)).collect();
    let mut triangle = Vec::with_capacity(n * n);
    for (a, wa) in x0.iter().zip(&w0) {
        for (b, wb) in x1.iter().zip(&w1) {
            let v = 0.5 * (1.0 + b);
            let u = 0.5 * (1.0 + a) * (1.0 - v);
            triangle.push(([u, v], wa * wb / 8.0));
        }
    }
    let mut tetrahedron = Vec::with_capacity(n * n * n);
    for (a, wa) in x0.iter().zip(&w0) {
        for (b, wb) in x1.iter().zip(&w1) {
            for (c, wc) in x2.iter().zip(&w2) {
                let w = 0.5 * (1.0 + c);
                let v = 0.5 * (1.0 + b) * (1.0 - w);
                let u = 0.5 * (1.0 + a) * (1.0 - v - w);
                tetrahedron.push(([u, v, w], wa * wb * wc / 64.0));
            }
        }
    }
    ReferenceRules {
        segment,
        triangle,
        tetrahedron,
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::InvalidParameter(format!("quadrature order {order} exceeds {MAX_ORDER}")));
    }
    Ok(())
}

pub fn segment_rule(a: &Point3, b: &Point3, order: usize) -> Result<QuadRule> {
    check_order(order)?;
    let len = (b - a).norm();
    let r = reference(order);
    Ok(QuadRule {
        points: r.segment.iter().map(|(t, _)| a + (b - a) * *t).collect(),
        weights: r.segment.iter().map(|(_, w)| w * len).collect(),
    })
}

/// Rule on a triangle; `area` is the (unsigned) area used to scale weights.
pub fn triangle_rule(p: &[Point3; 3], order: usize) -> Result<QuadRule> {
    check_order(order)?;
    let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
    let r = reference(order);
    Ok(QuadRule {
        points: r
            .triangle
            .iter()
            .map(|([u, v], _)| p[0] + (p[1] - p[0]) * *u + (p[2] - p[0]) * *v)
            .collect(),
        weights: r.triangle.iter().map(|(_, w)| w * 2.0 * area).collect(),
    })
}

pub fn tetrahedron_rule(p: &[Point3; 4], order: usize) -> Result<QuadRule> {
    check_order(order)?;
    let vol = (p[1] - p[0]).cross(&(p[2] - p[0])).dot(&(p[3] - p[0])).abs() / 6.0;
    let r = reference(order);
    Ok(QuadRule {
        points: r
            .tetrahedron
            .iter()
            .map(|([u, v, w], _)| p[0] + (p[1] - p[0]) * *u + (p[2] - p[0]) * *v + (p[3] - p[0]) * *w)
            .collect(),
        weights: r.tetrahedron.iter().map(|(_, w)| w * 6.0 * vol).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Edge(usize),
    Face(usize),
    Cell(usize),
}

pub fn quad_rule(mesh: &PolyMesh, entity: Entity, order: usize) -> Result<QuadRule> {
    match entity {
        Entity::Edge(e) => edge_rule(mesh, e, order),
        Entity::Face(f) => face_rule(mesh, f, order),
        Entity::Cell(c) => cell_rule(mesh, c, order),
    }
}

pub fn edge_rule(mesh: &PolyMesh, e: usize, order: usize) -> Result<QuadRule> {
    let [a, b] = mesh.edges[e].vertices;
    segment_rule(&mesh.vertices[a], &mesh.vertices[b], order)
}

pub fn face_rule(mesh: &PolyMesh, f: usize, order: usize) -> Result<QuadRule> {
    let face = &mesh.faces[f];
    let mut rule = QuadRule::default();
    for tri in mesh.face_triangles(f) {
        let signed = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).dot(&face.normal);
        if !(signed > 0.0) {
            return Err(Error::NotStarShaped {
                entity: format!("face {f}"),
            });
        }
        rule.extend(triangle_rule(&tri, order)?);
    }
    Ok(rule)
}

pub fn cell_rule(mesh: &PolyMesh, c: usize, order: usize) -> Result<QuadRule> {
    let x = mesh.cells[c].barycenter;
    let mut rule = QuadRule::default();
    for tri in mesh.cell_boundary_triangles(c) {
        let signed = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).dot(&(tri[0] - x));
        if !(signed > 0.0) {
            return Err(Error::NotStarShaped {
                entity: format!("cell {c}"),
            });
        }
        rule.extend(tetrahedron_rule(&[x, tri[0], tri[1], tri[2]], order)?);
    }
    Ok(rule)
}
