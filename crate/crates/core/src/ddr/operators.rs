//! Local reconstruction operators.
//!
//! Every operator acts componentwise on vector-valued DOFs, so it is stored
//! as a scalar matrix mapping the local block values to polynomial
//! coefficients. Apply it to an `nb x 3` matrix of local DOFs to get the
//! three components at once.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::dofmap::DofMap;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::mesh::{Point3, PolyMesh};
use crate::poly::{cell_rule, edge_rule, face_rule, gram_matrix, MonomialBasis, QuadRule};

pub const QUAD_ORDER: usize = 6;

/// Knobs used by the self-check suite to inject faults.
#[derive(Debug, Clone, Copy)]
pub struct OperatorOptions {
    /// Factor applied to the face potential inside the face term of the
    /// stabilization. Any value other than 1 breaks polynomial consistency.
    pub face_trace_weight: f64,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self { face_trace_weight: 1.0 }
    }
}

/// Weights of the quadratic edge potential at `x` with respect to the
/// values at `edge.vertices[0]`, `edge.vertices[1]` and the edge mean.
pub fn edge_weights(mesh: &PolyMesh, e: usize, x: &Point3) -> [f64; 3] {
    let edge = &mesh.edges[e];
    let [a, b] = edge.vertices;
    let tangent = mesh.vertices[b] - mesh.vertices[a];
    let t = 2.0 * (x - edge.midpoint).dot(&tangent) / (edge.length * edge.length);
    let p2 = 0.5 * (3.0 * t * t - 1.0);
    [-0.5 * t + 0.5 * p2, 0.5 * t + 0.5 * p2, 1.0 - p2]
}

/// Face gradient and face potential in face-local blocks: the loop
/// vertices, the loop edges, then the face.
#[derive(Debug, Clone)]
pub struct FaceOperators {
    pub basis1: MonomialBasis,
    pub basis2: MonomialBasis,
    /// `gradient[j]` gives the P1 coefficients of column `j` of the gradient.
    pub gradient: [DMatrix<f64>; 3],
    pub potential: DMatrix<f64>,
    pub rule: QuadRule,
}

fn face_edge_locals(mesh: &PolyMesh, f: usize, i: usize) -> [usize; 3] {
    let face = &mesh.faces[f];
    let m = face.vertices.len();
    let e = face.edges[i];
    let (va, vb) = (i, (i + 1) % m);
    if mesh.edges[e].vertices[0] == face.vertices[va] {
        [va, vb, m + i]
    } else {
        [vb, va, m + i]
    }
}

pub fn face_operators(mesh: &PolyMesh, f: usize) -> Result<FaceOperators> {
    let face = &mesh.faces[f];
    let m = face.vertices.len();
    let nbf = 2 * m + 1;
    let basis1 = MonomialBasis::face(mesh, f, 1);
    let basis2 = MonomialBasis::face(mesh, f, 2);
    let rule = face_rule(mesh, f, QUAD_ORDER)?;
    let ctx = |what: &str| format!("{what} of face {f}");

    let edge_rules: Vec<QuadRule> = face
        .edges
        .iter()
        .map(|&e| edge_rule(mesh, e, QUAD_ORDER))
        .collect::<Result<_>>()?;
    let edge_normals: Vec<Point3> = (0..m).map(|i| mesh.face_edge_normal(f, i)).collect();

    // Face gradient.
    let mass1 = gram_matrix(&basis1, &rule);
    let mut rhs: [DMatrix<f64>; 3] = std::array::from_fn(|_| DMatrix::zeros(3, nbf));
    for (x, w) in rule.iter() {
        let grads = basis1.gradient_values(x);
        for (k, g) in grads.iter().enumerate() {
            for (j, r) in rhs.iter_mut().enumerate() {
                r[(k, 2 * m)] -= w * g[j];
            }
        }
    }
    for i in 0..m {
        let e = face.edges[i];
        let loc = face_edge_locals(mesh, f, i);
        let n = edge_normals[i];
        for (x, w) in edge_rules[i].iter() {
            let phi = basis1.values(x);
            let ew = edge_weights(mesh, e, x);
            for (k, p) in phi.iter().enumerate() {
                for (j, r) in rhs.iter_mut().enumerate() {
                    for (l, &wl) in loc.iter().zip(&ew) {
                        r[(k, *l)] += n[j] * w * p * wl;
                    }
                }
            }
        }
    }
    let gradient: [DMatrix<f64>; 3] = [
        solve_dense(&mass1, &rhs[0], &ctx("gradient"))?,
        solve_dense(&mass1, &rhs[1], &ctx("gradient"))?,
        solve_dense(&mass1, &rhs[2], &ctx("gradient"))?,
    ];

    // Face potential, tested against (x - x_f) q for q in P2.
    let n2 = basis2.len();
    let mut lhs = DMatrix::zeros(n2, n2);
    let mut rhs = DMatrix::zeros(n2, nbf);
    for (x, w) in rule.iter() {
        let q = basis2.values(x);
        let phi = basis1.values(x);
        let d = x - face.barycenter;
        let mut gd = DVector::zeros(nbf);
        for (j, gj) in gradient.iter().enumerate() {
            for (k, p) in phi.iter().enumerate() {
                gd.axpy(p * d[j], &gj.row(k).transpose(), 1.0);
            }
        }
        for b in 0..n2 {
            let kb = (2 + basis2.degree_of(b)) as f64;
            for a in 0..n2 {
                lhs[(b, a)] += w * kb * q[b] * q[a];
            }
            for c in 0..nbf {
                rhs[(b, c)] -= w * q[b] * gd[c];
            }
        }
    }
    for i in 0..m {
        let e = face.edges[i];
        let loc = face_edge_locals(mesh, f, i);
        let n = edge_normals[i];
        for (x, w) in edge_rules[i].iter() {
            let q = basis2.values(x);
            let ew = edge_weights(mesh, e, x);
            let dn = (x - face.barycenter).dot(&n);
            for (b, qb) in q.iter().enumerate() {
                for (l, &wl) in loc.iter().zip(&ew) {
                    rhs[(b, *l)] += w * qb * dn * wl;
                }
            }
        }
    }
    let potential = solve_dense(&lhs, &rhs, &ctx("potential"))?;
    Ok(FaceOperators {
        basis1,
        basis2,
        gradient,
        potential,
        rule,
    })
}

/// Operators of one cell in cell-local blocks: the cell vertices, edges and
/// faces (in the order stored on the cell), then the cell itself.
#[derive(Debug, Clone)]
pub struct CellOperators {
    pub cell: usize,
    pub blocks: Vec<usize>,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub num_faces: usize,
    pub basis1: MonomialBasis,
    pub basis2: MonomialBasis,
    /// `face_potentials[i]` maps local blocks to the P2 coefficients of the
    /// potential on the `i`-th face, in that face's basis.
    pub face_potentials: Vec<DMatrix<f64>>,
    /// `gradient[j]` gives the P1 coefficients of column `j` of the gradient.
    pub gradient: [DMatrix<f64>; 3],
    pub potential: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    /// Gram matrix of `basis1` on the cell.
    pub mass1: DMatrix<f64>,
    pub rule: QuadRule,
}

impl CellOperators {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn cell_local(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn face_local(&self, i: usize) -> usize {
        self.num_vertices + self.num_edges + i
    }

    /// Gathers the `nb x 3` matrix of local DOFs from a global vector.
    pub fn gather(&self, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.blocks.len(), 3, |b, c| v[3 * self.blocks[b] + c])
    }

    /// Value of the cell potential at `x` for local DOFs `vl`.
    pub fn potential_at(&self, vl: &DMatrix<f64>, x: &Point3) -> Point3 {
        let coeffs = &self.potential * vl;
        let q = self.basis2.values(x);
        Point3::from_fn(|c, _| (0..q.len()).map(|a| q[a] * coeffs[(a, c)]).sum())
    }

    /// Gradient of the cell potential at `x`, `out[(c, j)] = d_j u_c`.
    pub fn potential_gradient_at(&self, vl: &DMatrix<f64>, x: &Point3) -> nalgebra::Matrix3<f64> {
        let coeffs = &self.potential * vl;
        let g = self.basis2.gradient_values(x);
        nalgebra::Matrix3::from_fn(|c, j| (0..g.len()).map(|a| g[a][j] * coeffs[(a, c)]).sum())
    }

    /// Reconstructed gradient at `x`, `out[(c, j)]`.
    pub fn gradient_at(&self, vl: &DMatrix<f64>, x: &Point3) -> nalgebra::Matrix3<f64> {
        let phi = self.basis1.values(x);
        let mut out = nalgebra::Matrix3::zeros();
        for j in 0..3 {
            let coeffs = &self.gradient[j] * vl;
            for c in 0..3 {
                out[(c, j)] = (0..phi.len()).map(|k| phi[k] * coeffs[(k, c)]).sum();
            }
        }
        out
    }
}

fn row_of(basis_values: &[f64], m: &DMatrix<f64>) -> DVector<f64> {
    let mut r = DVector::zeros(m.ncols());
    for (a, q) in basis_values.iter().enumerate() {
        r.axpy(*q, &m.row(a).transpose(), 1.0);
    }
    r
}

fn add_row(m: &mut DMatrix<f64>, i: usize, s: f64, v: &DVector<f64>) {
    for (j, x) in v.iter().enumerate() {
        m[(i, j)] += s * x;
    }
}

pub fn cell_operators(
    mesh: &PolyMesh,
    dofmap: &DofMap,
    faces: &[FaceOperators],
    c: usize,
    options: OperatorOptions,
) -> Result<CellOperators> {
    let cell = &mesh.cells[c];
    let (nv, ne, nf) = (cell.vertices.len(), cell.edges.len(), cell.faces.len());
    let nb = nv + ne + nf + 1;
    let blocks = dofmap.cell_blocks(mesh, c);
    let basis1 = MonomialBasis::cell(mesh, c, 1);
    let basis2 = MonomialBasis::cell(mesh, c, 2);
    let rule = cell_rule(mesh, c, QUAD_ORDER)?;
    let ctx = |what: &str| format!("{what} of cell {c}");
    let vpos = |s: usize| cell.vertices.iter().position(|&x| x == s).expect("face vertex in cell");
    let epos = |e: usize| cell.edges.iter().position(|&x| x == e).expect("face edge in cell");

    // Face potentials mapped to cell-local blocks.
    let face_potentials: Vec<DMatrix<f64>> = cell
        .faces
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let face = &mesh.faces[f];
            let m = face.vertices.len();
            let fo = &faces[f];
            let mut p = DMatrix::zeros(fo.potential.nrows(), nb);
            for (l, col) in fo.potential.column_iter().enumerate() {
                let target = if l < m {
                    vpos(face.vertices[l])
                } else if l < 2 * m {
                    nv + epos(face.edges[l - m])
                } else {
                    nv + ne + i
                };
                let mut dst = p.column_mut(target);
                dst += col;
            }
            p
        })
        .collect();

    // Cell gradient.
    let mass1 = gram_matrix(&basis1, &rule);
    let n1 = basis1.len();
    let mut rhs: [DMatrix<f64>; 3] = std::array::from_fn(|_| DMatrix::zeros(n1, nb));
    for (x, w) in rule.iter() {
        let grads = basis1.gradient_values(x);
        for (k, g) in grads.iter().enumerate() {
            for (j, r) in rhs.iter_mut().enumerate() {
                r[(k, nb - 1)] -= w * g[j];
            }
        }
    }
    for (i, &f) in cell.faces.iter().enumerate() {
        let n = cell.outward_normal(mesh, i);
        let fo = &faces[f];
        for (x, w) in fo.rule.iter() {
            let phi = basis1.values(x);
            let ups = row_of(&fo.basis2.values(x), &face_potentials[i]);
            for (k, p) in phi.iter().enumerate() {
                for (j, r) in rhs.iter_mut().enumerate() {
                    add_row(r, k, n[j] * w * p, &ups);
                }
            }
        }
    }
    let gradient: [DMatrix<f64>; 3] = [
        solve_dense(&mass1, &rhs[0], &ctx("gradient"))?,
        solve_dense(&mass1, &rhs[1], &ctx("gradient"))?,
        solve_dense(&mass1, &rhs[2], &ctx("gradient"))?,
    ];

    // Cell potential, tested against (x - x_K) q for q in P2.
    let n2 = basis2.len();
    let mut lhs = DMatrix::zeros(n2, n2);
    let mut rhs = DMatrix::zeros(n2, nb);
    for (x, w) in rule.iter() {
        let q = basis2.values(x);
        let phi = basis1.values(x);
        let d = x - cell.barycenter;
        let mut gd = DVector::zeros(nb);
        for (j, gj) in gradient.iter().enumerate() {
            for (k, p) in phi.iter().enumerate() {
                gd.axpy(p * d[j], &gj.row(k).transpose(), 1.0);
            }
        }
        for b in 0..n2 {
            let kb = (3 + basis2.degree_of(b)) as f64;
            for a in 0..n2 {
                lhs[(b, a)] += w * kb * q[b] * q[a];
            }
            add_row(&mut rhs, b, -w * q[b], &gd);
        }
    }
    for (i, &f) in cell.faces.iter().enumerate() {
        let n = cell.outward_normal(mesh, i);
        let fo = &faces[f];
        for (x, w) in fo.rule.iter() {
            let q = basis2.values(x);
            let ups = row_of(&fo.basis2.values(x), &face_potentials[i]);
            let dn = (x - cell.barycenter).dot(&n);
            for (b, qb) in q.iter().enumerate() {
                add_row(&mut rhs, b, w * qb * dn, &ups);
            }
        }
    }
    let potential = solve_dense(&lhs, &rhs, &ctx("potential"))?;

    // Stabilization as a sum of weighted outer products of difference rows.
    let hk = cell.diameter;
    let mut stab = DMatrix::zeros(nb, nb);
    let mut add = |r: &DVector<f64>, w: f64| stab.ger(w, r, r, 1.0);
    for (i, &f) in cell.faces.iter().enumerate() {
        let fo = &faces[f];
        for (x, w) in fo.rule.iter() {
            let mut r = row_of(&basis2.values(x), &potential);
            r.axpy(-options.face_trace_weight, &row_of(&fo.basis2.values(x), &face_potentials[i]), 1.0);
            add(&r, w / hk);
        }
    }
    for (j, &e) in cell.edges.iter().enumerate() {
        let [a, b] = mesh.edges[e].vertices;
        let loc = [vpos(a), vpos(b), nv + j];
        for (x, w) in edge_rule(mesh, e, QUAD_ORDER)?.iter() {
            let mut r = row_of(&basis2.values(x), &potential);
            for (l, wl) in loc.iter().zip(edge_weights(mesh, e, x)) {
                r[*l] -= wl;
            }
            add(&r, w);
        }
    }
    for (i, &s) in cell.vertices.iter().enumerate() {
        let mut r = row_of(&basis2.values(&mesh.vertices[s]), &potential);
        r[i] -= 1.0;
        add(&r, hk);
    }

    Ok(CellOperators {
        cell: c,
        blocks,
        num_vertices: nv,
        num_edges: ne,
        num_faces: nf,
        basis1,
        basis2,
        face_potentials,
        gradient,
        potential,
        stabilization: stab,
        mass1,
        rule,
    })
}

/// All face and cell operators of a mesh.
#[derive(Debug, Clone)]
pub struct Operators {
    pub faces: Vec<FaceOperators>,
    pub cells: Vec<CellOperators>,
}

impl Operators {
    pub fn build(mesh: &PolyMesh, dofmap: &DofMap) -> Result<Self> {
        Self::build_with(mesh, dofmap, OperatorOptions::default())
    }

    pub fn build_with(mesh: &PolyMesh, dofmap: &DofMap, options: OperatorOptions) -> Result<Self> {
        let faces: Vec<FaceOperators> = (0..mesh.num_faces())
            .into_par_iter()
            .map(|f| face_operators(mesh, f))
            .collect::<Result<_>>()?;
        let cells: Vec<CellOperators> = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| cell_operators(mesh, dofmap, &faces, c, options))
            .collect::<Result<_>>()?;
        Ok(Self { faces, cells })
    }

    /// Potential of `v` on face `f` seen from `cell`, as a `6 x 3` matrix of
    /// coefficients in the face basis.
    pub fn face_potential(&self, mesh: &PolyMesh, f: usize, cell: usize, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let ops = &self.cells[cell];
        let i = mesh.cells[cell]
            .faces
            .iter()
            .position(|&x| x == f)
            .ok_or_else(|| Error::InvalidParameter(format!("cell {cell} does not own face {f}")))?;
        Ok(&ops.face_potentials[i] * ops.gather(v))
    }
}
