use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FractureFace, FractureNetwork, MeshBuilder, Point3, PolyMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two remaining axes, in increasing order.
    pub fn others(self) -> [usize; 2] {
        match self {
            Axis::X => [1, 2],
            Axis::Y => [0, 2],
            Axis::Z => [0, 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub lo: Point3,
    pub hi: Point3,
}

impl BoxDomain {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Self {
        Self {
            lo: Point3::from(lo),
            hi: Point3::from(hi),
        }
    }

    /// The cube `(-1, 1)^3`.
    pub fn symmetric_unit() -> Self {
        Self::new([-1.0; 3], [1.0; 3])
    }

    pub fn volume(&self) -> f64 {
        let d = self.hi - self.lo;
        d.x * d.y * d.z
    }
}

/// An axis-aligned planar fracture `{x_axis = coordinate}`, optionally limited
/// to a rectangle over the two remaining axes (in increasing axis order).
///
/// The positive side is the lower-coordinate side, so `n+` is the unit
/// vector along `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracturePlane {
    pub axis: Axis,
    pub coordinate: f64,
    pub extent: Option<[(f64, f64); 2]>,
    pub threshold: f64,
}

impl FracturePlane {
    pub fn full(axis: Axis, coordinate: f64, threshold: f64) -> Self {
        Self {
            axis,
            coordinate,
            extent: None,
            threshold,
        }
    }

    pub fn bounded(axis: Axis, coordinate: f64, extent: [(f64, f64); 2], threshold: f64) -> Self {
        Self {
            axis,
            coordinate,
            extent: Some(extent),
            threshold,
        }
    }

    fn contains_face_center(&self, c: &Point3) -> bool {
        match self.extent {
            None => true,
            Some(ext) => {
                let o = self.axis.others();
                (0..2).all(|i| c[o[i]] > ext[i].0 && c[o[i]] < ext[i].1)
            }
        }
    }
}

struct Grid {
    n: usize,
    domain: BoxDomain,
    spacing: Point3,
}

impl Grid {
    fn new(n: usize, domain: BoxDomain) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let d = domain.hi - domain.lo;
        if d.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidParameter("empty domain".into()));
        }
        Ok(Self {
            n,
            domain,
            spacing: d / n as f64,
        })
    }

    fn vid(&self, i: usize, j: usize, k: usize) -> usize {
        let m = self.n + 1;
        i + m * (j + m * k)
    }

    fn lattice(&self) -> Vec<Point3> {
        let m = self.n + 1;
        let mut out = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    out.push(self.point(i, j, k));
                }
            }
        }
        out
    }

    fn point(&self, i: usize, j: usize, k: usize) -> Point3 {
        let idx = [i, j, k];
        Point3::from_fn(|a, _| {
            if idx[a] == self.n {
                self.domain.hi[a]
            } else {
                self.domain.lo[a] + idx[a] as f64 * self.spacing[a]
            }
        })
    }

    /// Grid index of a coordinate along an axis, if it lies on a grid plane.
    fn grid_index(&self, axis: usize, x: f64) -> Option<usize> {
        let t = (x - self.domain.lo[axis]) / self.spacing[axis];
        let r = t.round();
        ((t - r).abs() < 1e-9 && r >= 0.0 && r <= self.n as f64).then_some(r as usize)
    }

    fn check_plane(&self, p: &FracturePlane) -> Result<()> {
        let a = p.axis.index();
        match self.grid_index(a, p.coordinate) {
            Some(i) if i > 0 && i < self.n => {}
            _ => {
                return Err(Error::NonCompliantFracture(format!(
                    "plane {:?} = {} does not coincide with an interior grid plane (n = {})",
                    p.axis, p.coordinate, self.n
                )))
            }
        }
        if let Some(ext) = p.extent {
            for (slot, &b) in p.axis.others().iter().enumerate() {
                let (lo, hi) = ext[slot];
                if !(lo < hi) || self.grid_index(b, lo).is_none() || self.grid_index(b, hi).is_none() {
                    return Err(Error::NonCompliantFracture(format!(
                        "extent ({lo}, {hi}) along axis {b} is not aligned with the grid (n = {})",
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// The 8 corners of cube `(i, j, k)`, indexed by bit pattern `x + 2y + 4z`.
    fn corners(&self, i: usize, j: usize, k: usize) -> [usize; 8] {
        let mut c = [0; 8];
        for (b, slot) in c.iter_mut().enumerate() {
            *slot = self.vid(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        }
        c
    }
}

/// Outward loops of a hexahedron given its corners in bit-pattern order.
fn hex_loops(c: &[usize; 8]) -> [[usize; 4]; 6] {
    [
        [c[0], c[4], c[6], c[2]], // x-
        [c[1], c[3], c[7], c[5]], // x+
        [c[0], c[1], c[5], c[4]], // y-
        [c[2], c[6], c[7], c[3]], // y+
        [c[0], c[2], c[3], c[1]], // z-
        [c[4], c[5], c[7], c[6]], // z+
    ]
}

fn tag_fractures(mesh: &PolyMesh, grid: &Grid, planes: &[FracturePlane]) -> Result<FractureNetwork> {
    let mut out = Vec::new();
    for (f, face) in mesh.faces.iter().enumerate() {
        for p in planes {
            let a = p.axis.index();
            let tol = 1e-9 * grid.spacing[a];
            let on_plane = face
                .vertices
                .iter()
                .all(|&v| (mesh.vertices[v][a] - p.coordinate).abs() < tol);
            if !on_plane || !p.contains_face_center(&face.barycenter) {
                continue;
            }
            if face.cells.len() != 2 {
                return Err(Error::NonCompliantFracture(format!("fracture face {f} lies on the boundary")));
            }
            let (k0, k1) = (face.cells[0], face.cells[1]);
            let (pos, neg) = if mesh.cells[k0].barycenter[a] < p.coordinate {
                (k0, k1)
            } else {
                (k1, k0)
            };
            let mut normal = Point3::zeros();
            normal[a] = 1.0;
            out.push(FractureFace {
                face: f,
                normal,
                positive_cell: pos,
                negative_cell: neg,
                threshold: p.threshold,
            });
            break;
        }
    }
    Ok(FractureNetwork::new(out))
}

fn check_planes(grid: &Grid, planes: &[FracturePlane]) -> Result<()> {
    for p in planes {
        grid.check_plane(p)?;
        if !(p.threshold >= 0.0) {
            return Err(Error::InvalidParameter("Tresca threshold must be nonnegative".into()));
        }
    }
    Ok(())
}

/// Uniform `n x n x n` hexahedral mesh of a box.
pub fn build_cartesian(n: usize, domain: BoxDomain, planes: &[FracturePlane]) -> Result<(PolyMesh, FractureNetwork)> {
    build_hexacut(n, domain, planes, 0, 0.0)
}

/// Kuhn subdivision of the uniform grid: every cube is split into the six
/// tetrahedra sharing its main diagonal, which gives matching faces between
/// neighbouring cubes.
pub fn build_tetrahedral(n: usize, domain: BoxDomain, planes: &[FracturePlane]) -> Result<(PolyMesh, FractureNetwork)> {
    let grid = Grid::new(n, domain)?;
    check_planes(&grid, planes)?;
    let mut builder = MeshBuilder::new(grid.lattice());
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let c = grid.corners(i, j, k);
                for perm in PERMS {
                    let mut bits = 0usize;
                    let mut tet = [c[0]; 4];
                    for (s, &axis) in perm.iter().enumerate() {
                        bits |= 1 << axis;
                        tet[s + 1] = c[bits];
                    }
                    let loops = tet_loops(&builder.vertices, tet);
                    builder.add_cell(&loops);
                }
            }
        }
    }
    let mesh = builder.build()?;
    let fracture = tag_fractures(&mesh, &grid, planes)?;
    Ok((mesh, fracture))
}

fn tet_loops(vertices: &[Point3], t: [usize; 4]) -> Vec<Vec<usize>> {
    let mut loops = Vec::with_capacity(4);
    for skip in 0..4 {
        let mut f: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| t[i]).collect();
        let (a, b, c, d) = (vertices[f[0]], vertices[f[1]], vertices[f[2]], vertices[t[skip]]);
        if (b - a).cross(&(c - a)).dot(&(d - a)) > 0.0 {
            f.swap(1, 2);
        }
        loops.push(f);
    }
    loops
}

/// Cartesian mesh with randomly perturbed interior vertices. Vertices on the
/// domain boundary or on a fracture plane stay fixed; every quadrilateral
/// face that becomes non-planar is cut into two triangles along its shorter
/// diagonal.
pub fn build_hexacut(
    n: usize,
    domain: BoxDomain,
    planes: &[FracturePlane],
    seed: u64,
    magnitude: f64,
) -> Result<(PolyMesh, FractureNetwork)> {
    if !(0.0..0.3).contains(&magnitude) {
        return Err(Error::InvalidParameter(format!("perturbation magnitude {magnitude} outside [0, 0.3)")));
    }
    let grid = Grid::new(n, domain)?;
    check_planes(&grid, planes)?;
    let mut vertices = grid.lattice();
    if magnitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = n + 1;
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    let offset = Point3::new(
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                        rng.random_range(-1.0..=1.0),
                    );
                    let interior = [i, j, k].iter().all(|&x| x > 0 && x < n);
                    let v = grid.vid(i, j, k);
                    let on_fracture = planes.iter().any(|p| {
                        let a = p.axis.index();
                        (vertices[v][a] - p.coordinate).abs() < 1e-9 * grid.spacing[a]
                    });
                    if interior && !on_fracture {
                        vertices[v] += offset.component_mul(&grid.spacing) * magnitude;
                    }
                }
            }
        }
    }

    let mut builder = MeshBuilder::new(vertices);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let c = grid.corners(i, j, k);
                let mut loops = Vec::with_capacity(12);
                for quad in hex_loops(&c) {
                    loops.extend(split_if_warped(&builder.vertices, quad));
                }
                builder.add_cell(&loops);
            }
        }
    }
    let mesh = builder.build()?;
    for (id, _) in mesh.cells.iter().enumerate() {
        check_star_shaped(&mesh, id)?;
    }
    let fracture = tag_fractures(&mesh, &grid, planes)?;
    Ok((mesh, fracture))
}

fn split_if_warped(vertices: &[Point3], q: [usize; 4]) -> Vec<Vec<usize>> {
    let p: Vec<Point3> = q.iter().map(|&v| vertices[v]).collect();
    let (normal, _, center) = super::polygon_geometry(vertices, &q);
    let diam = super::diameter_of(vertices, &q);
    let warped = p.iter().any(|x| (x - center).dot(&normal).abs() > 1e-12 * diam);
    if !warped {
        return vec![q.to_vec()];
    }
    let d02 = (p[2] - p[0]).norm();
    let d13 = (p[3] - p[1]).norm();
    // Tie: keep the diagonal through the smallest vertex index so that both
    // neighbouring cells cut the face the same way.
    let use02 = if (d02 - d13).abs() <= 1e-14 * diam {
        q[0].min(q[2]) < q[1].min(q[3])
    } else {
        d02 < d13
    };
    if use02 {
        vec![vec![q[0], q[1], q[2]], vec![q[0], q[2], q[3]]]
    } else {
        vec![vec![q[1], q[2], q[3]], vec![q[1], q[3], q[0]]]
    }
}

/// Rejects cells that are not star-shaped with respect to their barycenter.
pub(crate) fn check_star_shaped(mesh: &PolyMesh, cell: usize) -> Result<()> {
    let k = &mesh.cells[cell];
    if !(k.volume > 0.0) {
        return Err(Error::DegenerateCell {
            cell,
            reason: format!("non-positive volume {}", k.volume),
        });
    }
    for tri in mesh.cell_boundary_triangles(cell) {
        let v = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).dot(&(tri[0] - k.barycenter));
        if !(v > 1e-14 * k.diameter.powi(3)) {
            return Err(Error::DegenerateCell {
                cell,
                reason: "not star-shaped with respect to its barycenter".into(),
            });
        }
    }
    Ok(())
}
