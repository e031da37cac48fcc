//! Fracture-compliant polytopal meshes.
//!
//! A [`PolyMesh`] stores vertices, edges, planar polygonal faces and
//! polyhedral cells together with their incidence relations and the
//! geometric quantities used by the discrete operators (areas, volumes,
//! barycenters, diameters, unit normals). Fractures are described by a
//! separate [`FractureNetwork`] that tags interior faces.

mod generators;
mod io;
mod sides;
mod validate;

pub use generators::{build_cartesian, build_hexacut, build_tetrahedral, Axis, BoxDomain, FracturePlane};
pub use io::{read_polymesh, write_polymesh};
pub use sides::{classify_fracture_sides, SideClasses};
pub use validate::{validate, MeshIssue, MeshReport};

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Vector3<f64>;

#[derive(Debug, Clone)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub length: f64,
    pub midpoint: Point3,
}

#[derive(Debug, Clone)]
pub struct Face {
    /// Vertex loop, counter-clockwise around `normal`.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub edges: Vec<usize>,
    pub normal: Point3,
    pub area: f64,
    pub barycenter: Point3,
    pub diameter: f64,
    pub cells: Vec<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub faces: Vec<usize>,
    /// `+1` when the stored face normal points out of the cell, `-1` otherwise.
    pub orientations: Vec<f64>,
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
    pub volume: f64,
    pub barycenter: Point3,
    pub diameter: f64,
}

impl Cell {
    /// Outward unit normal of the `i`-th face of the cell.
    pub fn outward_normal(&self, mesh: &PolyMesh, i: usize) -> Point3 {
        mesh.faces[self.faces[i]].normal * self.orientations[i]
    }
}

#[derive(Debug, Clone)]
pub struct PolyMesh {
    pub vertices: Vec<Point3>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    pub vertex_cells: Vec<Vec<usize>>,
    pub vertex_faces: Vec<Vec<usize>>,
    pub edge_cells: Vec<Vec<usize>>,
    pub edge_faces: Vec<Vec<usize>>,
    pub vertex_boundary: Vec<bool>,
    pub edge_boundary: Vec<bool>,
}

impl PolyMesh {
    /// Builds a mesh from vertex coordinates, face loops and cells given as
    /// `(face id, outward)` pairs, where `outward` tells whether the loop
    /// normal of that face points out of the cell.
    pub fn from_parts(
        vertices: Vec<Point3>,
        face_loops: Vec<Vec<usize>>,
        cells: Vec<Vec<(usize, bool)>>,
    ) -> Result<Self> {
        for (f, lp) in face_loops.iter().enumerate() {
            if lp.len() < 3 {
                return Err(Error::InvalidParameter(format!("face {f} has fewer than 3 vertices")));
            }
            if let Some(&v) = lp.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidParameter(format!("face {f} references missing vertex {v}")));
            }
        }
        for (c, fs) in cells.iter().enumerate() {
            if let Some(&(f, _)) = fs.iter().find(|(f, _)| *f >= face_loops.len()) {
                return Err(Error::InvalidParameter(format!("cell {c} references missing face {f}")));
            }
        }

        let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut faces = Vec::with_capacity(face_loops.len());
        for lp in face_loops {
            let k = lp.len();
            let mut fe = Vec::with_capacity(k);
            for i in 0..k {
                let (a, b) = (lp[i], lp[(i + 1) % k]);
                let key = (a.min(b), a.max(b));
                let id = *edge_lookup.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[key.0], vertices[key.1]);
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        length: (pb - pa).norm(),
                        midpoint: (pa + pb) * 0.5,
                    });
                    edges.len() - 1
                });
                fe.push(id);
            }
            let (normal, area, barycenter) = polygon_geometry(&vertices, &lp);
            let diameter = diameter_of(&vertices, &lp);
            faces.push(Face {
                vertices: lp,
                edges: fe,
                normal,
                area,
                barycenter,
                diameter,
                cells: Vec::new(),
            });
        }

        let mut cell_list = Vec::with_capacity(cells.len());
        for (c, fs) in cells.into_iter().enumerate() {
            let mut verts = Vec::new();
            let mut cedges = Vec::new();
            for &(f, _) in &fs {
                faces[f].cells.push(c);
                for &v in &faces[f].vertices {
                    if !verts.contains(&v) {
                        verts.push(v);
                    }
                }
                for &e in &faces[f].edges {
                    if !cedges.contains(&e) {
                        cedges.push(e);
                    }
                }
            }
            let face_ids: Vec<usize> = fs.iter().map(|&(f, _)| f).collect();
            let orientations: Vec<f64> = fs.iter().map(|&(_, o)| if o { 1.0 } else { -1.0 }).collect();
            let (volume, barycenter) = fan_volume_and_barycenter(&vertices, &faces, &face_ids, &orientations, &verts);
            let diameter = diameter_of(&vertices, &verts);
            cell_list.push(Cell {
                faces: face_ids,
                orientations,
                edges: cedges,
                vertices: verts,
                volume,
                barycenter,
                diameter,
            });
        }

        let nv = vertices.len();
        let ne = edges.len();
        let mut vertex_cells = vec![Vec::new(); nv];
        let mut edge_cells = vec![Vec::new(); ne];
        for (c, cell) in cell_list.iter().enumerate() {
            for &v in &cell.vertices {
                vertex_cells[v].push(c);
            }
            for &e in &cell.edges {
                edge_cells[e].push(c);
            }
        }
        let mut vertex_faces = vec![Vec::new(); nv];
        let mut edge_faces = vec![Vec::new(); ne];
        let mut vertex_boundary = vec![false; nv];
        let mut edge_boundary = vec![false; ne];
        for (f, face) in faces.iter().enumerate() {
            for &v in &face.vertices {
                vertex_faces[v].push(f);
            }
            for &e in &face.edges {
                edge_faces[e].push(f);
            }
            if face.is_boundary() {
                for &v in &face.vertices {
                    vertex_boundary[v] = true;
                }
                for &e in &face.edges {
                    edge_boundary[e] = true;
                }
            }
        }

        Ok(Self {
            vertices,
            edges,
            faces,
            cells: cell_list,
            vertex_cells,
            vertex_faces,
            edge_cells,
            edge_faces,
            vertex_boundary,
            edge_boundary,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Mesh size `h = max_K h_K`.
    pub fn h(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    /// Cell volume by the divergence theorem, `sum_f (x_f . n_Kf) |f| / 3`.
    pub fn divergence_volume(&self, cell: usize) -> f64 {
        let k = &self.cells[cell];
        let origin = k.barycenter;
        k.faces
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let face = &self.faces[f];
                (face.barycenter - origin).dot(&k.outward_normal(self, i)) * face.area / 3.0
            })
            .sum()
    }

    /// Outward-oriented triangles `(a, b, c)` covering the boundary of a cell:
    /// each face is fanned from its first vertex (convex faces) or from its
    /// barycenter otherwise.
    pub fn cell_boundary_triangles(&self, cell: usize) -> Vec<[Point3; 3]> {
        let k = &self.cells[cell];
        let mut out = Vec::new();
        for (i, &f) in k.faces.iter().enumerate() {
            for tri in self.face_triangles(f) {
                if k.orientations[i] > 0.0 {
                    out.push(tri);
                } else {
                    out.push([tri[0], tri[2], tri[1]]);
                }
            }
        }
        out
    }

    /// Triangles covering a face, oriented with the face normal.
    pub fn face_triangles(&self, f: usize) -> Vec<[Point3; 3]> {
        let face = &self.faces[f];
        let p: Vec<Point3> = face.vertices.iter().map(|&v| self.vertices[v]).collect();
        let k = p.len();
        if k == 3 {
            return vec![[p[0], p[1], p[2]]];
        }
        if is_convex_polygon(&p, &face.normal) {
            (1..k - 1).map(|i| [p[0], p[i], p[i + 1]]).collect()
        } else {
            (0..k).map(|i| [face.barycenter, p[i], p[(i + 1) % k]]).collect()
        }
    }

    /// Unit outward normal, in the plane of `face`, along its `i`-th edge.
    pub fn face_edge_normal(&self, face: usize, i: usize) -> Point3 {
        let fc = &self.faces[face];
        let k = fc.vertices.len();
        let a = self.vertices[fc.vertices[i]];
        let b = self.vertices[fc.vertices[(i + 1) % k]];
        (b - a).cross(&fc.normal).normalize()
    }
}

/// Newell normal, area and barycenter of a planar polygon.
pub(crate) fn polygon_geometry(vertices: &[Point3], lp: &[usize]) -> (Point3, f64, Point3) {
    let k = lp.len();
    let origin = lp.iter().map(|&v| vertices[v]).sum::<Point3>() / k as f64;
    let mut twice_n = Point3::zeros();
    for i in 0..k {
        let a = vertices[lp[i]] - origin;
        let b = vertices[lp[(i + 1) % k]] - origin;
        twice_n += a.cross(&b);
    }
    let area = 0.5 * twice_n.norm();
    let normal = if area > 0.0 { twice_n / (2.0 * area) } else { Point3::zeros() };
    let p0 = vertices[lp[0]];
    let mut acc = Point3::zeros();
    let mut total = 0.0;
    for i in 1..k - 1 {
        let (p1, p2) = (vertices[lp[i]], vertices[lp[i + 1]]);
        let a = 0.5 * (p1 - p0).cross(&(p2 - p0)).dot(&normal);
        acc += (p0 + p1 + p2) * (a / 3.0);
        total += a;
    }
    let barycenter = if total.abs() > 0.0 { acc / total } else { origin };
    (normal, area, barycenter)
}

pub(crate) fn diameter_of(vertices: &[Point3], ids: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            d = d.max((vertices[a] - vertices[b]).norm());
        }
    }
    d
}

fn is_convex_polygon(p: &[Point3], normal: &Point3) -> bool {
    let k = p.len();
    (0..k).all(|i| {
        let a = p[i];
        let b = p[(i + 1) % k];
        let c = p[(i + 2) % k];
        (b - a).cross(&(c - b)).dot(normal) > 0.0
    })
}

/// Volume and barycenter from a tetrahedral fan rooted at the vertex average.
fn fan_volume_and_barycenter(
    vertices: &[Point3],
    faces: &[Face],
    face_ids: &[usize],
    orientations: &[f64],
    cell_vertices: &[usize],
) -> (f64, Point3) {
    let root = cell_vertices.iter().map(|&v| vertices[v]).sum::<Point3>() / cell_vertices.len() as f64;
    let mut vol = 0.0;
    let mut acc = Point3::zeros();
    for (i, &f) in face_ids.iter().enumerate() {
        let face = &faces[f];
        let k = face.vertices.len();
        for j in 0..k {
            let a = face.barycenter;
            let b = vertices[face.vertices[j]];
            let c = vertices[face.vertices[(j + 1) % k]];
            let v = orientations[i] * (b - a).cross(&(c - a)).dot(&(a - root)) / 6.0;
            vol += v;
            acc += (root + a + b + c) * (v / 4.0);
        }
    }
    (vol, acc / vol)
}

/// A fracture face with its orientation and Tresca threshold.
#[derive(Debug, Clone)]
pub struct FractureFace {
    pub face: usize,
    /// Unit normal pointing out of the positive side.
    pub normal: Point3,
    pub positive_cell: usize,
    pub negative_cell: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Default)]
pub struct FractureNetwork {
    pub faces: Vec<FractureFace>,
    lookup: HashMap<usize, usize>,
}

impl FractureNetwork {
    pub fn new(faces: Vec<FractureFace>) -> Self {
        let lookup = faces.iter().enumerate().map(|(i, ff)| (ff.face, i)).collect();
        Self { faces, lookup }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Index into `faces` of the fracture face lying on mesh face `face`.
    pub fn index_of(&self, face: usize) -> Option<usize> {
        self.lookup.get(&face).copied()
    }

    pub fn contains(&self, face: usize) -> bool {
        self.lookup.contains_key(&face)
    }

    /// Overrides the Tresca threshold on every fracture face.
    pub fn set_threshold(&mut self, g: f64) {
        for ff in &mut self.faces {
            ff.threshold = g;
        }
    }

    /// Checks the network invariants against a mesh.
    pub fn check(&self, mesh: &PolyMesh) -> Result<()> {
        for ff in &self.faces {
            let face = mesh
                .faces
                .get(ff.face)
                .ok_or_else(|| Error::InvalidParameter(format!("fracture face {} does not exist", ff.face)))?;
            if face.cells.len() != 2 {
                return Err(Error::InvalidParameter(format!("fracture face {} is not interior", ff.face)));
            }
            if !(ff.threshold >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative Tresca threshold on face {}", ff.face)));
            }
            let k = &mesh.cells[ff.positive_cell];
            let i = k
                .faces
                .iter()
                .position(|&f| f == ff.face)
                .ok_or_else(|| Error::InvalidParameter(format!("cell {} does not own face {}", ff.positive_cell, ff.face)))?;
            if (k.outward_normal(mesh, i) - ff.normal).norm() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "n+ of fracture face {} is not the outward normal of its positive cell",
                    ff.face
                )));
            }
        }
        Ok(())
    }

    /// Builds the network from a set of face ids using the stored face normal
    /// as `n+` (so the positive cell is the one the normal points out of).
    pub fn from_faces(mesh: &PolyMesh, faces: &[usize], threshold: f64) -> Result<Self> {
        let mut out = Vec::with_capacity(faces.len());
        for &f in faces {
            let face = &mesh.faces[f];
            if face.cells.len() != 2 {
                return Err(Error::NonCompliantFracture(format!("face {f} is not an interior face")));
            }
            let (k0, k1) = (face.cells[0], face.cells[1]);
            let i0 = mesh.cells[k0].faces.iter().position(|&x| x == f).unwrap();
            let (pos, neg) = if mesh.cells[k0].orientations[i0] > 0.0 { (k0, k1) } else { (k1, k0) };
            out.push(FractureFace {
                face: f,
                normal: face.normal,
                positive_cell: pos,
                negative_cell: neg,
                threshold,
            });
        }
        Ok(Self::new(out))
    }
}

/// Incremental builder that deduplicates faces shared between cells.
#[derive(Debug, Default)]
pub(crate) struct MeshBuilder {
    pub vertices: Vec<Point3>,
    faces: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
    cells: Vec<Vec<(usize, bool)>>,
}

impl MeshBuilder {
    pub fn new(vertices: Vec<Point3>) -> Self {
        Self {
            vertices,
            ..Default::default()
        }
    }

    /// Adds a cell bounded by the given loops, each oriented outward.
    pub fn add_cell(&mut self, loops: &[Vec<usize>]) {
        let mut entries = Vec::with_capacity(loops.len());
        for lp in loops {
            let mut key = lp.clone();
            key.sort_unstable();
            if let Some(&id) = self.lookup.get(&key) {
                let stored = &self.faces[id];
                let p = stored.iter().position(|&v| v == lp[0]).unwrap();
                let same = stored[(p + 1) % stored.len()] == lp[1];
                entries.push((id, same));
            } else {
                self.faces.push(lp.clone());
                self.lookup.insert(key, self.faces.len() - 1);
                entries.push((self.faces.len() - 1, true));
            }
        }
        self.cells.push(entries);
    }

    pub fn build(self) -> Result<PolyMesh> {
        PolyMesh::from_parts(self.vertices, self.faces, self.cells)
    }
}
