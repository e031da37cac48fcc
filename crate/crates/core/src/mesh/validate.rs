use std::fmt;

use nalgebra::Vector2;

use super::{polygon_geometry, Point3, PolyMesh};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshIssue {
    NonPlanarFace { face: usize, deviation: f64 },
    NonSimpleFace { face: usize },
    NormalMismatch { face: usize },
    OpenCell { cell: usize, defect: f64 },
    FaceCellCount { face: usize, count: usize },
    NonPositiveVolume { cell: usize },
    DiameterMismatch { reported: f64, computed: f64 },
}

impl fmt::Display for MeshIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshIssue::NonPlanarFace { face, deviation } => write!(f, "face {face} is not planar (deviation {deviation:.3e})"),
            MeshIssue::NonSimpleFace { face } => write!(f, "face {face} is not a simple polygon"),
            MeshIssue::NormalMismatch { face } => write!(f, "stored normal of face {face} disagrees with its loop"),
            MeshIssue::OpenCell { cell, defect } => write!(f, "cell {cell} is not closed (|sum |f| n_Kf| = {defect:.3e})"),
            MeshIssue::FaceCellCount { face, count } => write!(f, "face {face} has {count} incident cells"),
            MeshIssue::NonPositiveVolume { cell } => write!(f, "cell {cell} has non-positive volume"),
            MeshIssue::DiameterMismatch { reported, computed } => {
                write!(f, "mesh size {reported} differs from max cell diameter {computed}")
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MeshReport {
    pub issues: Vec<MeshIssue>,
}

impl MeshReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }

    /// Cells named by an `OpenCell` issue.
    pub fn open_cells(&self) -> Vec<usize> {
        self.issues
            .iter()
            .filter_map(|i| match i {
                MeshIssue::OpenCell { cell, .. } => Some(*cell),
                _ => None,
            })
            .collect()
    }
}

/// Checks every structural and geometric invariant of a mesh.
pub fn validate(mesh: &PolyMesh) -> MeshReport {
    let mut issues = Vec::new();
    for (f, face) in mesh.faces.iter().enumerate() {
        let (normal, _, center) = polygon_geometry(&mesh.vertices, &face.vertices);
        let dev = face
            .vertices
            .iter()
            .map(|&v| (mesh.vertices[v] - center).dot(&normal).abs())
            .fold(0.0, f64::max);
        if dev > 1e-12 * face.diameter.max(f64::MIN_POSITIVE) {
            issues.push(MeshIssue::NonPlanarFace { face: f, deviation: dev });
        }
        if !is_simple(mesh, f) {
            issues.push(MeshIssue::NonSimpleFace { face: f });
        }
        if (normal - face.normal).norm() > 1e-10 {
            issues.push(MeshIssue::NormalMismatch { face: f });
        }
        if face.cells.is_empty() || face.cells.len() > 2 {
            issues.push(MeshIssue::FaceCellCount {
                face: f,
                count: face.cells.len(),
            });
        }
    }
    for (c, cell) in mesh.cells.iter().enumerate() {
        if !(cell.volume > 0.0) {
            issues.push(MeshIssue::NonPositiveVolume { cell: c });
        }
        let sum: Point3 = (0..cell.faces.len())
            .map(|i| cell.outward_normal(mesh, i) * mesh.faces[cell.faces[i]].area)
            .sum();
        if sum.norm() > 1e-12 * cell.diameter * cell.diameter {
            issues.push(MeshIssue::OpenCell {
                cell: c,
                defect: sum.norm(),
            });
        }
    }
    let computed = mesh
        .cells
        .iter()
        .map(|c| super::diameter_of(&mesh.vertices, &c.vertices))
        .fold(0.0, f64::max);
    if (mesh.h() - computed).abs() > 1e-14 * computed {
        issues.push(MeshIssue::DiameterMismatch {
            reported: mesh.h(),
            computed,
        });
    }
    MeshReport { issues }
}

fn is_simple(mesh: &PolyMesh, f: usize) -> bool {
    let face = &mesh.faces[f];
    let k = face.vertices.len();
    for i in 0..k {
        for j in i + 1..k {
            if face.vertices[i] == face.vertices[j] || mesh.vertices[face.vertices[i]] == mesh.vertices[face.vertices[j]] {
                return false;
            }
        }
    }
    if k <= 3 {
        return true;
    }
    // Project onto the face plane and test non-adjacent edge pairs.
    let n = face.normal;
    let t1 = (mesh.vertices[face.vertices[1]] - mesh.vertices[face.vertices[0]]).normalize();
    let t2 = n.cross(&t1);
    let p: Vec<Vector2<f64>> = face
        .vertices
        .iter()
        .map(|&v| {
            let d = mesh.vertices[v] - face.barycenter;
            Vector2::new(d.dot(&t1), d.dot(&t2))
        })
        .collect();
    for i in 0..k {
        for j in i + 1..k {
            if j == i + 1 || (i == 0 && j == k - 1) {
                continue;
            }
            if segments_intersect(p[i], p[(i + 1) % k], p[j], p[(j + 1) % k]) {
                return false;
            }
        }
    }
    true
}

fn segments_intersect(a: Vector2<f64>, b: Vector2<f64>, c: Vector2<f64>, d: Vector2<f64>) -> bool {
    let orient = |p: Vector2<f64>, q: Vector2<f64>, r: Vector2<f64>| (q - p).perp(&(r - p));
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 <= 0.0 && o3 * o4 <= 0.0
}
