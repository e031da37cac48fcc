use crate::mesh::{Point3, PolyMesh};

/// Local coordinate frame of a mesh entity.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Edge { tangent: Point3 },
    Face { t1: Point3, t2: Point3, normal: Point3 },
    Cell,
}

impl Frame {
    fn dim(&self) -> usize {
        match self {
            Frame::Edge { .. } => 1,
            Frame::Face { .. } => 2,
            Frame::Cell => 3,
        }
    }

    fn axis(&self, a: usize) -> Point3 {
        match self {
            Frame::Edge { tangent } => *tangent,
            Frame::Face { t1, t2, .. } => {
                if a == 0 {
                    *t1
                } else {
                    *t2
                }
            }
            Frame::Cell => Point3::ith(a, 1.0),
        }
    }
}

/// Scaled monomials `((x - c) / h)^alpha` of total degree `<= degree` in the
/// entity's local frame, ordered by increasing total degree so that a
/// degree-`l` basis is a prefix of any higher-degree one.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub degree: usize,
    pub center: Point3,
    pub scale: f64,
    pub frame: Frame,
    exponents: Vec<[usize; 3]>,
}

/// Number of monomials of degree `<= l` in `dim` variables.
pub fn dimension(dim: usize, l: usize) -> usize {
    match dim {
        1 => l + 1,
        2 => (l + 1) * (l + 2) / 2,
        3 => (l + 1) * (l + 2) * (l + 3) / 6,
        _ => panic!("unsupported dimension {dim}"),
    }
}

impl MonomialBasis {
    pub fn new(degree: usize, center: Point3, scale: f64, frame: Frame) -> Self {
        assert!(degree <= 7, "monomial bases are limited to degree 7");
        let dim = frame.dim();
        let mut exponents = Vec::with_capacity(dimension(dim, degree));
        for d in 0..=degree {
            match dim {
                1 => exponents.push([d, 0, 0]),
                2 => {
                    for a in (0..=d).rev() {
                        exponents.push([a, d - a, 0]);
                    }
                }
                _ => {
                    for a in (0..=d).rev() {
                        for b in (0..=d - a).rev() {
                            exponents.push([a, b, d - a - b]);
                        }
                    }
                }
            }
        }
        Self {
            degree,
            center,
            scale,
            frame,
            exponents,
        }
    }

    pub fn cell(mesh: &PolyMesh, c: usize, degree: usize) -> Self {
        let k = &mesh.cells[c];
        Self::new(degree, k.barycenter, k.diameter, Frame::Cell)
    }

    /// Face basis in the frame `t1 = first loop edge`, `t2 = n x t1`.
    pub fn face(mesh: &PolyMesh, f: usize, degree: usize) -> Self {
        let face = &mesh.faces[f];
        let t1 = (mesh.vertices[face.vertices[1]] - mesh.vertices[face.vertices[0]]).normalize();
        let t2 = face.normal.cross(&t1);
        Self::new(
            degree,
            face.barycenter,
            face.diameter,
            Frame::Face {
                t1,
                t2,
                normal: face.normal,
            },
        )
    }

    pub fn edge(mesh: &PolyMesh, e: usize, degree: usize) -> Self {
        let edge = &mesh.edges[e];
        let [a, b] = edge.vertices;
        let tangent = (mesh.vertices[b] - mesh.vertices[a]).normalize();
        Self::new(degree, edge.midpoint, edge.length, Frame::Edge { tangent })
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Total degree of the `i`-th basis function.
    pub fn degree_of(&self, i: usize) -> usize {
        self.exponents[i].iter().sum()
    }

    pub fn local(&self, x: &Point3) -> [f64; 3] {
        let d = (x - self.center) / self.scale;
        let mut s = [0.0; 3];
        for (a, slot) in s.iter_mut().enumerate().take(self.frame.dim()) {
            *slot = d.dot(&self.frame.axis(a));
        }
        s
    }

    fn powers(&self, s: &[f64; 3]) -> [[f64; 8]; 3] {
        let mut p = [[0.0; 8]; 3];
        for a in 0..3 {
            p[a][0] = 1.0;
            for k in 1..=self.degree {
                p[a][k] = p[a][k - 1] * s[a];
            }
        }
        p
    }

    pub fn eval(&self, x: &Point3, out: &mut [f64]) {
        let p = self.powers(&self.local(x));
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = p[0][e[0]] * p[1][e[1]] * p[2][e[2]];
        }
    }

    pub fn values(&self, x: &Point3) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        self.eval(x, &mut v);
        v
    }

    /// Gradients in global coordinates (tangential for edges and faces).
    pub fn gradients(&self, x: &Point3, out: &mut [Point3]) {
        let p = self.powers(&self.local(x));
        let dim = self.frame.dim();
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            let mut g = Point3::zeros();
            for a in 0..dim {
                if e[a] == 0 {
                    continue;
                }
                let mut d = e[a] as f64 * p[a][e[a] - 1];
                for b in 0..3 {
                    if b != a {
                        d *= p[b][e[b]];
                    }
                }
                g += self.frame.axis(a) * (d / self.scale);
            }
            *o = g;
        }
    }

    pub fn gradient_values(&self, x: &Point3) -> Vec<Point3> {
        let mut v = vec![Point3::zeros(); self.len()];
        self.gradients(x, &mut v);
        v
    }
}
