#![allow(dead_code)]

use ddr_core::mesh::{build_cartesian, build_hexacut, build_tetrahedral, BoxDomain, FractureNetwork, Point3, PolyMesh};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vector field with random coefficients on the global monomials up to
/// degree `deg` (at most 3).
#[derive(Clone, Debug)]
pub struct RandomPoly {
    pub deg: usize,
    pub terms: Vec<([i32; 3], Point3)>,
}

impl RandomPoly {
    pub fn new(rng: &mut ChaCha8Rng, deg: usize) -> Self {
        let mut terms = Vec::new();
        for a in 0..=deg as i32 {
            for b in 0..=deg as i32 - a {
                for c in 0..=deg as i32 - a - b {
                    let coef = Point3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    terms.push(([a, b, c], coef));
                }
            }
        }
        Self { deg, terms }
    }

    pub fn value(&self, x: &Point3) -> Point3 {
        self.terms
            .iter()
            .map(|(e, c)| c * (x.x.powi(e[0]) * x.y.powi(e[1]) * x.z.powi(e[2])))
            .sum()
    }

    /// `out[(i, j)] = d_j u_i`.
    pub fn gradient(&self, x: &Point3) -> Matrix3<f64> {
        let mut g = Matrix3::zeros();
        for (e, c) in &self.terms {
            for j in 0..3 {
                if e[j] == 0 {
                    continue;
                }
                let mut d = e[j] as f64;
                for k in 0..3 {
                    let p = if k == j { e[k] - 1 } else { e[k] };
                    d *= x[k].powi(p);
                }
                for i in 0..3 {
                    g[(i, j)] += c[i] * d;
                }
            }
        }
        g
    }

    pub fn divergence(&self, x: &Point3) -> f64 {
        self.gradient(x).trace()
    }
}

pub fn unit_box() -> BoxDomain {
    BoxDomain::new([0.0; 3], [1.0; 3])
}

pub fn cube_mesh() -> (PolyMesh, FractureNetwork) {
    build_cartesian(1, unit_box(), &[]).unwrap()
}

pub fn tet_mesh() -> (PolyMesh, FractureNetwork) {
    build_tetrahedral(1, unit_box(), &[]).unwrap()
}

pub fn hexacut_mesh() -> (PolyMesh, FractureNetwork) {
    build_hexacut(2, unit_box(), &[], 1, 0.25).unwrap()
}
