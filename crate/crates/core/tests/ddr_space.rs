mod common;

use common::*;
use ddr_core::ddr::{build_dofmap, edge_weights, interpolate, Continuous, Operators};
use ddr_core::mesh::{build_cartesian, Axis, BoxDomain, FracturePlane, Point3, PolyMesh};
use ddr_core::poly::{cell_rule, edge_rule, face_rule};
use nalgebra::DVector;

fn families() -> Vec<(&'static str, PolyMesh)> {
    vec![("cube", cube_mesh().0), ("tet", tet_mesh().0), ("hexacut", hexacut_mesh().0)]
}

#[test]
fn dof_counts_on_two_cube_grid() {
    let d = BoxDomain::symmetric_unit();
    let (m, fr) = build_cartesian(2, d, &[FracturePlane::full(Axis::X, 0.0, 0.0)]).unwrap();
    let dm = build_dofmap(&m, &fr);
    assert_eq!(dm.counts(), [36, 66, 40, 8]);
    assert_eq!(dm.num_dofs(), 450);

    let (m, fr) = build_cartesian(2, d, &[]).unwrap();
    let dm = build_dofmap(&m, &fr);
    assert_eq!(dm.num_dofs(), 375);
    let free = dm.boundary_mask().iter().filter(|b| !**b).count();
    assert_eq!(free, 81);
}

#[test]
fn edge_potential_examples() {
    let (m, _) = cube_mesh();
    let e = 0;
    let [a, b] = m.edges[e].vertices;
    let (pa, pb) = (m.vertices[a], m.vertices[b]);
    let eval = |x: &Point3, va: f64, vb: f64, vm: f64| {
        let w = edge_weights(&m, e, x);
        w[0] * va + w[1] * vb + w[2] * vm
    };
    assert!((eval(&pa, 0.0, 0.0, 1.0)).abs() < 1e-14);
    assert!((eval(&pb, 0.0, 0.0, 1.0)).abs() < 1e-14);
    assert!((eval(&m.edges[e].midpoint, 0.0, 0.0, 1.0) - 1.5).abs() < 1e-14);
    let rule = edge_rule(&m, e, 6).unwrap();
    let mean = rule.integrate(|x| eval(x, 0.0, 0.0, 1.0)) / rule.measure();
    assert!((mean - 1.0).abs() < 1e-14);
    for x in &rule.points {
        assert!((eval(x, 2.5, 2.5, 2.5) - 2.5).abs() < 1e-14);
    }
}

#[test]
fn reconstruction_identities_on_polynomials() {
    let mut r = rng(7);
    for (name, m) in families() {
        let fr = ddr_core::mesh::FractureNetwork::empty();
        let dm = build_dofmap(&m, &fr);
        let ops = Operators::build(&m, &dm).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let q = RandomPoly::new(&mut r, 2);
            let v = interpolate(&m, &dm, &ops, &Continuous(|x: &Point3| q.value(x))).unwrap();
            for (c, co) in ops.cells.iter().enumerate() {
                let vl = co.gather(&v);
                for (x, _) in co.rule.iter() {
                    worst = worst.max((co.potential_at(&vl, x) - q.value(x)).norm());
                    worst = worst.max((co.gradient_at(&vl, x) - q.gradient(x)).norm());
                }
                let cell = &m.cells[c];
                for (i, &f) in cell.faces.iter().enumerate() {
                    let fo = &ops.faces[f];
                    let coeffs = &co.face_potentials[i] * &vl;
                    for x in &fo.rule.points {
                        let phi = fo.basis2.values(x);
                        let val = Point3::from_fn(|k, _| (0..6).map(|a| phi[a] * coeffs[(a, k)]).sum());
                        worst = worst.max((val - q.value(x)).norm());
                    }
                }
                for &e in &cell.edges {
                    let [a, b] = m.edges[e].vertices;
                    let blk = |s| dm.vertex_block(s, c).unwrap();
                    let eb = dm.edge_block(e, c).unwrap();
                    for x in &edge_rule(&m, e, 6).unwrap().points {
                        let w = edge_weights(&m, e, x);
                        let val = Point3::from_fn(|k, _| {
                            w[0] * v[3 * blk(a) + k] + w[1] * v[3 * blk(b) + k] + w[2] * v[3 * eb + k]
                        });
                        worst = worst.max((val - q.value(x)).norm());
                    }
                }
            }
        }
        assert!(worst < 1e-10, "{name}: {worst:e}");
    }
}

#[test]
fn potentials_preserve_means_of_random_dofs() {
    let mut r = rng(11);
    use rand::Rng;
    for (name, m) in families() {
        let fr = ddr_core::mesh::FractureNetwork::empty();
        let dm = build_dofmap(&m, &fr);
        let ops = Operators::build(&m, &dm).unwrap();
        let v = DVector::from_fn(dm.num_dofs(), |_, _| r.random_range(-1.0..1.0));
        let mut worst = 0.0f64;
        for (c, co) in ops.cells.iter().enumerate() {
            let vl = co.gather(&v);
            let cell = &m.cells[c];
            let mean = co.rule.iter().map(|(x, w)| co.potential_at(&vl, x) * w).sum::<Point3>() / cell.volume;
            worst = worst.max((mean - vl.row(co.cell_local()).transpose()).norm());
            for (i, &f) in cell.faces.iter().enumerate() {
                let fo = &ops.faces[f];
                let coeffs = &co.face_potentials[i] * &vl;
                let mut acc = Point3::zeros();
                for (x, w) in fo.rule.iter() {
                    let phi = fo.basis2.values(x);
                    acc += Point3::from_fn(|k, _| (0..6).map(|a| phi[a] * coeffs[(a, k)]).sum()) * w;
                }
                let target = vl.row(co.face_local(i)).transpose();
                worst = worst.max((acc / m.faces[f].area - target).norm());
            }
        }
        assert!(worst < 1e-11, "{name}: {worst:e}");
    }
}

#[test]
fn fortin_commutation_for_cubics() {
    let mut r = rng(5);
    for (name, m) in families() {
        let fr = ddr_core::mesh::FractureNetwork::empty();
        let dm = build_dofmap(&m, &fr);
        let ops = Operators::build(&m, &dm).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let u = RandomPoly::new(&mut r, 3);
            let v = interpolate(&m, &dm, &ops, &Continuous(|x: &Point3| u.value(x))).unwrap();
            for co in &ops.cells {
                let vl = co.gather(&v);
                let rule = cell_rule(&m, co.cell, 8).unwrap();
                for k in 0..4 {
                    let res: f64 = rule
                        .iter()
                        .map(|(x, w)| w * (u.divergence(x) - co.gradient_at(&vl, x).trace()) * co.basis1.values(x)[k])
                        .sum();
                    worst = worst.max(res.abs());
                }
            }
        }
        assert!(worst < 1e-9, "{name}: {worst:e}");
    }
}

#[test]
fn stabilization_vanishes_on_polynomials() {
    let mut r = rng(3);
    use rand::Rng;
    for (name, m) in families() {
        let fr = ddr_core::mesh::FractureNetwork::empty();
        let dm = build_dofmap(&m, &fr);
        let ops = Operators::build(&m, &dm).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let q = RandomPoly::new(&mut r, 2);
            let v = interpolate(&m, &dm, &ops, &Continuous(|x: &Point3| q.value(x))).unwrap();
            for co in &ops.cells {
                let vl = co.gather(&v);
                for _ in 0..10 {
                    let w = nalgebra::DMatrix::from_fn(vl.nrows(), 3, |_, _| r.random_range(-1.0..1.0));
                    let s = (vl.transpose() * &co.stabilization * &w).trace();
                    worst = worst.max(s.abs() / w.norm());
                }
            }
        }
        assert!(worst < 1e-11, "{name}: {worst:e}");
    }
}

#[test]
fn face_gradient_normal_column_vanishes() {
    let mut r = rng(9);
    use rand::Rng;
    for (name, m) in families() {
        let fr = ddr_core::mesh::FractureNetwork::empty();
        let dm = build_dofmap(&m, &fr);
        let ops = Operators::build(&m, &dm).unwrap();
        let mut worst = 0.0f64;
        for (f, fo) in ops.faces.iter().enumerate() {
            let nbf = fo.potential.ncols();
            let vf = DVector::from_fn(nbf, |_, _| r.random_range(-1.0..1.0));
            let n = m.faces[f].normal;
            for x in &fo.rule.points {
                let phi = fo.basis1.values(x);
                let g = Point3::from_fn(|j, _| (0..3).map(|k| phi[k] * (fo.gradient[j].row(k) * &vf)[0]).sum());
                worst = worst.max(g.dot(&n).abs());
            }
        }
        assert!(worst < 1e-12, "{name}: {worst:e}");
    }
}

/// Solves the face gradient problem in the unscaled global monomials
/// `{1, x, y}` of a face lying in a plane `z = const`.
#[test]
fn face_gradient_matches_independent_assembly() {
    use rand::Rng;
    let (m, fr) = cube_mesh();
    let dm = build_dofmap(&m, &fr);
    let ops = Operators::build(&m, &dm).unwrap();
    let f = (0..m.num_faces()).find(|&f| m.faces[f].normal.z.abs() > 0.5).unwrap();
    let face = &m.faces[f];
    let fo = &ops.faces[f];
    let nb = 2 * face.vertices.len() + 1;
    let mut r = rng(21);
    let vf = DVector::from_fn(nb, |_, _| r.random_range(-1.0..1.0));
    let basis = |x: &Point3| [1.0, x.x, x.y];
    let rule = face_rule(&m, f, 6).unwrap();
    let mut gram = nalgebra::Matrix3::<f64>::zeros();
    for (x, w) in rule.iter() {
        let p = basis(x);
        for a in 0..3 {
            for b in 0..3 {
                gram[(a, b)] += w * p[a] * p[b];
            }
        }
    }
    let grads = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let k = face.vertices.len();
    for j in 0..2 {
        let mut rhs = nalgebra::Vector3::<f64>::zeros();
        for (x, w) in rule.iter() {
            let _ = x;
            for a in 0..3 {
                rhs[a] -= w * vf[2 * k] * grads[a][j];
            }
        }
        for i in 0..k {
            let e = face.edges[i];
            let (s0, s1) = (face.vertices[i], face.vertices[(i + 1) % k]);
            let n = m.face_edge_normal(f, i);
            for (x, w) in edge_rule(&m, e, 6).unwrap().iter() {
                let t = (x - m.vertices[s0]).norm() / m.edges[e].length;
                let (a, b, mm) = (vf[i], vf[(i + 1) % k], vf[k + i]);
                // Quadratic through the endpoint values with the prescribed mean.
                let val = a * (1.0 - t) + b * t + 6.0 * (mm - 0.5 * (a + b)) * t * (1.0 - t);
                let _ = s1;
                let p = basis(x);
                for c in 0..3 {
                    rhs[c] += w * n[j] * val * p[c];
                }
            }
        }
        let coef = gram.lu().solve(&rhs).unwrap();
        for x in &rule.points {
            let phi = fo.basis1.values(x);
            let ours: f64 = (0..3).map(|c| phi[c] * (fo.gradient[j].row(c) * &vf)[0]).sum();
            let p = basis(x);
            let oracle = coef[0] * p[0] + coef[1] * p[1] + coef[2] * p[2];
            assert!((ours - oracle).abs() < 1e-11, "{ours} vs {oracle}");
        }
    }
}

/// Cell gradient in the unscaled monomials `{1, x, y, z}` on the unit cube.
#[test]
fn cell_gradient_matches_independent_assembly() {
    use rand::Rng;
    let (m, fr) = cube_mesh();
    let dm = build_dofmap(&m, &fr);
    let ops = Operators::build(&m, &dm).unwrap();
    let co = &ops.cells[0];
    let mut r = rng(23);
    let vl = nalgebra::DMatrix::from_fn(co.num_blocks(), 3, |_, _| r.random_range(-1.0..1.0));
    let basis = |x: &Point3| [1.0, x.x, x.y, x.z];
    let rule = cell_rule(&m, 0, 6).unwrap();
    let mut gram = nalgebra::Matrix4::<f64>::zeros();
    for (x, w) in rule.iter() {
        let p = basis(x);
        for a in 0..4 {
            for b in 0..4 {
                gram[(a, b)] += w * p[a] * p[b];
            }
        }
    }
    let cell = &m.cells[0];
    for comp in 0..3 {
        for j in 0..3 {
            let mut rhs = nalgebra::Vector4::<f64>::zeros();
            // -v_K int d_j p: only the linear monomial in direction j contributes.
            rhs[1 + j] -= vl[(co.cell_local(), comp)] * cell.volume;
            for (i, &f) in cell.faces.iter().enumerate() {
                let n = cell.outward_normal(&m, i);
                let fo = &ops.faces[f];
                let coeffs = &co.face_potentials[i] * &vl;
                for (x, w) in face_rule(&m, f, 6).unwrap().iter() {
                    let phi = fo.basis2.values(x);
                    let val: f64 = (0..6).map(|a| phi[a] * coeffs[(a, comp)]).sum();
                    let p = basis(x);
                    for c in 0..4 {
                        rhs[c] += w * n[j] * val * p[c];
                    }
                }
            }
            let coef = gram.lu().solve(&rhs).unwrap();
            for x in &rule.points {
                let ours = co.gradient_at(&vl, x)[(comp, j)];
                let p = basis(x);
                let oracle: f64 = (0..4).map(|c| coef[c] * p[c]).sum();
                assert!((ours - oracle).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn cell_correction_of_cubic_on_unit_cube() {
    // On the unit cube x^3 is constant on the faces x = 0 and x = 1 and
    // tangential elsewhere, so the correction vanishes and the cell value
    // is the plain mean 1/4.
    let (m, fr) = cube_mesh();
    let dm = build_dofmap(&m, &fr);
    let ops = Operators::build(&m, &dm).unwrap();
    let v = interpolate(&m, &dm, &ops, &Continuous(|x: &Point3| Point3::new(x.x.powi(3), 0.0, 0.0))).unwrap();
    let b = dm.cell_block(0);
    assert!((v[3 * b] - 0.25).abs() < 1e-14);
    assert!(v[3 * b + 1].abs() < 1e-14 && v[3 * b + 2].abs() < 1e-14);

    // A field whose normal trace is not quadratic gets a nonzero correction;
    // check it against the defining face integrals.
    let u = |x: &Point3| Point3::new(x.y.powi(3) * x.x, 0.0, 0.0);
    let v = interpolate(&m, &dm, &ops, &Continuous(u)).unwrap();
    let co = &ops.cells[0];
    let vl = co.gather(&v);
    let cell = &m.cells[0];
    let mut corr = Point3::zeros();
    for (i, &f) in cell.faces.iter().enumerate() {
        let n = cell.outward_normal(&m, i);
        let fo = &ops.faces[f];
        let coeffs = &co.face_potentials[i] * &vl;
        for (x, w) in face_rule(&m, f, 8).unwrap().iter() {
            let phi = fo.basis2.values(x);
            let ups = Point3::from_fn(|k, _| (0..6).map(|a| phi[a] * coeffs[(a, k)]).sum());
            corr += (x - cell.barycenter) * (w * (u(x) - ups).dot(&n));
        }
    }
    let mean = cell_rule(&m, 0, 8).unwrap().integrate(|x| u(x).x);
    assert!(corr.norm() > 1e-3);
    assert!((v[3 * b] - (mean - corr.x)).abs() < 1e-13);
    assert!((v[3 * b + 1] + corr.y).abs() < 1e-13);
}

#[test]
fn operators_are_translation_invariant() {
    let (m, _) = hexacut_mesh();
    let shift = Point3::new(3.0, -2.0, 5.0);
    let moved = PolyMesh::from_parts(
        m.vertices.iter().map(|p| p + shift).collect(),
        m.faces.iter().map(|f| f.vertices.clone()).collect(),
        m.cells
            .iter()
            .map(|c| c.faces.iter().zip(&c.orientations).map(|(&f, &o)| (f, o > 0.0)).collect())
            .collect(),
    )
    .unwrap();
    let fr = ddr_core::mesh::FractureNetwork::empty();
    let a = Operators::build(&m, &build_dofmap(&m, &fr)).unwrap();
    let b = Operators::build(&moved, &build_dofmap(&moved, &fr)).unwrap();
    for (ca, cb) in a.cells.iter().zip(&b.cells) {
        let scale = ca.potential.amax();
        assert!((&ca.potential - &cb.potential).amax() < 1e-12 * scale.max(1.0));
        for j in 0..3 {
            assert!((&ca.gradient[j] - &cb.gradient[j]).amax() < 1e-12 * ca.gradient[j].amax().max(1.0));
        }
        assert!((&ca.stabilization - &cb.stabilization).amax() < 1e-12 * ca.stabilization.amax());
    }
}
