mod common;

use common::*;
use ddr_core::assembly::{apply_dirichlet, assemble, dirichlet_full, local_stiffness, MaterialParams};
use ddr_core::contact::{newton_solve, NewtonConfig};
use ddr_core::ddr::{build_dofmap, interpolate, Continuous, DofMap, Operators};
use ddr_core::linalg::Triplets;
use ddr_core::mesh::{
    build_cartesian, build_hexacut, build_tetrahedral, Axis, BoxDomain, FractureNetwork, FracturePlane, Point3,
    PolyMesh,
};
use ddr_core::poly::cell_rule;
use ddr_core::verification::{field_errors, Discretization};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

fn zero_load() -> Continuous<impl Fn(&Point3) -> Point3 + Sync> {
    Continuous(|_: &Point3| Point3::zeros())
}

fn setup(mesh: PolyMesh, fr: FractureNetwork) -> (PolyMesh, FractureNetwork, DofMap, Operators) {
    let dm = build_dofmap(&mesh, &fr);
    let ops = Operators::build(&mesh, &dm).unwrap();
    (mesh, fr, dm, ops)
}

fn x_plane() -> FracturePlane {
    FracturePlane::full(Axis::X, 0.0, 0.0)
}

#[test]
fn global_matrix_is_symmetric() {
    let (m, fr, dm, ops) = setup_fractured_hexacut();
    let p = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let sys = assemble(&m, &dm, &ops, &p, &fr, &zero_load()).unwrap();
    assert!(sys.a.asymmetry() <= 1e-12 * sys.a.max_abs());
    assert_eq!(sys.f.norm(), 0.0);
}

fn setup_fractured_hexacut() -> (PolyMesh, FractureNetwork, DofMap, Operators) {
    let (m, fr) = build_hexacut(2, BoxDomain::symmetric_unit(), &[x_plane()], 2, 0.2).unwrap();
    setup(m, fr)
}

#[test]
fn rigid_motions_per_side_have_zero_energy() {
    let (m, fr, dm, ops) = setup_fractured_hexacut();
    let p = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let sys = assemble(&m, &dm, &ops, &p, &fr, &zero_load()).unwrap();
    let a = Point3::new(0.3, -0.2, 0.5);
    let b = Point3::new(0.1, 0.4, -0.7);
    let one_side = |x: &Point3, side: &Point3| {
        if side.x < 0.0 {
            a + b.cross(x)
        } else {
            Point3::zeros()
        }
    };
    let v = interpolate(&m, &dm, &ops, &one_side).unwrap();
    let av = sys.a.mul_vec(&v);
    assert!(av.amax() < 1e-11 * sys.a.max_abs() * v.amax(), "{:e}", av.amax());
    // The same motion on both sides has no jump.
    let both = interpolate(&m, &dm, &ops, &Continuous(|x: &Point3| a + b.cross(x))).unwrap();
    assert!(sys.b.mul_vec(&both).amax() < 1e-13);
}

#[test]
fn local_kernel_is_the_rigid_motions() {
    let (m, fr) = cube_mesh();
    let (_, _, _, ops) = setup(m, fr);
    let p = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let k = local_stiffness(&ops.cells[0], &p);
    assert_eq!(k.nrows(), 3 * (8 + 12 + 6 + 1));
    let ev = SymmetricEigen::new(k).eigenvalues;
    let max = ev.amax();
    assert_eq!(ev.iter().filter(|l| l.abs() < 1e-10 * max).count(), 6);
}

#[test]
fn energy_of_interpolated_quadratics_is_exact() {
    let mut r = rng(4);
    for (m, _) in [cube_mesh(), tet_mesh(), hexacut_mesh()] {
        let (m, _, dm, ops) = setup(m, FractureNetwork::empty());
        let p = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
        let q = RandomPoly::new(&mut r, 2);
        let v = interpolate(&m, &dm, &ops, &Continuous(|x: &Point3| q.value(x))).unwrap();
        for co in &ops.cells {
            let vl = co.gather(&v);
            let flat = DVector::from_fn(vl.len(), |i, _| vl[(i / 3, i % 3)]);
            let k = local_stiffness(co, &p);
            let discrete = flat.dot(&(&k * &flat));
            let exact: f64 = cell_rule(&m, co.cell, 6)
                .unwrap()
                .iter()
                .map(|(x, w)| {
                    let g = q.gradient(x);
                    let eps = (g + g.transpose()) * 0.5;
                    w * p.stress(&g).component_mul(&eps).sum()
                })
                .sum();
            assert!((discrete - exact).abs() <= 1e-10 * exact.abs().max(1e-12), "{discrete} vs {exact}");
        }
    }
}

#[test]
fn constrained_matrix_is_positive_definite() {
    let (m, fr) = build_cartesian(2, unit_box(), &[]).unwrap();
    let (m, fr, dm, ops) = setup(m, fr);
    let p = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let sys = assemble(&m, &dm, &ops, &p, &fr, &zero_load()).unwrap();
    let red = apply_dirichlet(&sys, &dirichlet_full(&m, &dm, &zero_load()).unwrap());
    assert_eq!(red.num_free(), 81);
    let ev = SymmetricEigen::new(red.a.to_dense()).eigenvalues;
    assert!(ev.min() > 0.0, "{}", ev.min());
}

#[test]
fn coupling_rows_are_scaled_side_differences() {
    let (m, fr, dm, ops) = setup_fractured_hexacut();
    let p = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let sys = assemble(&m, &dm, &ops, &p, &fr, &zero_load()).unwrap();
    let mut r = rng(8);
    use rand::Rng;
    let v = DVector::from_fn(dm.num_dofs(), |_, _| r.random_range(-1.0..1.0));
    let bv = sys.b.mul_vec(&v);
    for (q, ff) in fr.faces.iter().enumerate() {
        let (pb, nb) = dm.fracture_blocks(ff.face).unwrap();
        for c in 0..3 {
            let want = m.faces[ff.face].area * (v[3 * pb + c] - v[3 * nb + c]);
            assert!((bv[3 * q + c] - want).abs() < 1e-14);
        }
        assert_eq!(sys.b.row(3 * q).count(), 2);
    }
}

#[test]
fn constant_boundary_data_is_reproduced() {
    let (m, fr) = build_tetrahedral(2, unit_box(), &[]).unwrap();
    let (m, fr, dm, ops) = setup(m, fr);
    let p = MaterialParams::from_young_poisson(1.0, 0.3).unwrap();
    let sys = assemble(&m, &dm, &ops, &p, &fr, &zero_load()).unwrap();
    let c = Point3::new(0.5, -1.5, 2.0);
    let red = apply_dirichlet(&sys, &dirichlet_full(&m, &dm, &Continuous(move |_: &Point3| c)).unwrap());
    let sol = newton_solve(&red, &NewtonConfig::default(), None).unwrap();
    assert_eq!(sol.iterations, 1);
    for b in 0..dm.num_blocks() {
        for k in 0..3 {
            assert!((sol.u[3 * b + k] - c[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn quadratic_patch_test() {
    let mut r = rng(12);
    for nu in [0.3, 0.49] {
        let p = MaterialParams::from_young_poisson(1.0, nu).unwrap();
        for (m, fr) in [build_cartesian(2, unit_box(), &[]).unwrap(), build_tetrahedral(2, unit_box(), &[]).unwrap()] {
            let d = Discretization::new(m, fr).unwrap();
            let q = ddr_core::verification::RandomPoly::new(&mut r, 2);
            let (g, l) = (p.shear, p.lame);
            let load = Continuous(|x: &Point3| q.body_force(x, g, l));
            let sys = assemble(&d.mesh, &d.dofmap, &d.ops, &p, &d.fracture, &load).unwrap();
            let data = dirichlet_full(&d.mesh, &d.dofmap, &Continuous(|x: &Point3| q.value(x))).unwrap();
            let sol = newton_solve(&apply_dirichlet(&sys, &data), &NewtonConfig::default(), None).unwrap();
            let (eu, eg) = field_errors(&d, &sol.u, |x| q.value(x), |x| q.gradient(x)).unwrap();
            assert!(eu <= 1e-9 && eg <= 1e-9, "nu {nu}: {eu:e} {eg:e}");
            let interp = interpolate(&d.mesh, &d.dofmap, &d.ops, &Continuous(|x: &Point3| q.value(x))).unwrap();
            assert!((&sol.u - &interp).amax() < 1e-10);
        }
    }
}

/// Gram matrix of `|G_K v|^2 + S_K(v, v)` summed over cells.
fn norm_gram(dm: &DofMap, ops: &Operators) -> DMatrix<f64> {
    let mut t = Triplets::new(dm.num_dofs(), dm.num_dofs());
    for co in &ops.cells {
        let mut qsum = DMatrix::zeros(co.num_blocks(), co.num_blocks());
        for j in 0..3 {
            qsum += co.gradient[j].transpose() * &co.mass1 * &co.gradient[j];
        }
        qsum += &co.stabilization;
        for (a, &ga) in co.blocks.iter().enumerate() {
            for (b, &gb) in co.blocks.iter().enumerate() {
                for k in 0..3 {
                    t.push(3 * ga + k, 3 * gb + k, qsum[(a, b)]);
                }
            }
        }
    }
    t.to_csr().to_dense()
}

fn korn_constant(mesh: PolyMesh, fr: FractureNetwork) -> f64 {
    let (m, fr, dm, ops) = setup(mesh, fr);
    let p = MaterialParams::from_lame(0.5, 0.0).unwrap().with_mu1(1.0).unwrap();
    let sys = assemble(&m, &dm, &ops, &p, &fr, &zero_load()).unwrap();
    let red = apply_dirichlet(&sys, &dirichlet_full(&m, &dm, &zero_load()).unwrap());
    let gram = norm_gram(&dm, &ops).select_rows(&red.free).select_columns(&red.free);
    let chol = gram.cholesky().expect("norm Gram is SPD on free DOFs");
    let l_inv = chol.l().try_inverse().unwrap();
    let sym = &l_inv * red.a.to_dense() * l_inv.transpose();
    SymmetricEigen::new((&sym + sym.transpose()) * 0.5).eigenvalues.min()
}

#[test]
fn discrete_korn_constant_is_stable_under_refinement() {
    let plane = FracturePlane::full(Axis::X, 0.5, 0.0);
    let (m2, f2) = build_cartesian(2, unit_box(), &[plane.clone()]).unwrap();
    let (m4, f4) = build_cartesian(4, unit_box(), &[plane.clone()]).unwrap();
    let (c2, c4) = (korn_constant(m2, f2), korn_constant(m4, f4));
    assert!(c2 > 0.0 && c4 > 0.0 && c4 > 0.5 * c2, "{c2} {c4}");
    let (mt, ft) = build_tetrahedral(2, unit_box(), &[plane]).unwrap();
    assert!(korn_constant(mt, ft) > 0.0);
}
