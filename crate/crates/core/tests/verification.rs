mod common;

use common::rng;
use ddr_core::contact::NewtonConfig;
use ddr_core::ddr::OperatorOptions;
use ddr_core::mesh::Point3;
use ddr_core::verification::{
    case_by_name, case_frictionless, case_incompressible, case_tresca, check_names, convergence_study,
    observed_order, run_checks, CheckOptions, CheckStatus, CrossDemo, ManufacturedCase, MeshFamily, CSV_HEADER,
};
use nalgebra::Matrix3;
use rand::Rng;

fn all_cases() -> Vec<ManufacturedCase> {
    vec![
        case_frictionless().unwrap(),
        case_tresca().unwrap(),
        case_incompressible(1.0).unwrap(),
        case_incompressible(1e4).unwrap(),
    ]
}

fn fracture_points(n: usize, seed: u64) -> Vec<Point3> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| Point3::new(0.0, r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect()
}

#[test]
fn lookup_by_name() {
    assert_eq!(case_by_name("tresca", 1.0).unwrap().unwrap().name, "tresca");
    assert_eq!(case_by_name("incompressible", 1e6).unwrap().unwrap().material.lame, 1e6);
    assert!(case_by_name("bogus", 1.0).is_none());
}

#[test]
fn tractions_balance_across_the_fracture() {
    for case in all_cases() {
        for x in fracture_points(50, 1) {
            let scale = case.multiplier(&x).norm().max(1.0);
            assert!(case.traction_imbalance(&x).norm() <= 1e-10 * scale, "{} at {x:?}", case.name);
        }
    }
}

/// Checked on the traction `T = -lambda`: `T_n <= 0`, `[u]_n <= 0`,
/// `T_n [u]_n = 0`, `|T_t| <= g` and `T_t . [u]_t + g |[u]_t| = 0`.
#[test]
fn exact_solutions_satisfy_the_contact_law() {
    let n = Point3::x();
    for case in all_cases() {
        let g = case.threshold;
        for x in fracture_points(50, 2) {
            let t = -case.multiplier(&x);
            let j = case.jump(&x);
            let (tn, jn) = (t.dot(&n), j.dot(&n));
            let (tt, jt) = (t - n * tn, j - n * jn);
            assert!(tn <= 1e-10 && jn <= 1e-10, "{}: {tn} {jn}", case.name);
            assert!((tn * jn).abs() <= 1e-10);
            assert!(tt.norm() <= g + 1e-10, "{}: |T_t| = {}", case.name, tt.norm());
            assert!(tt.dot(&jt) + g * jt.norm() <= 1e-9);
        }
    }
}

#[test]
fn body_force_matches_finite_difference_divergence() {
    let eps = 1e-4;
    let mut r = rng(3);
    for case in all_cases() {
        for _ in 0..20 {
            let x = Point3::new(r.random_range(-0.9..0.9), r.random_range(-0.9..0.9), r.random_range(-0.9..0.9));
            if x.x.abs() < 2.0 * eps || x.z.abs() < 2.0 * eps {
                continue;
            }
            let mut div = Point3::zeros();
            for k in 0..3 {
                let mut d = Point3::zeros();
                d[k] = eps;
                let ds: Matrix3<f64> = (case.stress(&(x + d), &x) - case.stress(&(x - d), &x)) / (2.0 * eps);
                div += ds.column(k);
            }
            let f = case.body_force(&x, &x);
            let scale = f.norm().max(case.material.lame.max(1.0));
            assert!((f + div).norm() <= 1e-7 * scale, "{}: {:e}", case.name, (f + div).norm());
        }
    }
}

#[test]
fn frictionless_normal_jump_is_quartic() {
    let case = case_frictionless().unwrap();
    for x in fracture_points(30, 4) {
        let want = -x.z.min(0.0).powi(4);
        assert!((case.jump(&x).x - want).abs() < 1e-14);
    }
}

#[test]
fn tresca_tangential_multiplier_hits_the_bound_below() {
    let case = case_tresca().unwrap();
    for x in fracture_points(30, 5) {
        let l = case.multiplier(&x);
        let t = (l.y * l.y + l.z * l.z).sqrt();
        if x.z < 0.0 {
            assert!((t - case.threshold).abs() < 1e-12, "{t}");
        }
    }
}

#[test]
fn convergence_csv_layout() {
    let case = case_frictionless().unwrap();
    let report = convergence_study(&case, MeshFamily::Cartesian, &[2, 4], &NewtonConfig::default()).unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf, true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], CSV_HEADER);
    let first: Vec<&str> = lines[1].split(',').collect();
    let second: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(first.len(), 16);
    assert_eq!(&first[..4], &["frictionless", "cartesian", "0", "2"]);
    assert!(first[12..].iter().all(|s| s.is_empty()));
    // Twelve significant digits in scientific notation.
    assert!(first[8].contains('e') && first[8].split('e').next().unwrap().len() == 13);
    let num = |s: &str| s.parse::<f64>().unwrap();
    let ord = observed_order(num(first[8]), num(second[8]), num(first[4]), num(second[4]));
    assert!((num(second[12]) - ord).abs() < 1e-9);
    assert!(!report.any_failed());
}

#[test]
fn failing_level_is_recorded_and_the_rest_still_run() {
    let case = case_frictionless().unwrap();
    // n = 3 cannot align a cell face with x = 0.
    let report = convergence_study(&case, MeshFamily::Cartesian, &[3, 2], &NewtonConfig::default()).unwrap();
    assert!(report.rows[0].failure.is_some());
    assert!(report.rows[1].failure.is_none());
    let mut buf = Vec::new();
    report.write_csv(&mut buf, false).unwrap();
    assert!(String::from_utf8(buf).unwrap().lines().next().unwrap().contains("nan"));
    assert!(convergence_study(&case, MeshFamily::Cartesian, &[], &NewtonConfig::default()).is_err());
}

#[test]
fn self_checks_pass_by_default() {
    let results = run_checks(&CheckOptions::default());
    assert_eq!(results.len(), check_names().len());
    for r in &results {
        assert_eq!(r.status, CheckStatus::Pass, "{} {:e}", r.name, r.error);
    }
}

#[test]
fn tight_tolerance_reports_marginal() {
    let opts = CheckOptions {
        tolerance: Some(1e-15),
        ..CheckOptions::default()
    };
    let results = run_checks(&opts);
    assert!(results.iter().all(|r| r.status != CheckStatus::Fail));
    assert!(results.iter().any(|r| r.status == CheckStatus::Marginal));
}

#[test]
fn broken_stabilization_is_detected() {
    let opts = CheckOptions {
        operators: OperatorOptions { face_trace_weight: 0.5 },
        ..CheckOptions::default()
    };
    let failed: Vec<_> = run_checks(&opts)
        .into_iter()
        .filter(|r| r.status == CheckStatus::Fail)
        .map(|r| r.name)
        .collect();
    assert!(failed.contains(&"stabilization_consistency"), "{failed:?}");
    assert!(failed.contains(&"quadratic_patch_test"), "{failed:?}");
}

#[test]
fn crossing_fracture_demo() {
    let demo = CrossDemo::default();
    let out = demo.run(&NewtonConfig::default()).unwrap();
    assert_eq!(out.histogram.iter().sum::<usize>(), out.disc.fracture.len());
    assert_eq!(out.disc.fracture.len(), 2 * 4 * 2);
    assert!(out.solution.converged);
    assert!(out.admissibility <= 1e-8);
    assert!(out.complementarity <= 1e-8);
    let bad = CrossDemo { n: 6, ..CrossDemo::default() };
    assert!(bad.run(&NewtonConfig::default()).is_err());
}
