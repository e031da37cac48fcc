use std::fs;
use std::process::{Command, Output};

fn ddr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddr"))
        .args(args)
        .env_remove("DDR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_summary_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("row.csv");
    let states = dir.path().join("states.csv");
    let o = ddr(&[
        "run",
        "--case",
        "frictionless",
        "--n",
        "2",
        "--out",
        csv.to_str().unwrap(),
        "--states-out",
        states.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("newton:") && text.contains("states") && text.contains("e_lambda_n"));
    let rows = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("case,family,level"));
    assert!(lines[1].starts_with("frictionless,cartesian,0,2,"));
    assert_eq!(fs::read_to_string(&states).unwrap().lines().count(), 5);
}

#[test]
fn penalty_does_not_change_the_errors() {
    let dir = tempfile::tempdir().unwrap();
    let errors = |beta: &str| {
        let path = dir.path().join(format!("b{beta}.csv"));
        let o = ddr(&["run", "--case", "tresca", "--n", "2", "--beta", beta, "--out", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let text = fs::read_to_string(path).unwrap();
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').skip(8).take(4).map(|s| s.parse().unwrap()).collect();
        row
    };
    let (a, b) = (errors("1e3"), errors("1e6"));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-8 * x.abs(), "{x} {y}");
    }
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    let csv = dir.path().join("out.csv");
    fs::write(
        &cfg,
        format!(
            "# locking sweep\n[case]\nname = incompressible\n[mesh]\nlevels = 2\nfamily = tetrahedral\n[material]\nlame = 1, 1e4\n[output]\ncsv = {}\n",
            csv.display()
        ),
    )
    .unwrap();
    let o = ddr(&["convergence", "--config", cfg.to_str().unwrap(), "--family", "cartesian"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("incompressible_L1e0,cartesian,0,2,"));
    assert!(lines[2].starts_with("incompressible_L1e4,cartesian,0,2,"));
}

#[test]
fn convergence_output_is_deterministic() {
    let args = ["convergence", "--case", "tresca", "--family", "hexacut", "--seed", "7", "--levels", "2"];
    let (a, b) = (ddr(&args), ddr(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "mesh.colour = red\n").unwrap();
    assert_eq!(ddr(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(ddr(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(ddr(&["run", "--case", "unknown"]).status.code(), Some(1));
    assert_eq!(ddr(&["run", "--family", "voronoi"]).status.code(), Some(1));
    assert_eq!(ddr(&["convergence", "--case", "tresca"]).status.code(), Some(1));
    // n = 3 cannot resolve the fracture plane x = 0.
    assert_eq!(ddr(&["run", "--case", "tresca", "--n", "3"]).status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_ddr"))
        .args(["checks"])
        .env("DDR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solver_failure_exits_with_two() {
    let o = ddr(&["run", "--case", "tresca", "--n", "2", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn failed_level_is_kept_in_the_table() {
    let o = ddr(&["convergence", "--case", "frictionless", "--levels", "3,2"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("nan") && !lines[2].contains("nan"));
}

#[test]
fn checks_pass_and_detect_a_seeded_fault() {
    let o = ddr(&["checks"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("fail"));
    let o = ddr(&["checks", "--stab-face-weight", "0.5"]);
    assert_ne!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("stabilization_consistency")).unwrap();
    assert!(line.ends_with("fail"));
    let o = ddr(&["checks", "--tolerance", "1e-15"]);
    assert!(stdout(&o).contains("marginal"));
}

#[test]
fn mesh_info_and_export() {
    let o = ddr(&["mesh-info", "--case", "tresca", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("cells 8") && text.contains("fracture faces 4"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.polymesh");
    let o = ddr(&["export-mesh", "--case", "demo", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (mesh, fracture) = ddr_core::mesh::read_polymesh(fs::read_to_string(&path).unwrap().as_bytes()).unwrap();
    assert_eq!((mesh.num_cells(), fracture.len()), (64, 16));
}

#[test]
fn thread_cap_gives_identical_results() {
    let args = ["run", "--case", "tresca", "--n", "2"];
    let one = Command::new(env!("CARGO_BIN_EXE_ddr")).args(args).env("DDR_THREADS", "1").output().unwrap();
    let many = ddr(&args);
    assert_eq!(one.stdout, many.stdout);
}
