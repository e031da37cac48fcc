mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ddr_core::assembly::MaterialParams;
use ddr_core::contact::{ContactSolution, NewtonConfig};
use ddr_core::ddr::{build_dofmap, OperatorOptions};
use ddr_core::mesh::{write_polymesh, BoxDomain, FracturePlane};
use ddr_core::verification::{
    case_by_name, compute_errors, convergence_study, run_checks, solve_case, CheckOptions, CheckStatus, CrossDemo,
    Discretization, ErrorReport, LevelResult, ManufacturedCase, MeshFamily,
};
use ddr_core::Error;

use config::{ConfigError, RunFlags, Settings};

#[derive(Parser)]
#[command(name = "ddr", version, about = "DDR elasticity with Tresca contact on fracture networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single solve of a manufactured case or the crossing-fracture demo
    Run(RunFlags),
    /// Error table over a list of levels
    Convergence(RunFlags),
    /// Operator self-checks on built-in cells
    Checks {
        /// Overrides each check's default tolerance
        #[arg(long)]
        tolerance: Option<f64>,
        /// Debug: weight of the face potential in the stabilization (1 is consistent)
        #[arg(long, default_value_t = 1.0)]
        stab_face_weight: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Prints mesh counts and h for a case geometry
    MeshInfo(RunFlags),
    /// Writes the mesh of a case geometry in POLYMESH format
    ExportMesh(RunFlags),
}

/// Exit code 1 for bad input, 2 when the solve itself fails.
enum Failure {
    Config(String),
    Solver(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NewtonNotConverged { .. }
            | Error::SingularJacobian { .. }
            | Error::Factorization(_)
            | Error::NotConverged
            | Error::SingularSystem { .. } => Failure::Solver(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("I/O error: {e}"))
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Run(f) => run(&f),
        Command::Convergence(f) => convergence(&f),
        Command::Checks {
            tolerance,
            stab_face_weight,
            seed,
        } => checks(tolerance, stab_face_weight, seed),
        Command::MeshInfo(f) => mesh_info(&f),
        Command::ExportMesh(f) => export_mesh(&f),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(2)
        }
    }
}

/// `DDR_THREADS` caps the worker pool used by assembly.
fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DDR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("DDR_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn family(s: &Settings) -> Result<MeshFamily, Failure> {
    let f = MeshFamily::parse(&s.family, s.seed, s.perturbation)
        .ok_or_else(|| Failure::Config(format!("unknown mesh family '{}'", s.family)))?;
    if let MeshFamily::Hexacut { seed, magnitude } = f {
        eprintln!("hexacut seed {seed}, perturbation {magnitude}");
    }
    Ok(f)
}

fn newton_config(s: &Settings) -> Result<NewtonConfig, Failure> {
    let c = NewtonConfig {
        rel_tol: s.rel_tol,
        abs_tol: s.abs_tol,
        max_iter: s.max_iter,
        beta_n: s.beta_n,
        beta_t: s.beta_t,
    };
    c.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(c)
}

fn single_lame(s: &Settings) -> Result<Option<f64>, Failure> {
    match s.lame.as_slice() {
        [] => Ok(None),
        [l] => Ok(Some(*l)),
        _ => Err(Failure::Config("a list of Lame values is only accepted by convergence".into())),
    }
}

/// Material from `(E, nu)` or `(G, L)` overrides, starting from `base`.
fn material(s: &Settings, base: &MaterialParams, lame: Option<f64>) -> Result<MaterialParams, Failure> {
    Ok(match (s.young, s.poisson) {
        (Some(e), Some(nu)) => MaterialParams::from_young_poisson(e, nu)?,
        (None, None) => MaterialParams::from_lame(s.shear.unwrap_or(base.shear), lame.unwrap_or(base.lame))?,
        _ => return Err(Failure::Config("young and poisson must be given together".into())),
    })
}

fn manufactured(s: &Settings, lame: Option<f64>) -> Result<ManufacturedCase, Failure> {
    let l = if s.case == "incompressible" { lame.unwrap_or(1.0) } else { 1.0 };
    let mut case = case_by_name(&s.case, l)
        .ok_or_else(|| Failure::Config(format!("unknown case '{}'", s.case)))??;
    let material_lame = if s.case == "incompressible" { None } else { lame };
    if s.young.is_some() || s.poisson.is_some() || s.shear.is_some() || material_lame.is_some() {
        case.material = material(s, &case.material, material_lame)?;
    }
    if let Some(g) = s.threshold {
        case.threshold = g;
    }
    Ok(case)
}

fn demo(s: &Settings) -> Result<CrossDemo, Failure> {
    let mut d = CrossDemo {
        family: family(s)?,
        ..CrossDemo::default()
    };
    if let Some(n) = s.n {
        d.n = n;
    }
    let lame = single_lame(s)?;
    if s.young.is_some() || s.poisson.is_some() || s.shear.is_some() || lame.is_some() {
        d.material = material(s, &d.material, lame)?;
    }
    if let Some(g) = s.threshold {
        d.threshold = g;
    }
    if let Some(b) = s.beta_n.or(s.beta_t) {
        d.beta = b;
    }
    Ok(d)
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_states(path: &Path, disc: &Discretization, sol: &ContactSolution) -> Result<(), Failure> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "fracture_face,face,x,y,z,state,lambda_x,lambda_y,lambda_z")?;
    for (q, ff) in disc.fracture.faces.iter().enumerate() {
        let b = disc.mesh.faces[ff.face].barycenter;
        let l = sol.multiplier(q);
        writeln!(
            out,
            "{q},{},{:.11e},{:.11e},{:.11e},{},{:.11e},{:.11e},{:.11e}",
            ff.face,
            b.x,
            b.y,
            b.z,
            sol.states[q].code(),
            l.x,
            l.y,
            l.z
        )?;
    }
    out.flush()?;
    Ok(())
}

fn print_summary(disc: &Discretization, sol: &ContactSolution) {
    let h = sol.state_histogram();
    println!(
        "mesh: {} cells, {} DOFs, {} fracture faces, h = {:.6e}",
        disc.mesh.num_cells(),
        disc.dofmap.num_dofs(),
        disc.fracture.len(),
        disc.mesh.h()
    );
    println!(
        "newton: {} iterations, final residual {:.3e}",
        sol.iterations,
        sol.history.last().copied().unwrap_or(0.0)
    );
    println!("states open-stick/contact-stick/open-slip/contact-slip: {}/{}/{}/{}", h[0], h[1], h[2], h[3]);
}

fn run(flags: &RunFlags) -> Outcome {
    let s = flags.resolve()?;
    let config = newton_config(&s)?;
    if s.case == "demo" {
        let d = demo(&s)?;
        let out = d.run(&config)?;
        println!("case demo, family {}, n {}", d.family, d.n);
        print_summary(&out.disc, &out.solution);
        println!(
            "admissibility {:.3e}, complementarity {:.3e} (relative to g)",
            out.admissibility, out.complementarity
        );
        if let Some(p) = &s.states_out {
            write_states(p, &out.disc, &out.solution)?;
        }
        return Ok(ExitCode::SUCCESS);
    }
    let case = manufactured(&s, single_lame(&s)?)?;
    let fam = family(&s)?;
    let n = s.n.unwrap_or(2);
    let (disc, _, sol) = solve_case(&case, fam, n, &config)?;
    let errors = compute_errors(&case, &disc, &sol)?;
    println!("case {}, family {fam}, n {n}", case.name);
    print_summary(&disc, &sol);
    println!(
        "errors: e_u {:.6e}, e_jump {:.6e}, e_grad {:.6e}, e_lambda_n {:.6e}",
        errors.e_u, errors.e_jump, errors.e_grad, errors.e_lambda_n
    );
    let report = ErrorReport {
        case: case.name.clone(),
        family: fam.name().into(),
        rows: vec![LevelResult {
            level: 0,
            n,
            h: disc.mesh.h(),
            n_cells: disc.mesh.num_cells(),
            n_dofs: disc.dofmap.num_dofs(),
            newton_iters: sol.iterations,
            errors,
            failure: None,
        }],
    };
    if let Some(p) = &s.out {
        let mut out = open_out(&Some(p.clone()))?;
        report.write_csv(&mut out, true)?;
        out.flush()?;
    }
    if let Some(p) = &s.states_out {
        write_states(p, &disc, &sol)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn convergence(flags: &RunFlags) -> Outcome {
    let s = flags.resolve()?;
    if s.levels.is_empty() {
        return Err(Failure::Config("convergence needs a non-empty level list (--levels)".into()));
    }
    if s.case == "demo" {
        return Err(Failure::Config("the demo has no exact solution to converge to".into()));
    }
    let config = newton_config(&s)?;
    let fam = family(&s)?;
    let sweep: Vec<Option<f64>> = if s.lame.is_empty() { vec![None] } else { s.lame.iter().map(|&l| Some(l)).collect() };
    let mut out = open_out(&s.out)?;
    let mut failed = false;
    for (i, lame) in sweep.iter().enumerate() {
        let case = manufactured(&s, *lame)?;
        let mut report = convergence_study(&case, fam, &s.levels, &config)?;
        if sweep.len() > 1 {
            report.case = format!("{}_L{:e}", case.name, lame.unwrap_or(1.0));
        }
        for r in &report.rows {
            if let Some(msg) = &r.failure {
                eprintln!("{} level {} (n = {}) failed: {msg}", report.case, r.level, r.n);
            }
        }
        failed |= report.any_failed();
        report.write_csv(&mut out, i == 0)?;
    }
    out.flush()?;
    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn checks(tolerance: Option<f64>, weight: f64, seed: u64) -> Outcome {
    if tolerance.is_some_and(|t| t <= 0.0) {
        return Err(Failure::Config("tolerance must be positive".into()));
    }
    eprintln!("seed {seed}");
    let opts = CheckOptions {
        tolerance,
        operators: OperatorOptions { face_trace_weight: weight },
        seed,
    };
    let results = run_checks(&opts);
    println!("{:<28} {:>12} {:>12}  status", "check", "error", "tolerance");
    for r in &results {
        println!("{:<28} {:>12.3e} {:>12.1e}  {}", r.name, r.error, r.tolerance, r.status);
    }
    let all_pass = results.iter().all(|r| r.status == CheckStatus::Pass);
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

/// Mesh and fracture network of a case geometry. `--case none` gives the
/// unfractured symmetric cube.
fn geometry(s: &Settings) -> Result<(MeshFamily, usize, BoxDomain, Vec<FracturePlane>), Failure> {
    let fam = family(s)?;
    let n = s.n.unwrap_or(2);
    Ok(match s.case.as_str() {
        "none" => (fam, n, BoxDomain::symmetric_unit(), Vec::new()),
        "demo" => {
            let d = demo(s)?;
            (fam, s.n.unwrap_or(d.n), BoxDomain::new([0.0; 3], [1.0; 3]), d.planes())
        }
        _ => {
            let case = manufactured(s, None)?;
            (fam, n, case.domain, case.fracture_planes())
        }
    })
}

fn mesh_info(flags: &RunFlags) -> Outcome {
    let s = flags.resolve()?;
    let (fam, n, domain, planes) = geometry(&s)?;
    let (mesh, fracture) = fam.build(n, domain, &planes)?;
    let dofmap = build_dofmap(&mesh, &fracture);
    println!("family {fam}, n {n}");
    println!("vertices {}", mesh.num_vertices());
    println!("edges {}", mesh.num_edges());
    println!("faces {}", mesh.num_faces());
    println!("cells {}", mesh.num_cells());
    println!("fracture faces {}", fracture.len());
    println!("dofs {}", dofmap.num_dofs());
    println!("h {:.12e}", mesh.h());
    Ok(ExitCode::SUCCESS)
}

fn export_mesh(flags: &RunFlags) -> Outcome {
    let s = flags.resolve()?;
    let (fam, n, domain, planes) = geometry(&s)?;
    let (mesh, fracture) = fam.build(n, domain, &planes)?;
    let mut out = open_out(&s.out)?;
    write_polymesh(&mut out, &mesh, &fracture)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}
