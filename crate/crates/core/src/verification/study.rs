use std::fmt;
use std::io::Write;

use super::cases::ManufacturedCase;
use super::errors::{compute_errors, ErrorRow};
use crate::assembly::{apply_dirichlet, assemble, dirichlet_full, ReducedSystem};
use crate::contact::{newton_solve, ContactSolution, NewtonConfig};
use crate::ddr::{build_dofmap, DofMap, OperatorOptions, Operators};
use crate::error::{Error, Result};
use crate::mesh::{build_cartesian, build_hexacut, build_tetrahedral, BoxDomain, FractureNetwork, FracturePlane, PolyMesh};

/// Mesh, fracture network, DOF numbering and local operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: PolyMesh,
    pub fracture: FractureNetwork,
    pub dofmap: DofMap,
    pub ops: Operators,
}

impl Discretization {
    pub fn new(mesh: PolyMesh, fracture: FractureNetwork) -> Result<Self> {
        Self::with_options(mesh, fracture, OperatorOptions::default())
    }

    pub fn with_options(mesh: PolyMesh, fracture: FractureNetwork, options: OperatorOptions) -> Result<Self> {
        let dofmap = build_dofmap(&mesh, &fracture);
        let ops = Operators::build_with(&mesh, &dofmap, options)?;
        Ok(Self {
            mesh,
            fracture,
            dofmap,
            ops,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshFamily {
    Cartesian,
    Tetrahedral,
    Hexacut { seed: u64, magnitude: f64 },
}

pub const DEFAULT_HEXACUT_MAGNITUDE: f64 = 0.125;

impl MeshFamily {
    pub fn parse(name: &str, seed: u64, magnitude: f64) -> Option<Self> {
        match name {
            "cartesian" => Some(Self::Cartesian),
            "tetrahedral" => Some(Self::Tetrahedral),
            "hexacut" => Some(Self::Hexacut { seed, magnitude }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cartesian => "cartesian",
            Self::Tetrahedral => "tetrahedral",
            Self::Hexacut { .. } => "hexacut",
        }
    }

    pub fn build(&self, n: usize, domain: BoxDomain, planes: &[FracturePlane]) -> Result<(PolyMesh, FractureNetwork)> {
        match *self {
            Self::Cartesian => build_cartesian(n, domain, planes),
            Self::Tetrahedral => build_tetrahedral(n, domain, planes),
            Self::Hexacut { seed, magnitude } => build_hexacut(n, domain, planes, seed, magnitude),
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full pipeline for a manufactured case: mesh, assembly with Dirichlet
/// data from the exact solution, and the contact solve.
pub fn solve_case(
    case: &ManufacturedCase,
    family: MeshFamily,
    n: usize,
    config: &NewtonConfig,
) -> Result<(Discretization, ReducedSystem, ContactSolution)> {
    let (mesh, fracture) = family.build(n, case.domain, &case.fracture_planes())?;
    let disc = Discretization::new(mesh, fracture)?;
    let sys = assemble(
        &disc.mesh,
        &disc.dofmap,
        &disc.ops,
        &case.material,
        &disc.fracture,
        &case.body_force_field(),
    )?;
    let data = dirichlet_full(&disc.mesh, &disc.dofmap, &case.displacement_field())?;
    let reduced = apply_dirichlet(&sys, &data);
    let sol = newton_solve(&reduced, config, None)?;
    Ok((disc, reduced, sol))
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub n_cells: usize,
    pub n_dofs: usize,
    pub newton_iters: usize,
    pub errors: ErrorRow,
    pub failure: Option<String>,
}

pub fn run_level(
    case: &ManufacturedCase,
    family: MeshFamily,
    level: usize,
    n: usize,
    config: &NewtonConfig,
) -> Result<LevelResult> {
    let (disc, _, sol) = solve_case(case, family, n, config)?;
    let errors = compute_errors(case, &disc, &sol)?;
    Ok(LevelResult {
        level,
        n,
        h: disc.mesh.h(),
        n_cells: disc.mesh.num_cells(),
        n_dofs: disc.dofmap.num_dofs(),
        newton_iters: sol.iterations,
        errors,
        failure: None,
    })
}

/// Observed order between two levels.
pub fn observed_order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub case: String,
    pub family: String,
    pub rows: Vec<LevelResult>,
}

pub const CSV_HEADER: &str =
    "case,family,level,n,h,n_cells,n_dofs,newton_iters,e_u,e_jump,e_grad,e_lambda_n,ord_u,ord_jump,ord_grad,ord_lambda_n";

fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "nan".into()
    }
}

impl ErrorReport {
    /// Orders of the four error measures between row `i - 1` and row `i`.
    pub fn orders(&self, i: usize) -> Option<[f64; 4]> {
        if i == 0 || i >= self.rows.len() {
            return None;
        }
        let (a, b) = (&self.rows[i - 1], &self.rows[i]);
        if a.failure.is_some() || b.failure.is_some() {
            return None;
        }
        let (ea, eb) = (a.errors.as_array(), b.errors.as_array());
        Some(std::array::from_fn(|k| observed_order(ea[k], eb[k], a.h, b.h)))
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.failure.is_some())
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> Result<()> {
        if header {
            writeln!(out, "{CSV_HEADER}")?;
        }
        for (i, r) in self.rows.iter().enumerate() {
            let e = if r.failure.is_some() { [f64::NAN; 4] } else { r.errors.as_array() };
            let ord = match self.orders(i) {
                Some(o) => o.map(fmt12),
                None => std::array::from_fn(|_| String::new()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.case,
                self.family,
                r.level,
                r.n,
                fmt12(r.h),
                r.n_cells,
                r.n_dofs,
                r.newton_iters,
                fmt12(e[0]),
                fmt12(e[1]),
                fmt12(e[2]),
                fmt12(e[3]),
                ord[0],
                ord[1],
                ord[2],
                ord[3]
            )?;
        }
        Ok(())
    }
}

/// Runs the case on each level in turn. A failed level is recorded and the
/// remaining levels still run.
pub fn convergence_study(
    case: &ManufacturedCase,
    family: MeshFamily,
    levels: &[usize],
    config: &NewtonConfig,
) -> Result<ErrorReport> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("a convergence study needs at least one level".into()));
    }
    let rows = levels
        .iter()
        .enumerate()
        .map(|(level, &n)| {
            run_level(case, family, level, n, config).unwrap_or_else(|e| LevelResult {
                level,
                n,
                h: f64::NAN,
                n_cells: 0,
                n_dofs: 0,
                newton_iters: 0,
                errors: ErrorRow::default(),
                failure: Some(e.to_string()),
            })
        })
        .collect();
    Ok(ErrorReport {
        case: case.name.clone(),
        family: family.name().into(),
        rows,
    })
}
