//! Manufactured solutions, error measures and convergence studies.

mod cases;
mod checks;
mod demo;
mod errors;
mod study;

pub use cases::{case_by_name, case_frictionless, case_incompressible, case_tresca, fracture_normal, ManufacturedCase};
pub use checks::{check_names, field_errors, run_checks, CheckOptions, CheckResult, CheckStatus, RandomPoly};
pub use demo::{CrossDemo, DemoOutcome};
pub use errors::{compute_errors, ErrorRow, ERROR_QUAD_ORDER};
pub use study::{
    convergence_study, observed_order, run_level, solve_case, Discretization, ErrorReport, LevelResult, MeshFamily,
    CSV_HEADER, DEFAULT_HEXACUT_MAGNITUDE,
};
