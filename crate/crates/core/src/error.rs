use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fracture plane is not compliant with the mesh: {0}")]
    NonCompliantFracture(String),

    #[error("degenerate cell {cell}: {reason}")]
    DegenerateCell { cell: usize, reason: String },

    #[error("{entity} is not star-shaped with respect to its barycenter")]
    NotStarShaped { entity: String },

    #[error("singular local system in {context}")]
    SingularSystem { context: String },

    #[error("face {0} is not a fracture face")]
    NotFractureFace(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unresolved degree of freedom for {0}")]
    UnresolvedDof(String),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("singular semi-smooth Jacobian (active set: {active_set})")]
    SingularJacobian { active_set: String },

    #[error("Newton did not converge after {iterations} iterations (last residual {last:.3e})")]
    NewtonNotConverged {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("solution has not converged; refusing to compute errors")]
    NotConverged,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
