use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the zero functional is not admissible")]
    ZeroFunctional,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("quadrature would need {nodes} nodes, above the cap of {cap}")]
    TooManyNodes { nodes: usize, cap: usize },

    #[error("degree overflow: polynomial of degree {degree} does not fit a space of degree {max}")]
    DegreeOverflow { degree: u32, max: u32 },

    #[error("numerical rank loss (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("kernel is zero at this truncation")]
    KernelZero,

    #[error("constraints are infeasible in the truncated space: {0}")]
    Infeasible(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
