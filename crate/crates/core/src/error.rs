use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("box side {side} is not an odd multiple of the lattice period {period}")]
    IncommensurateBox { side: f64, period: usize },

    #[error("Delone construction infeasible: {0}")]
    DeloneInfeasible(String),

    #[error("point set is not Delone: cell {cell:?} is empty")]
    NotDelone { cell: Vec<i64> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry violation: {0}")]
    GeometryViolation(String),

    #[error("ball radius {0} exceeds 1/20")]
    DeltaTooLarge(f64),

    #[error("potential has a non-finite value at node {0}")]
    BadPotential(usize),

    #[error("grid has {points} nodes, above the cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },

    #[error("grid alignment: {0}")]
    GridAlignment(String),

    #[error("eigensolver did not converge after {iterations} iterations (worst relative residual {worst_residual:e})")]
    EigNotConverged {
        iterations: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("ball radius {delta} is below two grid spacings (h = {h})")]
    UnderResolvedBall { delta: f64, h: f64 },

    #[error("spectral projector is empty")]
    EmptyProjector,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
