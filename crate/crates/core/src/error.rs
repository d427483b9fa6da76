use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A problem size exceeds a feasibility guard.
    #[error("size guard: {what} = {got} exceeds the limit {limit}")]
    SizeGuard {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    /// Accumulation produced a value that cannot be physical; this signals
    /// a floating-point failure, not physics.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// A computed entropy fell below its rigorous lower bound.
    #[error("bound violation: S2 = {s2} < lower bound {bound} (L = {l}, tJ = {t})")]
    BoundViolation { s2: f64, bound: f64, l: usize, t: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Stable machine-readable category, used by the CLI on stderr.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::SizeGuard { .. } => "infeasible",
            Error::NumericalBreakdown(_) => "numerical",
            Error::BoundViolation { .. } => "bound-violation",
            Error::LinearAlgebra(_) => "linalg",
            Error::Config(_) => "config",
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => "io",
        }
    }

    /// Process exit code for the category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::SizeGuard { .. } => 3,
            Error::NumericalBreakdown(_) | Error::LinearAlgebra(_) => 4,
            Error::BoundViolation { .. } => 5,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 6,
        }
    }
}
