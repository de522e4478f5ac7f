use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("{name} not positive: min {value:.6e} at x = {at}")]
    NotPositive { name: &'static str, value: f64, at: f64 },

    #[error("{name} negative: min {value:.6e} at x = {at}")]
    Negative { name: &'static str, value: f64, at: f64 },

    #[error("delta in guard band: {delta} is within {guard} of pi/2 or 3pi/2")]
    DeltaGuard { delta: f64, guard: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("eigenvalue {lambda} is not simple: gap {gap:.3e} below {gap_min:.3e}")]
    Multiplicity { lambda: f64, gap: f64, gap_min: f64 },

    #[error("mode {mode_index} (eigenvalue {lambda}) is supported on (0, b), not (a, 0)")]
    ModeOnRight { mode_index: usize, lambda: f64 },

    #[error("singular system residual {residual:.3e} exceeds tolerance {tol:.3e} at order {order}")]
    Solvability { order: usize, residual: f64, tol: f64 },

    #[error("singular matrix: zero pivot at row {0}")]
    SingularMatrix(usize),

    #[error("eigen iteration did not converge: shift {shift}, {iterations} iterations, residual {residual:.3e}")]
    NoConvergence {
        shift: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("missing term: {0}")]
    MissingTerm(String),

    #[error("empty quantization range: requested l in [{lo}, {hi}], smallest valid index {l0}")]
    EmptyRange { lo: i64, hi: i64, l0: i64 },

    #[error("epsilon {eps} out of range (0, {max})")]
    EpsilonRange { eps: f64, max: f64 },

    #[error("inner mesh has {have} elements, resolution needs at least {need}")]
    Resolution { have: usize, need: usize },

    #[error("eigenvector correlation with the limit mode is {corr:.3e}: captured a local vibration")]
    LocalMode { corr: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("fit refused: {valid} valid rows, need at least {need}")]
    FitRefused { valid: usize, need: usize },

    #[error("at order {order}: {source}")]
    AtOrder {
        order: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at_order(self, order: usize) -> Self {
        Error::AtOrder {
            order,
            source: Box::new(self),
        }
    }

    /// True for errors that come from a bad configuration file.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::NotPositive { .. }
                | Error::Negative { .. }
                | Error::DeltaGuard { .. }
                | Error::InvalidConfig(_)
        )
    }
}
