use thiserror::Error;

/// Errors raised by the toolkit. Pipeline failures wrap the originating error in
/// [`Error::Stage`] so the failing step can be identified.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("finite-difference evaluation failed: {0}")]
    FiniteDifference(String),

    #[error("jet order {have} is below the requested extension order {need}")]
    JetOrder { have: usize, need: usize },

    #[error("no full-rank basis for n={n}, k={k} after {attempts} attempts (best rank {best_rank} of {dim})")]
    BasisFailure {
        n: usize,
        k: usize,
        attempts: usize,
        best_rank: usize,
        dim: usize,
    },

    #[error("singular decomposition system (residual {residual:e})")]
    SingularSystem { residual: f64 },

    #[error("DEGENERATE_BASIS: {0}")]
    DegenerateBasis(String),

    #[error("overflow: coordinate magnitude {magnitude:e} after word entry {entry}")]
    Overflow { entry: usize, magnitude: f64 },

    #[error("under-determined fit: {samples} samples for {unknowns} unknowns")]
    Underdetermined { samples: usize, unknowns: usize },

    #[error("inverse evaluator failed at t = {t}")]
    InverseFailure { t: f64 },

    #[error("carleman stage failed on annulus {annulus}: {detail}")]
    CarlemanStage { annulus: usize, detail: String },

    #[error("graph chart failure: {0}")]
    GraphChart(String),

    #[error("injectivity spot-check failed: {0}")]
    Injectivity(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
