use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular at the configured pivot threshold")]
    SingularMatrix,

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("zero matrix has no rank factorization")]
    ZeroMatrix,

    #[error(
        "infeasible dimensions: n = {n}, dim ker(Q) = {kernel_dim}, rank(P) = {image_rank}, k = {k}"
    )]
    InfeasibleDimension {
        n: usize,
        kernel_dim: usize,
        image_rank: usize,
        k: usize,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("map is not a fixed-product preserver (target inconsistency {residual:e})")]
    NotAPreserver { residual: f64 },

    #[error("map is not unital (|psi(I) - I| = {residual:e})")]
    NotUnital { residual: f64 },

    #[error("map is not bijective")]
    NotBijective,

    #[error("dimension {n} exceeds the exhaustive-check limit {limit}")]
    DimensionTooLarge { n: usize, limit: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
