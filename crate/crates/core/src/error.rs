use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("spin axis is not unit norm (|v| = {0})")]
    Normalization(f64),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("state invariant violated: {0}")]
    InvalidState(String),
    #[error("truncation risk: {0}")]
    Truncation(String),
    #[error("degenerate spin basis: {0}")]
    DegenerateBasis(String),
    #[error("unsupported interaction order {0}")]
    UnsupportedOrder(usize),
    #[error("step size underflow at t = {t:e} s (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("non-uniform grid: {0}")]
    NonUniformGrid(String),
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn context(self, ctx: impl Into<String>) -> Error {
        Error::Context { context: ctx.into(), source: Box::new(self) }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
