use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate metric at {point:?} (scaled condition number {condition:.3e})")]
    DegenerateMetric { point: Vec<f64>, condition: f64 },

    #[error("point {point:?} is outside the chart domain: {reason}")]
    Domain { point: Vec<f64>, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("chart point has a non-finite coordinate")]
    NonFinite,

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("the {variant} canonical metric needs a {required} background")]
    DirectionMismatch {
        variant: &'static str,
        required: &'static str,
    },

    #[error("N = {n} is below the minimal admissible value {minimal} on the sampled domain")]
    BelowAdmissibleN { n: f64, minimal: f64 },

    #[error("incompatible models: {0}")]
    Incompatible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(point: &[f64], reason: impl Into<String>) -> Self {
        Error::Domain {
            point: point.to_vec(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
