use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A named input is outside its admissible range.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The homodyne direction is orthogonal to the XPM signal, so the gain vanishes.
    #[error("zero gain: the homodyne angle is blind to the XPM signal")]
    ZeroGain,

    /// The error decreases monotonically in the probe photon number.
    #[error("no finite optimum for the probe photon number: {0}")]
    NoFiniteOptimum(String),

    #[error("degenerate direction: A = B = 0")]
    DegenerateDirection,

    #[error("optimizer did not converge within {evaluations} evaluations")]
    NonConvergence { evaluations: usize },

    #[error("preset: {0}")]
    Preset(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
