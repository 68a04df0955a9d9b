use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A domain value violated its construction invariant.
    #[error("invalid {what}: {reason}")]
    InvalidParameter { what: &'static str, reason: String },

    /// The input-impedance denominator collapsed below the evaluation floor.
    #[error("degenerate evaluation: |{what}| = {magnitude:e} is below the floor")]
    DegenerateEvaluation { what: &'static str, magnitude: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("frequency {freq} Hz lies outside the measured span [{start}, {end}] Hz")]
    FrequencyOutOfRange { freq: f64, start: f64, end: f64 },

    #[error("frequency {freq} Hz does not match any measured sample within {tolerance} Hz")]
    FrequencyNotOnGrid { freq: f64, tolerance: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error(
        "sweep band [{plan_start}, {plan_end}] Hz exceeds the spectrum span [{spectrum_start}, {spectrum_end}] Hz"
    )]
    PlanExceedsSpectrum {
        plan_start: f64,
        plan_end: f64,
        spectrum_start: f64,
        spectrum_end: f64,
    },

    #[error("empty sweep: {0}")]
    EmptySweep(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
