use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("Bose occupation undefined at zero frequency")]
    ZeroFrequency,

    #[error(
        "Drude cutoff ω_c = {omega_c} is within {distance:.3e} of Matsubara frequency ν_{k}; \
         perturb ω_c by ~1e-6 ω_r"
    )]
    DegenerateCutoff { omega_c: f64, k: usize, distance: f64 },

    #[error("rate matrix is reducible: levels {levels:?} are disconnected from the ground level")]
    Reducible { levels: Vec<usize> },

    #[error("singular steady-state system: {0}")]
    Singular(String),

    #[error("rectification undefined: I+ - I- = 0 with eta = 0")]
    UndefinedRectification,

    #[error("TLS asymmetry undefined: both matrix elements vanish")]
    UndefinedChi,

    #[error("outside validity domain: {0}")]
    OutOfValidity(String),

    #[error("conductance step check failed: κ(δT) = {full}, κ(δT/2) = {half}")]
    ConductanceInconsistent { full: f64, half: f64 },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { key: key.into(), reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
