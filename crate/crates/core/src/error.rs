use thiserror::Error;

pub type Result<T> = std::result::Result<T, QslError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QslError {
    #[error("invalid sector: {num_excitations} excitations on {num_sites} sites")]
    InvalidSector { num_sites: usize, num_excitations: usize },

    #[error("basis dimension {dimension} exceeds the cap of {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("Fock state {0} is not part of the basis")]
    StateNotInBasis(String),

    #[error("duplicate Fock state {0} in superposition")]
    DuplicateState(String),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("invalid bitstring {0:?}")]
    InvalidBitstring(String),

    #[error("operands live in different bases")]
    BasisMismatch,

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("spectrum has zero width (E_max = E_min = {0})")]
    DegenerateSpectrum(f64),

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("exponent alpha must be positive, got {0}")]
    InvalidAlpha(f64),

    #[error("state is not a single Fock state")]
    NotAProductState,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("no sign change of {what} in [{lo}, {hi}]")]
    NoSignChange { what: String, lo: f64, hi: f64 },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<QslError>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl QslError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        QslError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn in_scenario(self, scenario: &str) -> Self {
        QslError::Scenario {
            scenario: scenario.to_string(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for QslError {
    fn from(e: std::io::Error) -> Self {
        QslError::Io(e.to_string())
    }
}
