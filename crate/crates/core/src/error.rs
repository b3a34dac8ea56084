use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("reduced wavelength {value} is not positive at k = {k}")]
    NonPositiveWavelength { k: f64, value: f64 },

    /// `1 + α′ l_p² k²` vanished (within the singularity tolerance).
    #[error("dispersion singular at k = {k} (denominator {denominator:e})")]
    DispersionSingularity { k: f64, denominator: f64 },

    #[error("radicand {value} is negative; printed first-order width is out of its domain")]
    NegativeRadicand { value: f64 },

    #[error("k-grid [{k_min}, {k_max}] does not cover the spectral window [{need_min}, {need_max}]")]
    GridCoverage {
        k_min: f64,
        k_max: f64,
        need_min: f64,
        need_max: f64,
    },

    #[error("k-grid node {k} lies within the guard band of the pole at k = {pole}")]
    PoleGuard { k: f64, pole: f64 },

    #[error("boundary intensity {ratio:e} of peak exceeds the tail threshold {threshold:e} at t = {t}")]
    TailLeak { t: f64, ratio: f64, threshold: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unstable modes (omega^2 < 0) for |k| in [{k_lo}, {k_hi}]")]
    UnstableModes { k_lo: f64, k_hi: f64 },

    #[error("time step {dt} exceeds the leapfrog stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },

    #[error("invalid config at `{key}`: {message}")]
    ConfigInvalid { key: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("experiment `{id}` failed")]
    Experiment { id: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            key: key.into(),
            message: message.into(),
        }
    }
}
