use thiserror::Error;

/// Errors produced by parameter validation, linear solves, and time stepping.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A physical or dimensionless parameter is outside its admissible domain.
    #[error("parameter `{name}` = {value} out of domain: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A banded linear system lost all usable pivots.
    #[error("singular linear system in {context} (pivot {pivot:.3e} at row {row})")]
    SingularSystem {
        context: &'static str,
        row: usize,
        pivot: f64,
    },

    /// A field exceeded the blow-up guard during time integration.
    #[error("solution blew up at t = {t:.6} (|{field}| reached {magnitude:.3e})")]
    BlowUp {
        t: f64,
        field: &'static str,
        magnitude: f64,
    },

    /// Repeated step rejection: halving dt `retries` times did not yield a finite step.
    #[error("step rejected at t = {t:.6} after {retries} dt-halvings")]
    StepRejected { t: f64, retries: usize },

    /// Root bracketing failed: the scanned interval contains no sign change.
    #[error("no sign change of {what} over [{lo:.6e}, {hi:.6e}]")]
    NoSignChange { what: &'static str, lo: f64, hi: f64 },

    /// A run ended before the requested observable could be classified.
    #[error("horizon {horizon} too short to classify {what}")]
    HorizonTooShort { what: &'static str, horizon: f64 },
}
