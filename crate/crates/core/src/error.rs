use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PvError {
    #[error("pole of {func} at {at}")]
    Pole { func: &'static str, at: String },
    #[error("Barnes G vanishes at 1+z with z = {at}")]
    GZero { at: String },
    #[error("integer-argument singularity of G-hat at {at}")]
    IntegerSingularity { at: String },
    #[error("coefficient denominator vanishes: {factor}")]
    CoefficientPole { factor: String },
    #[error("resonant parameter: {condition}")]
    Resonance { condition: String },
    #[error("series is not invertible: {reason}")]
    NonInvertible { reason: String },
    #[error("Laurent depth too small: Lambda^0 coefficient not determined (floor {floor})")]
    InsufficientDepth { floor: i64 },
    #[error("cancellation failure in D_{k}: coefficient of Lambda^{power} is {magnitude:e} (scale {scale:e})")]
    CancellationFailure { k: usize, power: i64, magnitude: f64, scale: f64 },
    #[error("order {order} of the G_k recursion is not solvable")]
    NonSolvableOrder { order: usize },
    #[error("genericity condition violated: {condition}")]
    Genericity { condition: String },
    #[error("series margin too small: last order contributes {ratio:e} relative")]
    SeriesMargin { ratio: f64 },
    #[error("step size collapsed near t = {t} (movable pole?)")]
    PoleProximity { t: String },
    #[error("sigma-PV residual drifted to {residual:e} at t = {t}")]
    ResidualDrift { residual: f64, t: String },
    #[error("order {requested} exceeds the configured maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl PvError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            PvError::Pole { .. } => "E_POLE",
            PvError::GZero { .. } => "E_G_ZERO",
            PvError::IntegerSingularity { .. } => "E_G_HAT_SINGULAR",
            PvError::CoefficientPole { .. } => "E_COEFF_POLE",
            PvError::Resonance { .. } => "E_RESONANCE",
            PvError::NonInvertible { .. } => "E_NON_INVERTIBLE",
            PvError::InsufficientDepth { .. } => "E_DEPTH",
            PvError::CancellationFailure { .. } => "E_CANCELLATION",
            PvError::NonSolvableOrder { .. } => "E_GK_ORDER",
            PvError::Genericity { .. } => "E_GENERICITY",
            PvError::SeriesMargin { .. } => "E_SERIES_MARGIN",
            PvError::PoleProximity { .. } => "E_POLE_PROXIMITY",
            PvError::ResidualDrift { .. } => "E_RESIDUAL_DRIFT",
            PvError::OrderTooLarge { .. } => "E_ORDER",
            PvError::Config(_) => "E_CONFIG",
            PvError::Io(_) => "E_IO",
        }
    }
}

pub type Result<T> = std::result::Result<T, PvError>;
