use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {left:?} vs {right:?} (dim, modes)")]
    GridMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("time step mismatch: {0} vs {1}")]
    StepMismatch(f64, f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("window of {delta} exceeds history length {tau}")]
    WindowTooLarge { delta: f64, tau: f64 },

    #[error("time {t} outside window [0, {window}]")]
    OutsideWindow { t: f64, window: f64 },

    #[error("solution diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },

    #[error("|alpha^-1| = {value:e} is below the floor {floor:e} (A3)")]
    AlphaFloor { value: f64, floor: f64 },

    #[error("junction mismatch {jump:e} exceeds {limit:e}")]
    JunctionMismatch { jump: f64, limit: f64 },

    #[error("assumption check failed: {0}")]
    Assumption(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
