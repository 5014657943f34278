use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("DD operator index {0} is outside 1..=4")]
    DdIndexOutOfRange(usize),

    #[error("qutrit index {index} out of range for {num_qutrits} qutrit(s)")]
    QutritIndexOutOfRange { index: usize, num_qutrits: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} ms outside schedule duration [0, {duration}] ms")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("operation requires instantaneous pulses")]
    RequiresInstantaneous,

    #[error("config error on line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
