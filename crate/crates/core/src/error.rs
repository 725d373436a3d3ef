use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signals live on different grids")]
    GridMismatch,

    #[error("tau = {tau} outside tabulated range [-{max}, {max}]")]
    OutOfRange { tau: f64, max: f64 },

    #[error("non-finite {what} at time index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("step {step} too coarse for detuning {detuning}: h*max|detuning| = {product} > 0.1")]
    Resolution {
        step: f64,
        detuning: f64,
        product: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
