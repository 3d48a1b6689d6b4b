use thiserror::Error;

/// Errors produced by the solver library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Raised by the forward Euler stability guard when the max principle is
    /// violated. The step size should be reduced to at most `tau_safe`.
    #[error(
        "unstable time step at step {step} (t = {time:.6}): sup |u| = {norm:.6e} exceeds \
         the initial bound {bound:.6e}; tau = {tau:.3e}, suggest tau <= {tau_safe:.3e}"
    )]
    Unstable {
        step: usize,
        time: f64,
        norm: f64,
        bound: f64,
        tau: f64,
        tau_safe: f64,
    },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: msg.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
