use std::path::PathBuf;

/// Errors produced anywhere in the simulator, optimizer, or harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes or lengths of the inputs do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A computation produced a non-finite value or failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The effective channel is identically zero so no beam direction exists.
    #[error("degenerate channel: effective channel has zero norm")]
    DegenerateChannel,

    /// Invalid configuration (layer topology, agent settings, sweep grids).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed checkpoint or config file contents.
    #[error("parse error in {path}: {msg}", path = .path.display())]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("non-finite value in {what}")))
    }
}
