use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI exit-code contract: `Domain` → 2,
/// `Resource` → 3, everything else → 1.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's domain (bad table, cap violation, wrong kind, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Enumeration or grid size above the configured limit.
    #[error("resource error: {0}")]
    Resource(String),

    /// Cell geometry unusable (too thin to sample, degenerate witness).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// An internal invariant failed, e.g. profit not affine inside an overlay cell.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
