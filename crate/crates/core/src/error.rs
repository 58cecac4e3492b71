use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular system ({what}): smallest singular value {sigma:.3e}")]
    Singular { what: String, sigma: f64 },

    #[error("ill-conditioned system ({what}): condition number {cond:.3e}")]
    IllConditioned { what: String, cond: f64 },

    #[error("eigensolver did not converge: eigenpair {index} residual {residual:.3e}")]
    NonConvergence { index: usize, residual: f64 },

    #[error("block ({lo}, {hi}] holds no eigenvalue of the truncation; {found} blocks covered")]
    Coverage { lo: f64, hi: f64, found: usize },

    #[error("nodal guard left no trusted cell")]
    EmptyTrustedMask,

    #[error("no result: {0}")]
    NoResult(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
