use std::path::PathBuf;

/// Errors produced by the fitting, search and I/O layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent caller input (shapes, ranges, configuration).
    #[error("invalid input: {0}")]
    Input(String),

    /// A numeric quantity came out non-finite or a matrix was not positive definite.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// EM diverged: non-finite likelihood or a covariance that failed to factorize.
    #[error("EM failed: {0}")]
    EmFailure(String),

    /// An initializer could not produce usable starting parameters.
    #[error("initialization failed: {0}")]
    InitFailure(String),

    /// Every cell of a model search failed.
    #[error("model search failed: all {} candidates failed ({})", .reasons.len(), summarize(.reasons))]
    SearchFailure { reasons: Vec<String> },

    /// A statistical test had no information to work with.
    #[error("degenerate test input: {0}")]
    Degenerate(String),

    #[error("{}: line {line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", .path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn summarize(reasons: &[String]) -> String {
    const SHOWN: usize = 3;
    let mut out = reasons
        .iter()
        .take(SHOWN)
        .cloned()
        .collect::<Vec<_>>()
        .join("; ");
    if reasons.len() > SHOWN {
        out.push_str(&format!("; ... {} more", reasons.len() - SHOWN));
    }
    out
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
