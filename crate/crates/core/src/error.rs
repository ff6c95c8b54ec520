use std::path::PathBuf;

/// Errors produced by the library and the `pcmas` binary.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("joint action ({row}, {col}) is outside a {rows}x{cols} game")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("history holds {got} joint actions but the learner remembers {expected}")]
    HistoryLength { expected: usize, got: usize },

    #[error("policy teacher cannot track the student's state: {0}")]
    UntrackedState(String),

    #[error("malformed policy file: {0}")]
    PolicyFormat(String),

    #[error(
        "no policy file at {path}; solve one first with \
         `pcmas tmdp solve --game <file> --temp {temperature} --out {path}`"
    )]
    MissingPolicy { path: PathBuf, temperature: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
