use std::path::PathBuf;

use crate::bitext::LinkClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line count mismatch: source has {source_lines} lines, target has {target_lines}")]
    LineCountMismatch { source_lines: usize, target_lines: usize },

    #[error("{path}: line {line} is not valid UTF-8")]
    InvalidUtf8 { path: PathBuf, line: usize },

    #[error("bitext is empty")]
    EmptyBitext,

    #[error("invalid contingency table: {0}")]
    InvalidContingency(String),

    #[error("invalid binomial arguments: k={k}, n={n}, p={p}")]
    InvalidBinomial { k: u64, n: u64, p: f64 },

    #[error("degenerate parameters: lambda+ ({plus}) must exceed lambda- ({minus})")]
    DegenerateParams { plus: f64, minus: f64 },

    #[error("class {0} has no co-occurrences")]
    NoCooccurrences(LinkClass),

    #[error("class {0} has no links; parameters cannot be estimated")]
    NoLinks(LinkClass),

    #[error("induction failed: {0}")]
    InductionFailed(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("lexicon has {available} entries, sample size {requested} requested")]
    SampleTooLarge { available: usize, requested: usize },

    #[error("no judgments to score")]
    NoJudgments,

    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Malformed {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}
