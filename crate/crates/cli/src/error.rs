use std::fmt;

/// A failure reported as one line: `error[<kind>]: <message>`.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl fmt::Display) -> Self {
        CliError {
            kind,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = self.message.lines().collect::<Vec<_>>().join(" ");
        write!(f, "error[{}]: {}", self.kind, line)
    }
}

impl From<lexlink::Error> for CliError {
    fn from(e: lexlink::Error) -> Self {
        use lexlink::Error::*;
        let kind = match &e {
            Io { .. } => "io",
            LineCountMismatch { .. } => "line-count-mismatch",
            InvalidUtf8 { .. } | EmptyBitext => "input",
            Malformed { .. } | ModelVersion { .. } => "schema",
            InvalidSpec(_) => "spec",
            NoCooccurrences(_) | NoLinks(_) | InductionFailed(_) => "induction",
            SampleTooLarge { .. } | NoJudgments => "eval",
            InvalidContingency(_) | InvalidBinomial { .. } | DegenerateParams { .. } => "numeric",
        };
        CliError::new(kind, e)
    }
}

pub fn io(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::new("io", format!("{}: {e}", path.display()))
}

pub type CliResult<T = ()> = Result<T, CliError>;
