use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column} (byte offset {offset}): {message}")]
    Parse {
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },

    #[error("csv error at record {record}: {message}")]
    Csv { record: u64, message: String },

    #[error("duplicate instance id {0:?}")]
    DuplicateInstance(String),

    #[error(
        "instance {instance:?}: fact ({title:?}, {index}) does not resolve against its context"
    )]
    DanglingFact {
        instance: String,
        title: String,
        index: usize,
    },

    #[error("instance {0:?} has no gold supporting facts")]
    NoGoldFacts(String),

    #[error("instance {0:?} has a context article with an empty title")]
    EmptyTitle(String),

    #[error("prediction for unknown instance {0:?}")]
    UnknownInstance(String),

    #[error("strict mode: predictions incomplete for {} instance(s): {}", .0.len(), .0.join(", "))]
    MissingPredictions(Vec<String>),

    #[error("record {record}: missing value for {column:?}")]
    MissingCell { record: usize, column: String },

    #[error("record {record}, column {column:?}: {value:?} is not a number")]
    NonNumeric {
        record: usize,
        column: String,
        value: String,
    },

    #[error("column {0:?} has no declared direction")]
    UndeclaredDimension(String),

    #[error("duplicate system id {0:?}")]
    DuplicateSystem(String),

    #[error("record {record}: cannot parse date {value:?} (expected YYYY-MM-DD)")]
    BadDate { record: usize, value: String },

    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),

    #[error("dimension mismatch: {left} vs {right} values")]
    DimensionMismatch { left: usize, right: usize },

    #[error("system {system:?} has no value for {dimension:?}")]
    IncompleteSystem { system: String, dimension: String },

    #[error("system {system:?} has a non-comparable value for {dimension:?}")]
    NonComparable { system: String, dimension: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("LocA is undefined: no predicted answer was counted (all yes/no/empty)")]
    UndefinedLoca,

    #[error("infeasible sampling for {} instance(s): {}", .0.len(), .0.join(", "))]
    InfeasibleSampling(Vec<String>),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("weighted kappa is undefined: expected disagreement is zero")]
    UndefinedKappa,

    #[error("variable {0:?} is constant")]
    ConstantColumn(String),

    #[error("varimax rotation did not converge after {0} sweeps")]
    NotConverged(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization failed: {0}")]
    Serialize(String),

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Whether the error stems from the computation itself rather than from the
    /// inputs it was given.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::NotConverged(_) | Error::Serialize(_) | Error::Output { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(text: &str, err: &serde_json::Error) -> Self {
        let (line, column) = (err.line(), err.column());
        Error::Parse {
            line,
            column,
            offset: byte_offset(text, line, column),
            message: err.to_string(),
        }
    }

    pub(crate) fn csv(err: csv::Error) -> Self {
        let record = err.position().map(|p| p.record()).unwrap_or(0);
        Error::Csv {
            record,
            message: err.to_string(),
        }
    }
}

/// Converts serde_json's 1-based (line, column) into a byte offset into `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_offset_tracks_lines() {
        let text = "[\n  1,\n  x]";
        let err = serde_json::from_str::<Vec<u32>>(text).unwrap_err();
        match Error::json(text, &err) {
            Error::Parse { line, offset, .. } => {
                assert_eq!(line, 3);
                assert_eq!(&text[offset..offset + 1], "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
