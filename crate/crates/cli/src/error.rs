use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IssueKind {
    /// Malformed value or a constraint violation.
    Schema,
    /// A `kind` or `theorem` tag that names nothing registered.
    UnknownKind,
}

/// One config problem, located by field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub kind: IssueKind,
    pub reason: String,
}

impl Issue {
    pub fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            kind: IssueKind::Schema,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            IssueKind::Schema => "SchemaError",
            IssueKind::UnknownKind => "UnknownKind",
        };
        let path = if self.path.is_empty() { "<root>" } else { &self.path };
        write!(f, "{tag} at {path}: {}", self.reason)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config:\n{}", issues_text(.0))]
    Invalid(Vec<Issue>),

    #[error("invalid report {}: {reason}", path.display())]
    BadReport { path: PathBuf, reason: String },

    #[error("experiment `{name}` failed to run: {source}")]
    Experiment {
        name: String,
        #[source]
        source: qhgeo_core::error::Error,
    },

    #[error("no output directory: pass --out or set output_dir in the config")]
    NoOutputDir,

    #[error("worker pool: {0}")]
    Pool(String),
}

fn issues_text(issues: &[Issue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}
