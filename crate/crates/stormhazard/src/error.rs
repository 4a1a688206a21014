//! Crate-wide error and diagnostic types.

use std::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by parsing, estimation and simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A malformed row or field in an input file, with its location.
    #[error("{file}:{line}: {message}")]
    Format {
        file: String,
        line: u64,
        message: String,
    },
    /// The observation series violates the uniform 3-hour grid.
    #[error("corrupt series: {0}")]
    Series(String),
    /// An observation value outside the legal ap set in strict mode.
    #[error("{file}:{line}: value {value} is not a legal ap value")]
    IllegalValue { file: String, line: u64, value: i64 },
    /// Invalid cycle table (overlap, ordering, span coverage).
    #[error("invalid cycle table: {0}")]
    Cycles(String),
    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The covariate does not vary across cycles; the activity effect is
    /// unidentifiable.
    #[error("degenerate covariate: all cycles share the same activity value")]
    DegenerateCovariate,
    /// An estimator was called with no events to work from.
    #[error("empty catalog: {0}")]
    EmptyCatalog(String),
    /// Iterative root finding did not converge.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: u32, residual: f64 },
    /// A storm date fell outside the cycle it was paired with.
    #[error("date {date} lies outside cycle {cycle}")]
    DateOutsideCycle { date: String, cycle: u32 },
    /// The chi-square partition produced a region with no storms.
    #[error("chi-square test undefined: {0}")]
    EmptyRegion(String),
    /// Painted clusters would overlap on the simulated grid.
    #[error("simulated clusters overlap: {0}")]
    ClusterOverlap(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Diagnostic severity. Errors abort through [`Error`]; warnings are
/// collected and reported without stopping the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

/// A non-fatal finding tied to an input location.
///
/// Rendered as `WARN: file:line: message` (or `ERROR:`), the line being
/// omitted when the finding is not tied to one.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub source: String,
    pub line: Option<u64>,
    pub message: String,
}

impl Diagnostic {
    pub fn warning(source: impl Into<String>, line: Option<u64>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            source: source.into(),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "WARN",
            Severity::Error => "ERROR",
        };
        match self.line {
            Some(line) => write!(f, "{tag}: {}:{line}: {}", self.source, self.message),
            None => write!(f, "{tag}: {}: {}", self.source, self.message),
        }
    }
}

/// A value together with the warnings produced while building it.
#[derive(Debug, Clone)]
pub struct WithWarnings<T> {
    pub value: T,
    pub warnings: Vec<Diagnostic>,
}

impl<T> WithWarnings<T> {
    pub fn clean(value: T) -> Self {
        WithWarnings {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn new(value: T, warnings: Vec<Diagnostic>) -> Self {
        WithWarnings { value, warnings }
    }

    /// Unwrap the value, panicking if any warning was recorded. Test helper.
    pub fn expect_clean(self) -> T {
        assert!(
            self.warnings.is_empty(),
            "unexpected warnings: {:?}",
            self.warnings
        );
        self.value
    }

    pub fn into_parts(self) -> (T, Vec<Diagnostic>) {
        (self.value, self.warnings)
    }
}
