use std::fmt;

use thiserror::Error;

use crate::network::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Location of a problem inside a network or findings document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Variable whose block (or finding) is at fault, when known.
    pub variable: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)?;
        if let Some(v) = &self.variable {
            write!(f, ", variable \"{v}\"")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable \"{0}\"")]
    UnknownVariable(String),

    #[error("variable \"{variable}\" has no state \"{state}\"")]
    UnknownState { variable: String, state: String },

    #[error("variable \"{0}\" is assigned more than once")]
    DuplicateFinding(String),

    #[error("network contains a cycle through {0:?}")]
    Cycle(Vec<String>),

    #[error("invalid network:\n{0}")]
    Invalid(ValidationReport),

    #[error("factor scopes disagree on the state count of variable #{variable} ({left} vs {right})")]
    ScopeMismatch {
        variable: usize,
        left: usize,
        right: usize,
    },

    #[error("variable #{0} is not in the factor scope")]
    NotInScope(usize),

    #[error("state {state} is out of range for variable #{variable}")]
    StateOutOfRange { variable: usize, state: usize },

    #[error("evidence has probability zero under the model")]
    ImpossibleEvidence,

    #[error("joint state space has {size} configurations, above the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },

    #[error("network has no Target variables")]
    NoTargets,

    #[error("network has no Evidence variables")]
    NoEvidence,

    #[error("{configs} target configurations exceed the cap of {cap}")]
    TargetCapExceeded { configs: u128, cap: u128 },

    #[error("conflict index is undefined: both probabilities are zero")]
    UndefinedIndex,

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("finding on \"{variable}\" cannot be scored: its role is {role}, not Evidence")]
    RoleMismatch { variable: String, role: String },

    #[error("no findings were given")]
    EmptyEvidence,

    #[error("{0}")]
    InvalidParameter(String),

    #[error("mixture components differ: {0}")]
    MismatchedWorld(String),

    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
}
