use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CspError {
    #[error("constraint #{constraint} refers to unknown variable {var}")]
    UnknownVariable { var: usize, constraint: usize },
    #[error("constraint #{constraint} needs variable {var} to be boolean")]
    NotBoolean { var: usize, constraint: usize },
    #[error("table constraint #{constraint} has a tuple of arity {found}, expected {expected}")]
    TableArity { constraint: usize, expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error("a game needs at least one player")]
    NoPlayers,
    #[error("player `{0}` controls no variable")]
    NoControlledVariables(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("variable `{0}` is controlled by more than one owner")]
    OverlappingVariables(String),
    #[error("objective of player `{player}` must be one of its own variables or an existential one")]
    ForeignObjective { player: String },
    #[error("profile has {found} values, expected {expected}")]
    ProfileArity { expected: usize, found: usize },
    #[error("value {value} is outside the domain of `{var}`")]
    ValueOutOfDomain { var: String, value: i64 },
    #[error("profiles differ outside the variables of player `{0}`")]
    NotUnilateral(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("normal form needs {required} cells, over the cap of {cap}")]
    TooLarge { required: u128, cap: u128 },
    #[error("games with hard constraints cannot be written in the normal-form file format")]
    HardConstraintsUnsupported,
    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` wrapper that keeps [`OracleError`] comparable.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for OracleError {
    fn from(e: std::io::Error) -> Self {
        OracleError::Io(IoError(e.to_string()))
    }
}

/// Syntax or validation problem in a game file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}
