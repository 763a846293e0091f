use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("duplicate profile {0:?} in solution set")]
    DuplicateProfile(Vec<usize>),
    #[error("solution set is empty")]
    EmptySolutionSet,
    #[error("profile {0:?} is not a transition of the solution set")]
    NotATransition(Vec<usize>),
    #[error("{count} profiles exceed the enumeration cap of {cap}")]
    TooLarge { count: u128, cap: usize },
    #[error("{measure} is undefined: {reason}")]
    UndefinedPrice { measure: String, reason: String },
    #[error("expected {expected} players, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid certificate: {0}")]
    CertificateInvalid(String),
    #[error("payoff vectors are not identical across players")]
    NotIdenticalUtility,
    #[error("no convergence after {iterations} iterations (relative gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },
    #[error("stretch is unbounded: {0}")]
    DegenerateStretch(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("instance is not a two-colour instance")]
    NotTwoColour,
    #[error("topology mismatch: {0}")]
    TopologyMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
