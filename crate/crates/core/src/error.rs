use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("a state space needs at least two states, got {0}")]
    TooFewStates(usize),
    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown state label `{0}`")]
    UnknownLabel(String),
    #[error("state index {index} out of range for {len} states")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("self-loop on state {0}")]
    SelfLoop(usize),
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid posterior: {0}")]
    InvalidPosterior(String),
    #[error("invalid budget: t = {0} is below 1")]
    InvalidBudget(String),
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("division by zero: posterior vanishes on state {0}")]
    DivideByZero(usize),
    #[error("posterior is not interior (vanishes on state {0})")]
    NotInteriorPosterior(usize),
    #[error("degenerate budget t = 1: the feasible set is the prior alone")]
    DegenerateBudget,
    #[error("edge list is not a spanning tree: {0}")]
    NotSpanningTree(String),
    #[error("posterior is not in the feasible set")]
    NotMember,
    #[error("chain covers {chain} states but the graph has {graph}")]
    StateSetMismatch { chain: usize, graph: usize },
    #[error("invalid semi-chain: {0}")]
    InvalidSemiChain(String),
    #[error("folding needs at least three levels, got {0}")]
    TooFewLevels(usize),
    #[error("division sequence has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("instance has {states} states, above the cap of {cap}")]
    InstanceTooLarge { states: usize, cap: usize },
    #[error("signal is not Bayes plausible for the prior")]
    NotBayesPlausible,
    #[error("signal is not privacy preserving")]
    NotPrivacyPreserving,
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("no convex decomposition over the extreme posteriors was found")]
    InfeasibleDecomposition,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_) | Error::InfeasibleDecomposition)
    }
}
