use crate::pattern::Pattern;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("support threshold must lie in [0, 1], got {0}")]
    InvalidSigma(f64),

    #[error("order bound k must be at least 1")]
    InvalidOrder,

    #[error("parameter domain would hold {size} patterns, above the limit of {limit}")]
    DomainTooLarge { size: u128, limit: usize },

    #[error("{n} variables exceed the limit of {max} for {what}")]
    TooManyVariables { n: usize, max: usize, what: &'static str },

    #[error("the empty pattern cannot carry a parameter")]
    EmptyPatternInDomain,

    #[error("pattern {0} is not in the sample space")]
    NotInSampleSpace(Pattern),

    #[error("pattern {pattern} uses variable {item}, but the universe has only {n_variables} variables")]
    VariableOutOfRange { pattern: Pattern, item: u32, n_variables: usize },

    #[error("model assigns zero probability to observed pattern {0}")]
    ZeroProbability(Pattern),

    #[error("distributions are defined over different sample spaces")]
    SupportMismatch,

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(&'static str),

    #[error("cannot draw {requested} distinct patterns from a universe of {available}")]
    InfeasibleSupport { requested: u128, available: u128 },

    #[error("mining produced an empty parameter domain")]
    EmptyDomain,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
