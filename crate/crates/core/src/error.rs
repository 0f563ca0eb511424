use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("invalid generator name `{0}`")]
    InvalidGeneratorName(String),
    #[error("generator `{0}` has weight 0")]
    ZeroWeight(String),
    #[error("at least one generator is required")]
    NoGenerators,
    #[error("max_weight must be at least 1")]
    ZeroMaxWeight,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("basis element id {0} out of range")]
    UnknownBasisId(u32),
    #[error("operands belong to different group contexts")]
    ContextMismatch,
    #[error("no image given for generator `{0}`")]
    MissingImage(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("word too long to flatten ({0} factors)")]
    WordTooLong(usize),
    #[error("p-adic valuation of zero is undefined")]
    ZeroValuation,
    #[error("{0} is not a prime power")]
    NotPrimePower(String),
    #[error("divisibility claim failed: {0}")]
    Divisibility(String),
    #[error("invalid stratification: {0}")]
    InvalidSpec(String),
    #[error("element has nonzero exponent {exponent} on generator `{name}`")]
    NotInDerived { name: String, exponent: String },
    #[error("not in K: coordinate {id} ({element}) has exponent {exponent}, not divisible by {divisor}")]
    NotInK {
        id: u32,
        element: String,
        exponent: String,
        divisor: String,
    },
    #[error("cache error: {0}")]
    Cache(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
