use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scale out of range: exponent {exp} (supported 0..={max})")]
    ScaleOutOfRange { exp: u32, max: u32 },

    #[error("point ({x}, {y}) lies outside the {window} window")]
    OutsideWindow { x: f64, y: f64, window: &'static str },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("points {first} and {second} are {dist:e} apart, closer than delta = {delta:e}")]
    NotSeparated {
        first: usize,
        second: usize,
        dist: f64,
        delta: f64,
    },

    #[error("empty set has no regularity constant")]
    EmptyRegularity,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input violates (δ,t,C) premise: H = {h} < 1")]
    PremiseViolated { h: f64 },

    #[error("insufficient content: estimate {content:e} is below kappa = {kappa:e}")]
    InsufficientContent { content: f64, kappa: f64 },

    #[error("mass below admissible floor: log2 mass {log2_mass} < {log2_floor}")]
    MassBelowFloor { log2_mass: f64, log2_floor: f64 },

    #[error("block size below T₀: T = {block} < T₀ = {t0}")]
    BlockSizeBelowT0 { block: u32, t0: u32 },

    #[error("depth mismatch: {0}")]
    DepthMismatch(String),

    #[error("profile too shallow for ε = {eps}: window reaches level {needed}, profile starts at {start}")]
    ProfileTooShallow { eps: f64, needed: u32, start: u32 },

    #[error("viewpoint too close to K: ({x}, {y}) is {dist:e} from K, floor {floor:e}")]
    ViewpointTooClose {
        x: f64,
        y: f64,
        dist: f64,
        floor: f64,
    },

    #[error("ladder too short for regression: {got} scales, need at least {need}")]
    LadderTooShort { got: usize, need: usize },

    #[error("cardinality exceeds bucket range: |F| = {size} > δ^-3 = {limit}")]
    BucketRange { size: usize, limit: f64 },

    #[error("outside slope-intercept chart: line with angle {theta} is vertical")]
    OutsideChart { theta: f64 },

    #[error("a line carries at most dimension 1 (got s = {0})")]
    LineDimension(f64),

    #[error("generator failed verification after {tries} tries: {detail}")]
    GeneratorVerification { tries: u32, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{suite}: {context}: {source}")]
    InSuite {
        suite: &'static str,
        context: String,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Parse and config errors, as opposed to failures inside a module.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Parse { .. } | Error::Config(_) => true,
            Error::InSuite { source, .. } => source.is_usage(),
            _ => false,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
