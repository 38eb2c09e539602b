use thiserror::Error;

/// Errors raised by model construction, the solvers and the simulator.
///
/// Opinion and agent indices carried by validation errors are 1-based so that
/// messages read the same way as rate-matrix notation (`q12`, agent 1, ...).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative off-diagonal rate at ({row},{col})")]
    NegativeOffDiagonal { row: usize, col: usize },

    #[error("row {row} of the rate matrix sums to {sum:e}, expected 0")]
    RowSumNonzero { row: usize, sum: f64 },

    #[error("rate matrix is reducible: opinions {unreachable:?} are not mutually reachable from opinion 1")]
    Reducible { unreachable: Vec<usize> },

    #[error("generator is reducible: {unreachable} states are not mutually reachable from state 0")]
    ReducibleGenerator { unreachable: usize },

    #[error("birth-death chain is reducible: {0}")]
    ReducibleChain(String),

    #[error("expected {expected} opinions, got {got}")]
    WrongOpinionCount { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state space of {opinions}^{agents} states exceeds the limit of {limit}")]
    StateSpaceTooLarge {
        agents: usize,
        opinions: usize,
        limit: usize,
    },

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("pair joint requires two distinct agents, got {0} twice")]
    SameAgent(usize),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("quantile {0} is outside (0, 1)")]
    InvalidQuantile(f64),

    #[error("invalid initial opinions: {0}")]
    InvalidInitialOpinions(String),

    #[error("non-finite rate encountered: {0}")]
    NonfiniteRate(String),

    #[error("agents do not share a single rate matrix")]
    HeterogeneousAgents,

    #[error("influence intensities are biased: {0:?}")]
    BiasedIntensities(Vec<f64>),

    #[error("degenerate denominator in closed form")]
    DegenerateDenominator,

    #[error("time {t} lies outside the path window [0, {t_end}]")]
    GridOutOfRange { t: f64, t_end: f64 },

    #[error("averaging window too short: {0}")]
    WindowTooShort(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
