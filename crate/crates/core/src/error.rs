use thiserror::Error;

use crate::operators::Operator;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("signal is defined over operator {found:?} but {expected:?} was requested")]
    OperatorMismatch { expected: Operator, found: Operator },

    #[error("quadrature did not reach tolerance {tolerance:e} within {subdivisions} subdivisions (error estimate {estimate:e})")]
    QuadratureNonConvergence {
        tolerance: f64,
        subdivisions: usize,
        estimate: f64,
    },

    #[error("measurement model is not well posed: null-space matrix has rank {rank} < {required}")]
    NullSpaceRankDeficient { rank: usize, required: usize },

    #[error("sample points {first} and {second} coincide (distance {distance:e})")]
    DuplicateSamples {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("invalid measurement model: {0}")]
    InvalidModel(String),

    #[error("grid of {n} points with step {step} does not cover the signal domain [0, {domain}]")]
    GridDoesNotCoverDomain { n: usize, step: f64, domain: f64 },

    #[error("dimension mismatch: expected {expected}, got {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("regularization weight must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("linear system is singular or numerically degenerate")]
    SingularSystem,

    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("linear program is infeasible (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("need at least {required} impulses to enforce compact support, got {found}")]
    TooFewImpulses { required: usize, found: usize },

    #[error("cannot add noise at finite SNR to an all-zero measurement vector")]
    ZeroSignalNoise,

    #[error("ground truth is identically zero on the evaluation grid")]
    ZeroGroundTruth,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every grid point of the lambda search failed; last error: {0}")]
    AllLambdasFailed(Box<Error>),
}

pub type Result<T> = std::result::Result<T, Error>;
