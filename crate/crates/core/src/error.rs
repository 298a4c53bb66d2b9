use thiserror::Error;

use crate::estimator::SizingVerdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal has no events")]
    EmptySignal,

    #[error("degenerate observation window ({start}, {end})")]
    BadWindow { start: f64, end: f64 },

    #[error("event {index} at t={time} lies outside the window")]
    EventOutsideWindow { index: usize, time: f64 },

    #[error("event {index} at t={time} does not strictly follow the previous event")]
    NonIncreasingEvents { index: usize, time: f64 },

    #[error("dust has no points")]
    EmptyDust,

    #[error("dust point {value} lies outside [0, 1]")]
    PointOutOfRange { value: f64 },

    #[error("box count must be at least 2, got {0}")]
    BadBoxCount(usize),

    #[error("bin count must be at least 1, got {0}")]
    BadBinCount(usize),

    #[error("sample size {0} is too small for automatic sizing (need at least 16)")]
    TooFewSamples(usize),

    #[error("sizing rule violated: {}", .0.messages.join("; "))]
    SizingViolation(SizingVerdict),

    #[error("trend comparison needs at least two feature sets")]
    NeedsSweep,

    #[error("need at least {needed} spectrum points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid generator spec: {0}")]
    Spec(String),

    #[error("cascade depth {depth} exceeds double precision for contraction ratio {ratio}")]
    DepthTooLarge { depth: u32, ratio: f64 },

    #[error("q grid too coarse for finite differencing: {0}")]
    GridTooCoarse(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
