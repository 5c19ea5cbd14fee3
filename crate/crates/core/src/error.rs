use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulation, bound and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario id {0} (expected 1 or 2)")]
    InvalidScenario(u8),
    #[error("time {t} s is outside the trajectory horizon [0, {horizon}] s")]
    OutsideHorizon { t: f64, horizon: f64 },
    #[error("transmitter and receiver positions coincide")]
    ZeroDistance,
    #[error("path delay {delay} s exceeds the unambiguous delay range {max} s")]
    DelayOutOfRange { delay: f64, max: f64 },
    #[error("path list is empty")]
    EmptyPaths,
    #[error("channel has no line-of-sight path")]
    NoLineOfSight,
    #[error("resolution-cell factor beta = {0} must satisfy 1 < beta < 2")]
    InvalidBeta(f64),
    #[error("window length {0} is too short (need at least 2)")]
    WindowTooShort(usize),
    #[error("pilot entry at symbol {symbol}, subcarrier {subcarrier} is zero")]
    ZeroPilot { symbol: usize, subcarrier: usize },
    #[error("delay spectrum is identically zero")]
    ZeroSpectrum,
    #[error("computed range {0} m is negative")]
    NegativeRange(f64),
    #[error("anchor geometry is rank deficient")]
    RankDeficient,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem failures, false for configuration or domain errors.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
