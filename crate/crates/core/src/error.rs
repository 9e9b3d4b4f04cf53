use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("m must exceed mprime (got m = {m}, mprime = {m_prime})")]
    DegenerateState { m: u32, m_prime: u32 },

    #[error("photon count {value} exceeds the supported cap of {cap}")]
    PhotonCap { value: u32, cap: u32 },

    #[error("loss rate for arm {arm} must lie in [0, 1], got {value}")]
    LossOutOfRange { arm: char, value: f64 },

    #[error("phase must be finite, got {0}")]
    NonFinitePhase(f64),

    #[error("brute-force oracle supports m + mprime <= {cap}, got {total}")]
    OracleCap { total: u32, cap: u32 },

    #[error("parity cutoff {cutoff} is below the density matrix photon number {required}")]
    CutoffTooSmall { cutoff: u32, required: u32 },

    #[error("effective photon number is zero (full loss); limits are undefined")]
    NoTransmittedPhotons,

    #[error("state |{m}::{m_prime}> does not satisfy delta_m^2 > m + mprime and never beats the shot-noise limit")]
    NoSnlAdvantage { m: u32, m_prime: u32 },

    #[error("optimal sensitivity minus shot-noise limit is not monotone on [{lo}, {hi}]")]
    NonMonotoneCrossover { lo: f64, hi: f64 },

    #[error("no crossover with the shot-noise limit below loss {0}")]
    CrossoverNotBracketed(f64),

    #[error("candidate set is empty for the requested constraint")]
    EmptyCandidates,

    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
