use thiserror::Error;

/// Errors raised by the particle engine, the models and the oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SisError {
    #[error("particle collapse at time {time}: every importance weight is zero")]
    ParticleCollapse { time: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("model contract violated at time {time}: {reason}")]
    ModelContract { time: usize, reason: String },

    #[error("observation feed violates monotone revelation at t={t}, i={i}, m={m}: {reason}")]
    Revelation {
        t: usize,
        i: usize,
        m: usize,
        reason: &'static str,
    },

    #[error("presence-only feed observes an absence at t={t}, i={i}, m={m}")]
    PresenceOnly { t: usize, i: usize, m: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("enumeration refused: {states} states x {times} times exceeds the bound {bound}")]
    EnumerationTooLarge {
        states: usize,
        times: usize,
        bound: usize,
    },

    #[error("feed parse error on line {line}: {reason}")]
    FeedParse { line: usize, reason: String },
}

pub type Result<T, E = SisError> = std::result::Result<T, E>;
