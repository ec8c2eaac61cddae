use thiserror::Error;

use crate::topology::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radius {0}: must be positive")]
    InvalidRadius(f64),

    #[error("degenerate direction: center coincides with the sink")]
    DegenerateDirection,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid measurement window: t ({t}) must be after t0 ({t0})")]
    InvalidWindow { t: f64, t0: f64 },

    #[error("unknown node {0}")]
    InvalidNode(NodeId),

    #[error("mobile pool exhausted")]
    PoolExhausted,

    #[error("mobile {0} is neither idle nor dispatched")]
    NotInPool(NodeId),

    #[error("direct chain infeasible: needed {needed} mobiles, {available} available")]
    ChainInfeasible { needed: usize, available: usize },

    #[error("spurious congestion message from {0}: no contributors")]
    SpuriousCongestion(NodeId),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot aggregate an empty record set")]
    EmptyAggregation,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("scenario invalid: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
