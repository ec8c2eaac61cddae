//! Discrete-event simulator for congestion control in wireless sensor
//! networks with mobile relay nodes.
//!
//! A run takes a [`topology::Network`] and a [`engine::SimConfig`] and
//! returns [`metrics::RunMetrics`]. Three algorithms are available:
//! plain level-based forwarding, local relief placement of single mobiles,
//! and mobile chains that carry a congested region's traffic straight to
//! the sink.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod congestion;
pub mod energy;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod placement;
pub mod routing;
pub mod scenario;
pub mod sweep;
pub mod topology;

pub use engine::{run, run_traced, Algorithm, SimConfig, Simulation};
pub use error::{Error, Result};
pub use geometry::Point;
pub use metrics::{RunMetrics, SweepRecord};
pub use scenario::Scenario;
pub use topology::{Network, NodeId, NodeKind, NodeState};
