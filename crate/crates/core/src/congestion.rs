//! Congestion detection, the additional-resources rate and congestion
//! messages sent to the sink.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{NeighborEntry, Network, NodeId, NodeKind};

/// Which interval the receive/transmit counters cover.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Counters restart at every report and at every cooldown boundary.
    #[default]
    Windowed,
    /// Counters accumulate from the node's first transmission.
    Lifetime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    /// Queue occupancy at which a node reports congestion.
    pub threshold: usize,
    /// Minimum spacing between two reports from the same node, in sample periods.
    pub cooldown_periods: u32,
    pub accounting: Accounting,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            threshold: 6,
            cooldown_periods: 10,
            accounting: Accounting::Windowed,
        }
    }
}

/// Per-node receive/forward counters over the current measurement window.
/// Per-neighbor receive counts live in the neighbor table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrafficWindow {
    pub start: f64,
    pub received: u64,
    pub forwarded: u64,
    pub last_report: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongestionMessage {
    pub congested: NodeId,
    pub level: Option<u32>,
    pub received: u64,
    pub forwarded: u64,
    pub recv_per_period: f64,
    pub fwd_per_period: f64,
    /// Start of the measurement window (t0).
    pub window_start: f64,
    pub detected_at: f64,
    pub neighbors: Vec<NeighborEntry>,
}

impl CongestionMessage {
    pub fn window(&self) -> f64 {
        self.detected_at - self.window_start
    }

    pub fn additional_resources(&self) -> Result<f64> {
        additional_resources(self.received, self.forwarded, self.detected_at, self.window_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContributorProfile {
    pub node: NodeId,
    /// Packets per second sent into the congested node over the window.
    pub sending_rate: f64,
}

/// `(recv - tran) / (t - t0)`; a node that forwarded at least as much as it
/// received has no deficit.
pub fn additional_resources(recv: u64, tran: u64, t: f64, t0: f64) -> Result<f64> {
    if !(t > t0) {
        return Err(Error::InvalidWindow { t, t0 });
    }
    if recv <= tran {
        return Ok(0.0);
    }
    Ok((recv - tran) as f64 / (t - t0))
}

/// Evaluated at a sample tick for static nodes. Emits a report when the
/// queue holds at least `threshold` packets, the window shows a positive
/// deficit and the node is outside its cooldown. Emitting restarts the
/// window.
pub fn detect(
    network: &mut Network,
    id: NodeId,
    time: f64,
    sample_period: f64,
    cfg: &DetectionConfig,
) -> Result<Option<CongestionMessage>> {
    let node = network.node(id).ok_or(Error::InvalidNode(id))?;
    if node.kind != NodeKind::Static || !node.radio_on || node.queue.len() < cfg.threshold {
        return Ok(None);
    }
    let cooldown = f64::from(cfg.cooldown_periods) * sample_period;
    if let Some(last) = node.window.last_report {
        if time - last < cooldown - 1e-9 {
            return Ok(None);
        }
    }
    let t0 = match cfg.accounting {
        Accounting::Windowed => node.window.start,
        Accounting::Lifetime => match node.t0 {
            Some(t0) => t0,
            None => return Ok(None),
        },
    };
    if !(time > t0) {
        return Ok(None);
    }
    let w = node.window;
    let deficit = additional_resources(w.received, w.forwarded, time, t0)?;
    if deficit <= 0.0 {
        return Ok(None);
    }
    let span = time - t0;
    let cm = CongestionMessage {
        congested: id,
        level: node.level,
        received: w.received,
        forwarded: w.forwarded,
        recv_per_period: w.received as f64 * sample_period / span,
        fwd_per_period: w.forwarded as f64 * sample_period / span,
        window_start: t0,
        detected_at: time,
        neighbors: node.neighbors.clone(),
    };
    let node = network.node_mut(id).expect("checked above");
    node.window.last_report = Some(time);
    if cfg.accounting == Accounting::Windowed {
        reset_window(network, id, time);
    }
    Ok(Some(cm))
}

/// Restarts the measurement window of `id` at `time`.
pub fn reset_window(network: &mut Network, id: NodeId, time: f64) {
    if let Some(node) = network.node_mut(id) {
        node.window.start = time;
        node.window.received = 0;
        node.window.forwarded = 0;
        for e in &mut node.neighbors {
            e.packets_received = 0;
        }
    }
}

/// Upstream neighbors that fed the congested node during the window, busiest
/// first (ties by ascending id).
pub fn contributors(cm: &CongestionMessage) -> Result<Vec<ContributorProfile>> {
    let span = cm.window();
    if !(span > 0.0) {
        return Err(Error::InvalidWindow {
            t: cm.detected_at,
            t0: cm.window_start,
        });
    }
    let own = cm.level.unwrap_or(0);
    let mut out: Vec<ContributorProfile> = cm
        .neighbors
        .iter()
        .filter(|e| e.packets_received > 0 && e.hop.is_some_and(|h| h > own))
        .map(|e| ContributorProfile {
            node: e.neighbor,
            sending_rate: e.packets_received as f64 / span,
        })
        .collect();
    if out.is_empty() {
        return Err(Error::SpuriousCongestion(cm.congested));
    }
    out.sort_by(|a, b| {
        b.sending_rate
            .total_cmp(&a.sending_rate)
            .then(a.node.cmp(&b.node))
    });
    Ok(out)
}
