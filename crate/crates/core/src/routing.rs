//! Level-based forwarding: lowest-level available neighbor, smallest id on
//! ties, with per-sender overrides installed by mobile placements.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{Network, NodeId, NodeState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RouteDecision {
    Hop(NodeId),
    /// No available neighbor sits closer to the sink.
    Stall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteOverride {
    pub sender: NodeId,
    pub next_hop: NodeId,
}

/// Active overrides keyed by sender. A later override for the same sender
/// replaces the earlier one.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    by_sender: BTreeMap<NodeId, NodeId>,
}

impl Overrides {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, o: RouteOverride) {
        self.by_sender.insert(o.sender, o.next_hop);
    }

    pub fn get(&self, sender: NodeId) -> Option<NodeId> {
        self.by_sender.get(&sender).copied()
    }

    pub fn len(&self) -> usize {
        self.by_sender.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_sender.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = RouteOverride> + '_ {
        self.by_sender
            .iter()
            .map(|(&sender, &next_hop)| RouteOverride { sender, next_hop })
    }
}

pub fn next_hop(sender: NodeId, network: &Network, overrides: &Overrides) -> Result<RouteDecision> {
    let node = network.try_node(sender)?;
    Ok(decide(node, overrides, true))
}

/// Route for control traffic: follows the level gradient but ignores
/// availability flags, so a congestion report is never held back by the
/// congestion it reports.
pub fn next_hop_control(sender: NodeId, network: &Network) -> Result<RouteDecision> {
    let node = network.try_node(sender)?;
    Ok(decide(node, &Overrides::default(), false))
}

pub(crate) fn decide(node: &NodeState, overrides: &Overrides, honor_flags: bool) -> RouteDecision {
    if let Some(target) = overrides.get(node.id) {
        if let Some(entry) = node.neighbor_entry(target) {
            return if entry.available || !honor_flags {
                RouteDecision::Hop(target)
            } else {
                RouteDecision::Stall
            };
        }
    }
    let Some(own) = node.level else {
        return RouteDecision::Stall;
    };
    node.neighbors
        .iter()
        .filter(|e| !honor_flags || e.available)
        .filter_map(|e| e.hop.filter(|&l| l < own).map(|l| (l, e.neighbor)))
        .min()
        .map_or(RouteDecision::Stall, |(_, id)| RouteDecision::Hop(id))
}

/// Sets a node's own availability flag. The sink always accepts traffic, so
/// requests to flag it are ignored. Neighbors see the change once
/// [`Network::propagate_availability`] runs.
pub fn set_availability(node: NodeId, flag: bool, network: &mut Network) -> Result<()> {
    let n = network.node_mut(node).ok_or(Error::InvalidNode(node))?;
    if !n.is_sink() {
        n.available = flag;
    }
    Ok(())
}

/// Queue-occupancy hysteresis: unavailable at or above `threshold`,
/// available again below half of it.
pub fn hysteresis_flag(current: bool, occupancy: usize, threshold: usize) -> bool {
    if occupancy >= threshold {
        false
    } else if occupancy * 2 < threshold {
        true
    } else {
        current
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::topology::{NodeKind, NodeState};

    fn node(id: u32, kind: NodeKind, x: f64, y: f64) -> NodeState {
        NodeState::new(NodeId(id), kind, Point::new(x, y), 25.0, 8)
    }

    /// Sink at the origin, a ring of level-1 relays, a level-2 ring, and a
    /// sender at level 3 that sees two level-2 nodes (4 and 7) and one
    /// level-3 node (9).
    fn tie_net() -> Network {
        Network::new(vec![
            node(1, NodeKind::Sink, 0.0, 0.0),
            node(2, NodeKind::Static, 0.0, 20.0),
            node(3, NodeKind::Static, 20.0, 0.0),
            node(4, NodeKind::Static, 0.0, 40.0),
            node(7, NodeKind::Static, 20.0, 35.0),
            node(9, NodeKind::Static, 30.0, 55.0),
            node(10, NodeKind::Static, 10.0, 55.0),
        ])
        .unwrap()
    }

    #[test]
    fn smallest_id_breaks_level_ties() {
        let net = tie_net();
        let s = net.node(NodeId(10)).unwrap();
        assert_eq!(s.level, Some(3));
        assert_eq!(net.node(NodeId(4)).unwrap().level, Some(2));
        assert_eq!(net.node(NodeId(7)).unwrap().level, Some(2));
        assert_eq!(net.node(NodeId(9)).unwrap().level, Some(3));
        assert_eq!(
            next_hop(NodeId(10), &net, &Overrides::new()).unwrap(),
            RouteDecision::Hop(NodeId(4))
        );
    }

    #[test]
    fn sink_in_range_wins() {
        let net = tie_net();
        assert_eq!(
            next_hop(NodeId(2), &net, &Overrides::new()).unwrap(),
            RouteDecision::Hop(NodeId(1))
        );
    }

    #[test]
    fn stall_when_lower_neighbors_unavailable() {
        let mut net = tie_net();
        set_availability(NodeId(4), false, &mut net).unwrap();
        net.propagate_availability();
        assert_eq!(
            next_hop(NodeId(10), &net, &Overrides::new()).unwrap(),
            RouteDecision::Hop(NodeId(7))
        );
        set_availability(NodeId(7), false, &mut net).unwrap();
        net.propagate_availability();
        assert_eq!(next_hop(NodeId(10), &net, &Overrides::new()).unwrap(), RouteDecision::Stall);
        // control traffic keeps moving
        assert_eq!(
            next_hop_control(NodeId(10), &net).unwrap(),
            RouteDecision::Hop(NodeId(4))
        );
        set_availability(NodeId(4), true, &mut net).unwrap();
        set_availability(NodeId(7), true, &mut net).unwrap();
        net.propagate_availability();
        assert_eq!(
            next_hop(NodeId(10), &net, &Overrides::new()).unwrap(),
            RouteDecision::Hop(NodeId(4))
        );
    }

    #[test]
    fn flag_changes_wait_for_propagation() {
        let mut net = tie_net();
        set_availability(NodeId(4), false, &mut net).unwrap();
        assert_eq!(
            next_hop(NodeId(10), &net, &Overrides::new()).unwrap(),
            RouteDecision::Hop(NodeId(4))
        );
    }

    #[test]
    fn sink_flag_ignored() {
        let mut net = tie_net();
        set_availability(NodeId(1), false, &mut net).unwrap();
        net.propagate_availability();
        assert!(net.node(NodeId(1)).unwrap().available);
        assert_eq!(
            next_hop(NodeId(3), &net, &Overrides::new()).unwrap(),
            RouteDecision::Hop(NodeId(1))
        );
    }

    #[test]
    fn override_takes_precedence() {
        let net = tie_net();
        let mut o = Overrides::new();
        o.insert(RouteOverride {
            sender: NodeId(10),
            next_hop: NodeId(9),
        });
        assert_eq!(next_hop(NodeId(10), &net, &o).unwrap(), RouteDecision::Hop(NodeId(9)));
        // unreachable override target falls back to level routing
        o.insert(RouteOverride {
            sender: NodeId(10),
            next_hop: NodeId(3),
        });
        assert_eq!(next_hop(NodeId(10), &net, &o).unwrap(), RouteDecision::Hop(NodeId(4)));
    }

    #[test]
    fn unknown_sender() {
        let net = tie_net();
        assert!(matches!(
            next_hop(NodeId(99), &net, &Overrides::new()),
            Err(Error::InvalidNode(_))
        ));
    }

    #[test]
    fn hysteresis() {
        assert!(!hysteresis_flag(true, 6, 6));
        assert!(!hysteresis_flag(false, 4, 6));
        assert!(!hysteresis_flag(false, 3, 6));
        assert!(hysteresis_flag(false, 2, 6));
        assert!(hysteresis_flag(true, 5, 6));
    }
}
