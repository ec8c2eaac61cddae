//! Network model: node inventory, unit-disk neighbor tables and hop levels.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::congestion::TrafficWindow;
use crate::energy::EnergyLedger;
use crate::engine::{Packet, PacketQueue};
use crate::error::{Error, Result};
use crate::geometry::{within, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Sink,
    Static,
    Mobile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborEntry {
    pub neighbor: NodeId,
    /// Level of the neighbor as last advertised.
    pub hop: Option<u32>,
    pub packets_received: u64,
    pub available: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCounters {
    pub received: u64,
    pub transmitted: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Point,
    pub tx_range: f64,
    pub level: Option<u32>,
    pub queue: PacketQueue,
    /// Control traffic (congestion messages) bypasses the bounded data queue.
    pub control: VecDeque<Packet>,
    pub available: bool,
    pub radio_on: bool,
    pub energy: EnergyLedger,
    pub counters: NodeCounters,
    /// Time of the first transmission, in seconds.
    pub t0: Option<f64>,
    pub neighbors: Vec<NeighborEntry>,
    pub window: TrafficWindow,
    /// Generates data traffic during a run.
    pub source: bool,
}

impl NodeState {
    pub fn new(id: NodeId, kind: NodeKind, position: Point, tx_range: f64, queue_len: usize) -> Self {
        let capacity = if kind == NodeKind::Sink {
            usize::MAX
        } else {
            queue_len
        };
        Self {
            id,
            kind,
            position,
            tx_range,
            level: None,
            queue: PacketQueue::new(capacity),
            control: VecDeque::new(),
            available: true,
            // pool mobiles sleep until dispatched
            radio_on: kind != NodeKind::Mobile,
            energy: EnergyLedger::default(),
            counters: NodeCounters::default(),
            t0: None,
            neighbors: Vec::new(),
            window: TrafficWindow::default(),
            source: false,
        }
    }

    pub fn is_sink(&self) -> bool {
        self.kind == NodeKind::Sink
    }

    pub fn neighbor_entry(&self, id: NodeId) -> Option<&NeighborEntry> {
        self.neighbors
            .binary_search_by_key(&id, |e| e.neighbor)
            .ok()
            .map(|i| &self.neighbors[i])
    }

    pub fn neighbor_entry_mut(&mut self, id: NodeId) -> Option<&mut NeighborEntry> {
        self.neighbors
            .binary_search_by_key(&id, |e| e.neighbor)
            .ok()
            .map(move |i| &mut self.neighbors[i])
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<NodeState>,
    index: BTreeMap<NodeId, usize>,
    sink: NodeId,
    /// Idle mobiles, drained front first.
    mobile_pool: VecDeque<NodeId>,
    /// Mobiles dispatched but not yet admitted.
    reserved: Vec<NodeId>,
    /// Radio-on adjacency by dense index, kept in step with the neighbor tables.
    adjacency: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network, computes neighbor tables and levels. Mobiles enter
    /// the pool in ascending id order with their radios off.
    pub fn new(mut nodes: Vec<NodeState>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::Scenario(format!("duplicate node id {}", n.id)));
            }
            if !n.position.is_finite() {
                return Err(Error::Scenario(format!("node {} has non-finite coordinates", n.id)));
            }
            if !(n.tx_range > 0.0) {
                return Err(Error::InvalidRadius(n.tx_range));
            }
        }
        let sinks: Vec<NodeId> = nodes.iter().filter(|n| n.is_sink()).map(|n| n.id).collect();
        let sink = match sinks.as_slice() {
            [one] => *one,
            [] => return Err(Error::Scenario("no sink".into())),
            many => return Err(Error::Scenario(format!("{} sinks, expected one", many.len()))),
        };
        let mut mobile_pool = VecDeque::new();
        for n in nodes.iter_mut().filter(|n| n.kind == NodeKind::Mobile) {
            n.radio_on = false;
            mobile_pool.push_back(n.id);
        }
        let mut net = Self {
            adjacency: vec![Vec::new(); nodes.len()],
            nodes,
            index,
            sink,
            mobile_pool,
            reserved: Vec::new(),
        };
        net.build_neighbor_tables();
        net.compute_levels();
        Ok(net)
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn sink_position(&self) -> Point {
        self.node(self.sink).expect("sink exists").position
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn idx(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeState> {
        self.idx(id).map(|i| &self.nodes[i])
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut NodeState> {
        self.idx(id).map(move |i| &mut self.nodes[i])
    }

    pub fn try_node(&self, id: NodeId) -> Result<&NodeState> {
        self.node(id).ok_or(Error::InvalidNode(id))
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [NodeState] {
        &mut self.nodes
    }

    pub(crate) fn at(&self, i: usize) -> &NodeState {
        &self.nodes[i]
    }

    pub(crate) fn at_mut(&mut self, i: usize) -> &mut NodeState {
        &mut self.nodes[i]
    }

    /// Radio-on neighbors of the node at dense index `i`.
    pub(crate) fn adjacent(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn mobile_pool(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.mobile_pool.iter().copied()
    }

    pub fn pool_len(&self) -> usize {
        self.mobile_pool.len()
    }

    pub fn reserved(&self) -> &[NodeId] {
        &self.reserved
    }

    /// Moves the first `n` pool mobiles into the reserved (in-transit) set.
    pub fn reserve_mobiles(&mut self, n: usize) -> Result<Vec<NodeId>> {
        if n > self.mobile_pool.len() {
            return Err(Error::ChainInfeasible {
                needed: n,
                available: self.mobile_pool.len(),
            });
        }
        let taken: Vec<NodeId> = self.mobile_pool.drain(..n).collect();
        self.reserved.extend(&taken);
        Ok(taken)
    }

    /// Recomputes every neighbor table from positions and radio state.
    /// Per-neighbor receive counts survive for links that persist.
    pub fn build_neighbor_tables(&mut self) {
        let n = self.nodes.len();
        let mut adjacency = vec![Vec::new(); n];
        for (a, adj) in adjacency.iter_mut().enumerate() {
            if !self.nodes[a].radio_on {
                continue;
            }
            for b in 0..n {
                if a == b || !self.nodes[b].radio_on {
                    continue;
                }
                if within(self.nodes[a].position, self.nodes[b].position, self.nodes[a].tx_range) {
                    adj.push(b);
                }
            }
        }
        for (a, adj) in adjacency.iter().enumerate() {
            let old = std::mem::take(&mut self.nodes[a].neighbors);
            let mut table: Vec<NeighborEntry> = adj
                .iter()
                .map(|&b| {
                    let nb = &self.nodes[b];
                    let received = old
                        .binary_search_by_key(&nb.id, |e| e.neighbor)
                        .map(|k| old[k].packets_received)
                        .unwrap_or(0);
                    NeighborEntry {
                        neighbor: nb.id,
                        hop: nb.level,
                        packets_received: received,
                        available: nb.available || nb.is_sink(),
                    }
                })
                .collect();
            table.sort_by_key(|e| e.neighbor);
            self.nodes[a].neighbors = table;
        }
        self.adjacency = adjacency;
    }

    /// Breadth-first hop count from the sink over radio-on links.
    pub fn compute_levels(&mut self) {
        for node in &mut self.nodes {
            node.level = None;
        }
        let sink = self.idx(self.sink).expect("sink indexed");
        self.nodes[sink].level = Some(0);
        let mut frontier = VecDeque::from([sink]);
        while let Some(i) = frontier.pop_front() {
            let next = self.nodes[i].level.expect("visited") + 1;
            for k in 0..self.adjacency[i].len() {
                let j = self.adjacency[i][k];
                if self.nodes[j].level.is_none() {
                    self.nodes[j].level = Some(next);
                    frontier.push_back(j);
                }
            }
        }
        self.refresh_table_hops();
    }

    fn refresh_table_hops(&mut self) {
        let levels: Vec<Option<u32>> = self.nodes.iter().map(|n| n.level).collect();
        let index = &self.index;
        for node in &mut self.nodes {
            for e in &mut node.neighbors {
                e.hop = levels[index[&e.neighbor]];
            }
        }
    }

    /// Copies every node's current availability flag into its neighbors'
    /// tables. The engine calls this once per sample period.
    pub fn propagate_availability(&mut self) {
        let flags: Vec<bool> = self
            .nodes
            .iter()
            .map(|n| n.available || n.is_sink())
            .collect();
        let index = &self.index;
        for node in &mut self.nodes {
            for e in &mut node.neighbors {
                e.available = flags[index[&e.neighbor]];
            }
        }
    }

    /// Places a dispatched (or idle) mobile, switches its radio on and
    /// rebuilds tables and levels.
    pub fn admit_mobile(&mut self, id: NodeId, position: Point) -> Result<()> {
        if let Some(k) = self.reserved.iter().position(|&m| m == id) {
            self.reserved.remove(k);
        } else if let Some(k) = self.mobile_pool.iter().position(|&m| m == id) {
            self.mobile_pool.remove(k);
        } else {
            return Err(Error::NotInPool(id));
        }
        let node = self.node_mut(id).ok_or(Error::InvalidNode(id))?;
        node.position = position;
        node.radio_on = true;
        node.available = true;
        self.build_neighbor_tables();
        self.compute_levels();
        Ok(())
    }

    /// Radio-on node ids within `r` of `p`, ascending.
    pub fn nodes_near(&self, p: Point, r: f64) -> impl Iterator<Item = &NodeState> + '_ {
        self.nodes
            .iter()
            .filter(move |n| n.radio_on && within(n.position, p, r))
    }
}
