//! Sink-side planning for a hand-built congestion message: the smallest
//! contributor subset a single mobile can relieve, and the mobile chain a
//! direct placement lays toward the sink.
//!
//! `cargo run --example placement_planner`

use mobilecc::congestion::{contributors, CongestionMessage};
use mobilecc::placement::{plan_direct, plan_dynamic};
use mobilecc::topology::{NeighborEntry, Network, NodeId, NodeKind, NodeState};
use mobilecc::Point;

const RANGE: f64 = 25.0;

fn main() -> mobilecc::Result<()> {
    // sink, a two-hop trunk, a congested node and three sources behind it
    let layout = [
        (1, NodeKind::Sink, 0.0, 0.0),
        (2, NodeKind::Static, 20.0, 0.0),
        (3, NodeKind::Static, 20.0, 20.0),
        (4, NodeKind::Static, 40.0, 15.0),
        (5, NodeKind::Static, 58.0, 22.0),
        (6, NodeKind::Static, 55.0, 5.0),
        (7, NodeKind::Static, 45.0, 35.0),
        (8, NodeKind::Mobile, 1.0, 0.0),
        (9, NodeKind::Mobile, 0.0, 1.0),
        (10, NodeKind::Mobile, -1.0, 0.0),
    ];
    let nodes = layout
        .iter()
        .map(|&(id, kind, x, y)| NodeState::new(NodeId(id), kind, Point::new(x, y), RANGE, 8))
        .collect();
    let network = Network::new(nodes)?;
    let congested = network.try_node(NodeId(4))?;
    println!("congested node 4 sits at level {:?}", congested.level);

    // over a 10 s window node 4 received 300 packets and forwarded 120
    let rates = [(5, 160), (6, 90), (7, 50)];
    let neighbors = congested
        .neighbors
        .iter()
        .map(|e| NeighborEntry {
            packets_received: rates.iter().find(|r| NodeId(r.0) == e.neighbor).map_or(0, |r| r.1),
            ..e.clone()
        })
        .collect();
    let cm = CongestionMessage {
        congested: NodeId(4),
        level: congested.level,
        received: 300,
        forwarded: 120,
        recv_per_period: 30.0,
        fwd_per_period: 12.0,
        window_start: 0.0,
        detected_at: 10.0,
        neighbors,
    };
    println!("additional resources: {:.1} pkts/s", cm.additional_resources()?);
    for c in contributors(&cm)? {
        println!("  contributor {} sends {:.1} pkts/s", c.node, c.sending_rate);
    }

    println!("dynamic placement:");
    for p in plan_dynamic(&cm, &network)? {
        println!(
            "  mobile {} to ({:.2}, {:.2}) serving [{}], forwarding to {}",
            p.mobile, p.target.x, p.target.y, ids(&p.served), p.next_hop_hint
        );
    }
    println!("direct placement:");
    for p in plan_direct(&cm, &network)? {
        println!(
            "  mobile {} to ({:.2}, {:.2}) serving [{}], forwarding to {}",
            p.mobile, p.target.x, p.target.y, ids(&p.served), p.next_hop_hint
        );
    }
    Ok(())
}

fn ids(list: &[mobilecc::NodeId]) -> String {
    list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}
