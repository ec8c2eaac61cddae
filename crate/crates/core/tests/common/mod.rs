//! Shared oracles and fixtures for the integration suites.
#![allow(dead_code)]

use mobilecc::congestion::CongestionMessage;
use mobilecc::geometry::{distance, Point};
use mobilecc::metrics::SweepRecord;
use mobilecc::scenario::builtin;
use mobilecc::sweep::{run_sweep, SweepPlan};
use mobilecc::topology::{NeighborEntry, Network, NodeId, NodeKind, NodeState};
use mobilecc::Algorithm;
use rand::Rng;

/// `center + r * unit(sink - center)`, with exact coordinate shifts on the axes.
pub fn toward_oracle(center: Point, r: f64, sink: Point) -> Point {
    if center.x == sink.x {
        return Point::new(center.x, center.y + r * (sink.y - center.y).signum());
    }
    if center.y == sink.y {
        return Point::new(center.x + r * (sink.x - center.x).signum(), center.y);
    }
    let (dx, dy) = (sink.x - center.x, sink.y - center.y);
    let d = (dx * dx + dy * dy).sqrt();
    Point::new(center.x + r * dx / d, center.y + r * dy / d)
}

/// Crossing points of two equal circles, by polar angles from `a`.
pub fn polar_crossings(a: Point, b: Point, r: f64) -> Vec<Point> {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let d = (dx * dx + dy * dy).sqrt();
    if d == 0.0 || d > 2.0 * r {
        return Vec::new();
    }
    let base = dy.atan2(dx);
    let spread = (d / (2.0 * r)).min(1.0).acos();
    [base + spread, base - spread]
        .iter()
        .map(|t| Point::new(a.x + r * t.cos(), a.y + r * t.sin()))
        .collect()
}

fn inside_all(p: Point, centers: &[Point], r: f64, slack: f64) -> bool {
    centers.iter().all(|c| distance(*c, p) <= r + slack)
}

/// Enumerates every pairwise crossing, keeps those inside all disks and
/// returns the one nearest the sink.
pub fn common_point_oracle(centers: &[Point], r: f64, sink: Point) -> Option<Point> {
    let mut best: Option<Point> = None;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            for p in polar_crossings(centers[i], centers[j], r) {
                if !inside_all(p, centers, r, 1e-7) {
                    continue;
                }
                if best.is_none_or(|b| distance(p, sink) < distance(b, sink) - 1e-9) {
                    best = Some(p);
                }
            }
        }
    }
    best
}

/// Whether a grid over the first disk finds a point at least `margin` inside
/// every disk.
pub fn grid_finds_interior(centers: &[Point], r: f64, step: f64, margin: f64) -> bool {
    let c = centers[0];
    let n = (2.0 * r / step).ceil() as i64;
    (0..=n).any(|i| {
        (0..=n).any(|j| {
            let p = Point::new(c.x - r + i as f64 * step, c.y - r + j as f64 * step);
            inside_all(p, centers, r - margin, 0.0)
        })
    })
}

pub fn node(id: u32, kind: NodeKind, p: Point, r: f64) -> NodeState {
    NodeState::new(NodeId(id), kind, p, r, 8)
}

/// A random relief problem: a congested node with up to `max_feeds`
/// contributors around it, a sink, a relay line, a few stray relays and one
/// mobile.
pub struct SyntheticCm {
    pub network: Network,
    pub cm: CongestionMessage,
    pub rates: Vec<(NodeId, f64)>,
}

pub fn synthetic_cm(rng: &mut impl Rng, max_feeds: usize) -> SyntheticCm {
    let r = 25.0;
    let congested = Point::new(rng.gen_range(40.0..90.0), rng.gen_range(40.0..90.0));
    let sink = Point::new(rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
    let mut nodes = vec![
        node(1, NodeKind::Sink, sink, r),
        node(2, NodeKind::Static, congested, r),
        node(90, NodeKind::Mobile, sink.translate(1.0, 0.0), r),
    ];
    let feeds = rng.gen_range(1..=max_feeds);
    let mut entries = Vec::new();
    let mut rates = Vec::new();
    let span = 10.0;
    for k in 0..feeds {
        let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let dist: f64 = rng.gen_range(5.0..r);
        let id = NodeId(10 + k as u32);
        nodes.push(node(id.0, NodeKind::Static, congested.translate(dist * ang.cos(), dist * ang.sin()), r));
        let pkts = rng.gen_range(1..60u64);
        entries.push(NeighborEntry {
            neighbor: id,
            hop: Some(4),
            packets_received: pkts,
            available: true,
        });
        rates.push((id, pkts as f64 / span));
    }
    // a jittered relay line from the sink toward the congested node
    let hops = (distance(sink, congested) / 20.0).ceil() as u32;
    for k in 1..hops {
        let f = k as f64 / hops as f64;
        let p = Point::new(
            sink.x + f * (congested.x - sink.x) + rng.gen_range(-6.0..6.0),
            sink.y + f * (congested.y - sink.y) + rng.gen_range(-6.0..6.0),
        );
        nodes.push(node(50 + k, NodeKind::Static, p, r));
    }
    for k in 0..rng.gen_range(0..6u32) {
        let p = Point::new(rng.gen_range(0.0..110.0), rng.gen_range(0.0..110.0));
        nodes.push(node(70 + k, NodeKind::Static, p, r));
    }
    let network = Network::new(nodes).expect("unique ids, one sink");
    let level = network.node(NodeId(2)).and_then(|n| n.level);
    for e in &mut entries {
        e.hop = Some(level.map_or(u32::MAX, |l| l + 1));
    }
    let received: u64 = entries.iter().map(|e| e.packets_received).sum();
    let forwarded = rng.gen_range(0..received);
    let cm = CongestionMessage {
        congested: NodeId(2),
        level,
        received,
        forwarded,
        recv_per_period: received as f64 / span,
        fwd_per_period: forwarded as f64 / span,
        window_start: 0.0,
        detected_at: span,
        neighbors: entries,
    };
    SyntheticCm { network, cm, rates }
}

/// Runs a built-in scenario sweep with all available cores.
pub fn sweep(scenario: &str, algorithms: &[Algorithm], rates: &[f64], seeds: &[u64]) -> Vec<SweepRecord> {
    let mut plan = SweepPlan::new(builtin(scenario).expect("built-in"), algorithms.to_vec(), seeds.to_vec());
    plan.rates = rates.to_vec();
    plan.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = run_sweep(&plan, None).expect("sweep");
    assert!(out.failures.is_empty(), "failed runs: {:?}", out.failures);
    out.records
}

pub fn mean<'a>(records: impl IntoIterator<Item = &'a SweepRecord>, f: impl Fn(&SweepRecord) -> f64) -> f64 {
    let v: Vec<f64> = records.into_iter().map(f).collect();
    v.iter().sum::<f64>() / v.len() as f64
}
