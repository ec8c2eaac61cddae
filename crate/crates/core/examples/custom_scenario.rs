//! Loading a scenario from text or a file and inspecting the network it
//! builds: levels, neighbors and the parked mobile pool.
//!
//! `cargo run --example custom_scenario [path]`

use mobilecc::scenario::{builtin, load_scenario};
use mobilecc::NodeKind;

fn main() -> mobilecc::Result<()> {
    let sc = match std::env::args().nth(1) {
        Some(path) => load_scenario(path.as_ref())?,
        None => builtin("example26")?,
    };
    println!(
        "{}: {} sink, {} static ({} sources), {} mobile; range {} m",
        sc.name,
        sc.count(NodeKind::Sink),
        sc.count(NodeKind::Static),
        sc.sources().count(),
        sc.pool_size(),
        sc.tx_range
    );
    let net = sc.network()?;
    for n in net.nodes() {
        let neighbors: Vec<u32> = n.neighbors.iter().map(|e| e.neighbor.0).collect();
        println!(
            "{:>3} {:<6} ({:>6.1}, {:>6.1}) level {:<4} {} neighbors {:?}",
            n.id,
            format!("{:?}", n.kind),
            n.position.x,
            n.position.y,
            n.level.map_or("-".to_string(), |l| l.to_string()),
            if n.source { "source" } else { "      " },
            neighbors
        );
    }
    Ok(())
}
