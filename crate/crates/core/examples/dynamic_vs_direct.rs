//! The three algorithms side by side on `example26`, with the placements
//! each relief algorithm made.
//!
//! `cargo run --release --example dynamic_vs_direct [rate] [seed]`

use mobilecc::scenario::builtin;
use mobilecc::{run, Algorithm};

fn main() -> mobilecc::Result<()> {
    let mut args = std::env::args().skip(1);
    let rate: f64 = args.next().map_or(Ok(150.0), |s| s.parse()).expect("rate");
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse()).expect("seed");

    let sc = builtin("example26")?;
    for algorithm in Algorithm::ALL {
        let mut cfg = sc.sim_config();
        cfg.algorithm = algorithm;
        cfg.seed = seed;
        cfg.source_rate = sc.per_source_rate(rate)?;
        let m = run(sc.network()?, &cfg)?;
        println!(
            "{algorithm:<8} delivery {:.3}  delay {:.4} s  energy {:.0} mJ  mobiles {}  groups {:?}",
            m.delivery_ratio,
            m.mean_delay,
            m.total_energy,
            m.mobiles_used,
            m.group_sizes()
        );
        for p in &m.placements {
            println!(
                "    mobile {} for node {} at ({:.1}, {:.1}) serving [{}] -> {}, active from {}",
                p.mobile,
                p.congested,
                p.target.x,
                p.target.y,
                ids(&p.served),
                p.next_hop,
                p.activated_at.map_or("never".to_string(), |t| format!("{t:.1} s")),
            );
        }
    }
    Ok(())
}

fn ids(list: &[mobilecc::NodeId]) -> String {
    list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}
