//! Event trace of a tiny hand-written scenario: every generation, channel
//! access attempt, reception and drop, one line each.
//!
//! `cargo run --example event_trace`

use mobilecc::scenario::parse;
use mobilecc::{run_traced, Algorithm};

const SCENARIO: &str = "\
name = chain3
tx_range = 25
sim_time = 0.5
# sink, one relay, one source
[nodes]
1 sink   0  0
2 static 20 0
3 source 40 0
4 mobile 1  0
";

fn main() -> mobilecc::Result<()> {
    let sc = parse(SCENARIO, "inline")?;
    let mut cfg = sc.sim_config();
    cfg.algorithm = Algorithm::Baseline;
    cfg.source_rate = 10.0;
    let (m, trace) = run_traced(sc.network()?, &cfg)?;
    print!("{trace}");
    println!(
        "generated {} delivered {} dropped {} still queued {}",
        m.generated, m.delivered, m.dropped, m.residual
    );
    Ok(())
}
