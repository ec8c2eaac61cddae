//! Energy model: per-node ledgers in timer ticks, the two readings of the
//! scale factor, and the network total after a short simulated run.
//!
//! `cargo run --example energy_accounting`

use mobilecc::energy::{node_energy, node_energy_scaled, ticks, EnergyLedger, EnergyScale};
use mobilecc::scenario::builtin;

fn main() -> mobilecc::Result<()> {
    let one_second_tx = EnergyLedger {
        transmit_ticks: ticks(1.0),
        ..EnergyLedger::default()
    };
    println!("1 s of transmission: {} mJ", node_energy(&one_second_tx));
    println!(
        "same ledger, literal scale: {} mJ",
        node_energy_scaled(&one_second_tx, EnergyScale::Literal)
    );

    let sc = builtin("example26")?;
    let mut cfg = sc.sim_config();
    cfg.sim_time = 60.0;
    cfg.source_rate = sc.per_source_rate(50.0)?;
    let m = mobilecc::run(sc.network()?, &cfg)?;
    println!("example26, 60 s at 50 pkts/s: {:.1} mJ in total", m.total_energy);
    let mut nodes = m.nodes.clone();
    nodes.sort_by(|a, b| b.energy_mj.total_cmp(&a.energy_mj));
    println!("  id  kind     tx ticks  listen ticks   cpu ticks   lpm ticks   energy mJ");
    for n in nodes.iter().take(5) {
        println!(
            "{:>4}  {:<7} {:>9} {:>13} {:>11} {:>11} {:>11.1}",
            n.id,
            format!("{:?}", n.kind),
            n.ledger.transmit_ticks,
            n.ledger.listen_ticks,
            n.ledger.cpu_ticks,
            n.ledger.lpm_ticks,
            n.energy_mj
        );
    }
    Ok(())
}
