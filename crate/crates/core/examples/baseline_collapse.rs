//! Delivery ratio of plain level-based forwarding on `example26` as the
//! offered load grows.
//!
//! `cargo run --release --example baseline_collapse [seeds] [sim_time]`

use mobilecc::metrics::aggregate_all;
use mobilecc::scenario::builtin;
use mobilecc::sweep::{run_sweep, SweepPlan};
use mobilecc::Algorithm;

fn main() -> mobilecc::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(Ok(4), |s| s.parse()).expect("seed count");
    let sim_time: f64 = args.next().map_or(Ok(120.0), |s| s.parse()).expect("sim time");

    let mut plan = SweepPlan::new(builtin("example26")?, vec![Algorithm::Baseline], (1..=seeds).collect());
    plan.config.sim_time = sim_time;
    plan.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = run_sweep(&plan, None)?;
    println!("rate pkts/s  delivery ratio  delivered/s  mean delay s");
    for a in aggregate_all(&out.records)? {
        println!(
            "{:>11} {:>15.3} {:>12.1} {:>13.4}",
            a.rate_pps,
            a.delivery_ratio.mean,
            a.delivered.mean / sim_time,
            a.mean_delay.mean
        );
    }
    Ok(())
}
