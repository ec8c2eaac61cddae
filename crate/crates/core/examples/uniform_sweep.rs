//! A resumable multi-threaded sweep over one of the generated uniform
//! topologies, written to an output directory as CSV and JSON.
//!
//! `cargo run --release --example uniform_sweep [scenario] [out_dir]`
//!
//! Running it twice against the same directory reuses every finished run.

use std::path::PathBuf;

use mobilecc::metrics::aggregate_all;
use mobilecc::scenario::builtin;
use mobilecc::sweep::{run_sweep, SweepPlan};
use mobilecc::Algorithm;

fn main() -> mobilecc::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "uniform50".into());
    let out = args.next().map_or_else(|| std::env::temp_dir().join("mobilecc-uniform"), PathBuf::from);

    let sc = builtin(&name)?;
    println!("{}: {} nodes, {} sources, pool of {}", sc.name, sc.nodes.len(), sc.sources().count(), sc.pool_size());
    let mut plan = SweepPlan::new(sc, Algorithm::ALL.to_vec(), vec![1, 2, 3]);
    plan.config.sim_time = 120.0;
    plan.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let outcome = run_sweep(&plan, Some(&out))?;
    println!(
        "{} runs executed, {} resumed; results in {}",
        outcome.executed,
        outcome.resumed,
        out.display()
    );
    for a in aggregate_all(&outcome.records)? {
        println!(
            "{:<8} {:>5} pkts/s  delivery {:.3}  delay {:.4} s  energy {:.0} mJ  mobiles {:.1}",
            a.algorithm.as_str(),
            a.rate_pps,
            a.delivery_ratio.mean,
            a.mean_delay.mean,
            a.total_energy.mean,
            a.mobiles_used.mean
        );
    }
    Ok(())
}
