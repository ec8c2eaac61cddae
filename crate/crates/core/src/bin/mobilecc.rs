use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use mobilecc::metrics::{aggregate_all, to_csv};
use mobilecc::scenario::{builtin_names, resolve};
use mobilecc::sweep::{run_sweep, RateMode, SweepPlan};
use mobilecc::Algorithm;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Baseline,
    Dynamic,
    Direct,
    All,
}

impl AlgorithmArg {
    fn expand(self) -> Vec<Algorithm> {
        match self {
            AlgorithmArg::Baseline => vec![Algorithm::Baseline],
            AlgorithmArg::Dynamic => vec![Algorithm::Dynamic],
            AlgorithmArg::Direct => vec![Algorithm::Direct],
            AlgorithmArg::All => Algorithm::ALL.to_vec(),
        }
    }
}

/// Sweep a scenario over algorithms, offered loads and seeds.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// Built-in scenario name or path to a scenario file.
    #[arg(long, required_unless_present = "list")]
    scenario: Option<String>,

    #[arg(long, value_enum, default_value = "all")]
    algorithm: AlgorithmArg,

    /// Aggregate offered loads in pkts/s, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "per_source_rates")]
    rates: Option<Vec<f64>>,

    /// Per-source rates in pkts/s, comma separated.
    #[arg(long, value_delimiter = ',')]
    per_source_rates: Option<Vec<f64>>,

    /// Seed count `n` (seeds 1..=n) or a comma list of seeds.
    #[arg(long, default_value = "1")]
    seeds: String,

    /// Simulated seconds per run.
    #[arg(long)]
    sim_time: Option<f64>,

    /// Mobile travel speed in m/s.
    #[arg(long)]
    mobile_speed: Option<f64>,

    /// Output directory; completed runs found there are reused.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write one event trace per run under `<out>/traces`.
    #[arg(long, requires = "out")]
    trace: bool,

    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,

    /// List built-in scenarios and exit.
    #[arg(long, exclusive = true)]
    list: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<u64>().map_err(|e| format!("bad seed `{p}`: {e}")))
        .collect::<Result<Vec<u64>, String>>()?;
    match nums.as_slice() {
        [n] if !text.contains(',') => {
            if *n == 0 {
                return Err("seed count must be positive".into());
            }
            Ok((1..=*n).collect())
        }
        _ => Ok(nums),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for name in builtin_names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let scenario = resolve(cli.scenario.as_deref().unwrap_or_default())?;
    let seeds = parse_seeds(&cli.seeds)?;
    let mut plan = SweepPlan::new(scenario, cli.algorithm.expand(), seeds);
    if let Some(r) = cli.rates {
        plan.rates = r;
    }
    if let Some(r) = cli.per_source_rates {
        plan.rates = r;
        plan.rate_mode = RateMode::PerSource;
    }
    if let Some(t) = cli.sim_time {
        plan.config.sim_time = t;
    }
    if let Some(v) = cli.mobile_speed {
        plan.config.mobile_speed = v;
    }
    plan.config.validate()?;
    plan.trace = cli.trace;
    plan.jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    let outcome = run_sweep(&plan, cli.out.as_deref())?;
    if cli.out.is_none() {
        print!("{}", to_csv(&outcome.records));
    }
    for agg in aggregate_all(&outcome.records).unwrap_or_default() {
        eprintln!(
            "{} {:<8} {:>7} pkts/s  ratio {:.3} ± {:.3}  delay {:.4} s  mobiles {:.2}",
            agg.scenario,
            agg.algorithm.as_str(),
            agg.rate_pps,
            agg.delivery_ratio.mean,
            agg.delivery_ratio.std,
            agg.mean_delay.mean,
            agg.mobiles_used.mean,
        );
    }
    eprintln!(
        "{} runs executed, {} resumed, {} failed",
        outcome.executed,
        outcome.resumed,
        outcome.failures.len()
    );
    for f in &outcome.failures {
        eprintln!("failed: {} {} seed {}: {}", f.algorithm, f.rate_pps, f.seed, f.error);
    }
    Ok(outcome.complete())
}
