//! Parallel, resumable parameter sweeps.
//!
//! Output directory layout:
//!
//! ```text
//! <out>/sweep.json          base configuration; a rerun must match it
//! <out>/runs/<key>.json     one completed record per run
//! <out>/traces/<key>.log    event traces, when enabled
//! <out>/failures.json       runs that returned an error
//! <out>/results.csv         all records, sweep order
//! <out>/summary.json        per-cell aggregates
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::engine::{run, run_traced, Algorithm, SimConfig};
use crate::error::{Error, Result};
use crate::metrics::{emit, SweepRecord};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// Rates are total offered load, split evenly over the sources.
    Aggregate,
    /// Rates apply to each source.
    PerSource,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub scenario: Scenario,
    pub algorithms: Vec<Algorithm>,
    pub rates: Vec<f64>,
    pub rate_mode: RateMode,
    pub seeds: Vec<u64>,
    /// Base configuration; `source_rate`, `seed` and `algorithm` are set per run.
    pub config: SimConfig,
    pub jobs: usize,
    pub trace: bool,
}

impl SweepPlan {
    /// Plan with the scenario's defaults and rates.
    pub fn new(scenario: Scenario, algorithms: Vec<Algorithm>, seeds: Vec<u64>) -> Self {
        Self {
            rates: scenario.rates.clone(),
            config: scenario.sim_config(),
            scenario,
            algorithms,
            rate_mode: RateMode::Aggregate,
            seeds,
            jobs: 1,
            trace: false,
        }
    }

    /// Every (algorithm, rate, seed) combination in output order.
    pub fn cells(&self) -> Vec<RunKey> {
        let mut out = Vec::with_capacity(self.algorithms.len() * self.rates.len() * self.seeds.len());
        for &algorithm in &self.algorithms {
            for &rate in &self.rates {
                for &seed in &self.seeds {
                    out.push(RunKey { algorithm, rate, seed });
                }
            }
        }
        out
    }

    pub fn run_config(&self, key: &RunKey) -> Result<SimConfig> {
        let source_rate = match self.rate_mode {
            RateMode::Aggregate => self.scenario.per_source_rate(key.rate)?,
            RateMode::PerSource => key.rate,
        };
        Ok(SimConfig {
            source_rate,
            seed: key.seed,
            algorithm: key.algorithm,
            ..self.config.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunKey {
    pub algorithm: Algorithm,
    pub rate: f64,
    pub seed: u64,
}

impl RunKey {
    pub fn file_stem(&self, scenario: &str) -> String {
        format!("{scenario}_{}_{}_{}", self.algorithm, self.rate, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub algorithm: Algorithm,
    pub rate_pps: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Completed records in sweep order, resumed ones included.
    pub records: Vec<SweepRecord>,
    pub failures: Vec<RunFailure>,
    pub executed: usize,
    pub resumed: usize,
}

impl SweepOutcome {
    pub fn complete(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Manifest {
    scenario: Scenario,
    rate_mode: RateMode,
    config: SimConfig,
}

/// Executes one run of the plan.
pub fn run_one(plan: &SweepPlan, key: &RunKey) -> Result<(SweepRecord, Option<String>)> {
    let cfg = plan.run_config(key)?;
    let net = plan.scenario.network()?;
    let (metrics, trace) = if plan.trace {
        let (m, t) = run_traced(net, &cfg)?;
        (m, Some(t))
    } else {
        (run(net, &cfg)?, None)
    };
    Ok((
        SweepRecord {
            scenario: plan.scenario.name.clone(),
            algorithm: key.algorithm,
            rate_pps: key.rate,
            seed: key.seed,
            metrics,
        },
        trace,
    ))
}

/// Runs every combination of the plan across `plan.jobs` threads. With an
/// output directory, completed runs found there are reused and new results
/// are persisted as they finish. A failing run is recorded, not fatal.
pub fn run_sweep(plan: &SweepPlan, out: Option<&Path>) -> Result<SweepOutcome> {
    let keys = plan.cells();
    let mut slots: Vec<Option<SweepRecord>> = vec![None; keys.len()];
    let mut resumed = 0;
    if let Some(dir) = out {
        prepare(plan, dir)?;
        for (slot, key) in slots.iter_mut().zip(&keys) {
            let path = record_path(dir, &plan.scenario.name, key);
            if path.exists() {
                let rec: SweepRecord = serde_json::from_str(&fs::read_to_string(&path)?)?;
                *slot = Some(rec);
                resumed += 1;
            }
        }
    }
    let todo: Vec<usize> = (0..keys.len()).filter(|&i| slots[i].is_none()).collect();
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, std::result::Result<SweepRecord, String>)>> = Mutex::new(Vec::new());
    let workers = plan.jobs.max(1).min(todo.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&i) = todo.get(k) else { break };
                let key = &keys[i];
                let result = run_one(plan, key).and_then(|(rec, trace)| {
                    if let Some(dir) = out {
                        persist(dir, &plan.scenario.name, key, &rec, trace.as_deref())?;
                    }
                    Ok(rec)
                });
                done.lock()
                    .expect("no worker panics while holding the lock")
                    .push((i, result.map_err(|e| e.to_string())));
            });
        }
    });
    let mut failures = Vec::new();
    let mut finished = done.into_inner().expect("workers joined");
    finished.sort_by_key(|(i, _)| *i);
    let executed = finished.len();
    for (i, r) in finished {
        match r {
            Ok(rec) => slots[i] = Some(rec),
            Err(error) => failures.push(RunFailure {
                algorithm: keys[i].algorithm,
                rate_pps: keys[i].rate,
                seed: keys[i].seed,
                error,
            }),
        }
    }
    let records: Vec<SweepRecord> = slots.into_iter().flatten().collect();
    if let Some(dir) = out {
        emit(&records, dir)?;
        let mut text = serde_json::to_string_pretty(&failures)?;
        text.push('\n');
        fs::write(dir.join("failures.json"), text)?;
    }
    Ok(SweepOutcome {
        records,
        failures,
        executed,
        resumed,
    })
}

fn record_path(dir: &Path, scenario: &str, key: &RunKey) -> PathBuf {
    dir.join("runs").join(format!("{}.json", key.file_stem(scenario)))
}

fn prepare(plan: &SweepPlan, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("runs"))?;
    let manifest = Manifest {
        scenario: plan.scenario.clone(),
        rate_mode: plan.rate_mode,
        config: plan.config.clone(),
    };
    let path = dir.join("sweep.json");
    if path.exists() {
        let existing: Manifest = serde_json::from_str(&fs::read_to_string(&path)?)?;
        if existing != manifest {
            return Err(Error::Config(format!(
                "{} holds results of a different sweep configuration",
                dir.display()
            )));
        }
    } else {
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
    }
    Ok(())
}

fn persist(dir: &Path, scenario: &str, key: &RunKey, rec: &SweepRecord, trace: Option<&str>) -> Result<()> {
    if let Some(t) = trace {
        fs::create_dir_all(dir.join("traces"))?;
        fs::write(dir.join("traces").join(format!("{}.log", key.file_stem(scenario))), t)?;
    }
    // write-then-rename so an interrupted sweep never leaves half a record
    let path = record_path(dir, scenario, key);
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string(rec)?)?;
    fs::rename(tmp, path)?;
    Ok(())
}
