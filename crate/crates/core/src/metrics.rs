//! Per-run results, sweep aggregation and result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyLedger;
use crate::engine::Algorithm;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::topology::{NodeId, NodeKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub id: NodeId,
    pub kind: NodeKind,
    pub received: u64,
    pub transmitted: u64,
    pub dropped: u64,
    pub energy_mj: f64,
    pub ledger: EnergyLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub congested: NodeId,
    pub mobile: NodeId,
    pub target: Point,
    pub served: Vec<NodeId>,
    pub next_hop: NodeId,
    pub dispatched_at: f64,
    pub arrived_at: f64,
    /// When the group's overrides went live; unset if the run ended first.
    pub activated_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    /// Data packets still queued (or on the air) when the run ended.
    pub residual: u64,
    pub delivery_ratio: f64,
    /// Seconds, source creation to sink reception, delivered packets only.
    pub mean_delay: f64,
    pub total_energy: f64,
    pub mobiles_used: usize,
    pub cms_emitted: u64,
    pub cms_delivered: u64,
    pub cms_lost: u64,
    pub events: u64,
    pub nodes: Vec<NodeReport>,
    pub placements: Vec<PlacementRecord>,
}

impl RunMetrics {
    pub fn is_conserved(&self) -> bool {
        self.generated == self.delivered + self.dropped + self.residual
    }

    /// Lengths of the dispatched groups, in dispatch order.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<(f64, NodeId, usize)> = Vec::new();
        for p in &self.placements {
            match sizes
                .iter_mut()
                .find(|(t, c, _)| *t == p.dispatched_at && *c == p.congested)
            {
                Some(entry) => entry.2 += 1,
                None => sizes.push((p.dispatched_at, p.congested, 1)),
            }
        }
        sizes.into_iter().map(|(_, _, n)| n).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scenario: String,
    pub algorithm: Algorithm,
    /// Aggregate offered load, packets per second over all sources.
    pub rate_pps: f64,
    pub seed: u64,
    pub metrics: RunMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single record.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Result<Stat> {
        if values.is_empty() {
            return Err(Error::EmptyAggregation);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Stat { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub rate_pps: f64,
    pub runs: usize,
    pub generated: Stat,
    pub delivered: Stat,
    pub dropped: Stat,
    pub delivery_ratio: Stat,
    pub mean_delay: Stat,
    pub total_energy: Stat,
    pub mobiles_used: Stat,
}

/// Mean and sample deviation of each metric over records of one
/// (scenario, algorithm, rate) cell.
pub fn aggregate(records: &[SweepRecord]) -> Result<Aggregate> {
    let first = records.first().ok_or(Error::EmptyAggregation)?;
    if records.iter().any(|r| {
        r.scenario != first.scenario || r.algorithm != first.algorithm || r.rate_pps != first.rate_pps
    }) {
        return Err(Error::InvalidInput("records span more than one sweep cell".into()));
    }
    let col = |f: fn(&RunMetrics) -> f64| -> Result<Stat> {
        Stat::of(&records.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>())
    };
    Ok(Aggregate {
        scenario: first.scenario.clone(),
        algorithm: first.algorithm,
        rate_pps: first.rate_pps,
        runs: records.len(),
        generated: col(|m| m.generated as f64)?,
        delivered: col(|m| m.delivered as f64)?,
        dropped: col(|m| m.dropped as f64)?,
        delivery_ratio: col(|m| m.delivery_ratio)?,
        mean_delay: col(|m| m.mean_delay)?,
        total_energy: col(|m| m.total_energy)?,
        mobiles_used: col(|m| m.mobiles_used as f64)?,
    })
}

/// Groups records by cell (scenario, algorithm, rate) in a stable order and
/// aggregates each group.
pub fn aggregate_all(records: &[SweepRecord]) -> Result<Vec<Aggregate>> {
    let mut cells: BTreeMap<(String, u8, u64), Vec<SweepRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.scenario.clone(), r.algorithm.rank(), r.rate_pps.to_bits()))
            .or_default()
            .push(r.clone());
    }
    let mut out: Vec<Aggregate> = cells.values().map(|v| aggregate(v)).collect::<Result<_>>()?;
    out.sort_by(|a, b| {
        a.scenario
            .cmp(&b.scenario)
            .then(a.algorithm.rank().cmp(&b.algorithm.rank()))
            .then(a.rate_pps.total_cmp(&b.rate_pps))
    });
    Ok(out)
}

pub const CSV_HEADER: &str = "scenario,algorithm,rate_pps,seed,generated,delivered,dropped,delivery_ratio,mean_delay_s,total_energy_mj,mobiles_used";

/// Renders the results table; rows keep the order of `records`.
pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6},{:.6},{:.3},{}",
            r.scenario,
            r.algorithm,
            r.rate_pps,
            r.seed,
            m.generated,
            m.delivered,
            m.dropped,
            m.delivery_ratio,
            m.mean_delay,
            m.total_energy,
            m.mobiles_used
        );
    }
    out
}

/// Writes `results.csv` and `summary.json` into `dir`.
pub fn emit(records: &[SweepRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), to_csv(records))?;
    let summary = if records.is_empty() {
        Vec::new()
    } else {
        aggregate_all(records)?
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    Ok(())
}
