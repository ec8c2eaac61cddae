//! Scenario files: explicit node tables or seeded grid generators.
//!
//! Grammar (one statement per line, `#` starts a comment):
//!
//! ```text
//! file      := { setting | section }
//! setting   := KEY "=" VALUE
//! section   := "[nodes]" { node_row } | "[generator]" { setting }
//! node_row  := ID KIND X Y          ; KIND in sink | static | source | mobile
//! ```
//!
//! Top-level keys: `name`, `tx_range`, `queue_len`, `sim_time`,
//! `sample_period`, `mobile_speed`, `rates` (comma list, aggregate pkts/s).
//! Generator keys: `rows`, `cols`, `spacing`, `nodes` (sink included),
//! `source_probability`, `source_region` and `sink_region` (`x0,y0,x1,y1`),
//! `pool`, `seed`. `source` rows are static nodes that generate traffic.
//! Mobiles listed in `[nodes]` form the pool; their coordinates are the
//! parking spot near the sink.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::SimConfig;
use crate::error::{Error, Result};
use crate::geometry::{distance, Point};
use crate::topology::{Network, NodeId, NodeKind, NodeState};

const BUILTINS: &[(&str, &str)] = &[
    ("example26", include_str!("../scenarios/example26.scn")),
    ("uniform50", include_str!("../scenarios/uniform50.scn")),
    ("uniform60", include_str!("../scenarios/uniform60.scn")),
    ("uniform70", include_str!("../scenarios/uniform70.scn")),
    ("uniform80", include_str!("../scenarios/uniform80.scn")),
    ("uniform90", include_str!("../scenarios/uniform90.scn")),
    ("uniform100", include_str!("../scenarios/uniform100.scn")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Point,
    pub source: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    /// Sink plus static nodes.
    pub nodes: usize,
    pub source_probability: f64,
    pub source_region: Region,
    pub sink_region: Region,
    pub pool: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub nodes: Vec<NodeSpec>,
    pub generator: Option<GeneratorSpec>,
    pub tx_range: f64,
    pub queue_len: usize,
    pub sim_time: f64,
    pub sample_period: f64,
    pub mobile_speed: f64,
    /// Default aggregate offered loads, pkts/s.
    pub rates: Vec<f64>,
}

impl Scenario {
    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn sources(&self) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.iter().filter(|n| n.source)
    }

    pub fn pool_size(&self) -> usize {
        self.count(NodeKind::Mobile)
    }

    /// Fresh network for one run.
    pub fn network(&self) -> Result<Network> {
        let nodes = self
            .nodes
            .iter()
            .map(|s| {
                let mut n = NodeState::new(s.id, s.kind, s.position, self.tx_range, self.queue_len);
                n.source = s.source;
                n
            })
            .collect();
        Network::new(nodes)
    }

    /// Scenario defaults layered over the library defaults.
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            sim_time: self.sim_time,
            queue_len: self.queue_len,
            tx_range: self.tx_range,
            sample_period: self.sample_period,
            mobile_speed: self.mobile_speed,
            ..SimConfig::default()
        }
    }

    /// Per-source rate for an aggregate offered load.
    pub fn per_source_rate(&self, aggregate: f64) -> Result<f64> {
        let n = self.sources().count();
        if n == 0 {
            return Err(Error::Scenario(format!("{} has no sources", self.name)));
        }
        Ok(aggregate / n as f64)
    }

    fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(Error::Scenario(format!("duplicate node id {}", n.id)));
            }
            if !n.position.is_finite() {
                return Err(Error::Scenario(format!("node {} has a non-finite position", n.id)));
            }
        }
        match self.count(NodeKind::Sink) {
            1 => {}
            0 => return Err(Error::Scenario("no sink".into())),
            k => return Err(Error::Scenario(format!("{k} sinks, expected exactly one"))),
        }
        for (key, v) in [
            ("tx_range", self.tx_range),
            ("sim_time", self.sim_time),
            ("sample_period", self.sample_period),
            ("mobile_speed", self.mobile_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Scenario(format!("{key} must be positive, got {v}")));
            }
        }
        if self.queue_len == 0 {
            return Err(Error::Scenario("queue_len must be positive".into()));
        }
        if self.rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Scenario("rates must be positive".into()));
        }
        let sink = self.nodes.iter().find(|n| n.kind == NodeKind::Sink).expect("one sink");
        for m in self.nodes.iter().filter(|n| n.kind == NodeKind::Mobile) {
            if distance(m.position, sink.position) > self.tx_range {
                return Err(Error::Scenario(format!("pool mobile {} is not parked next to the sink", m.id)));
            }
        }
        Ok(())
    }
}

fn perr(origin: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(origin: &str, line: usize, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| perr(origin, line, format!("`{key}`: cannot parse `{v}`")))
}

fn floats(origin: &str, line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| num(origin, line, key, x)).collect()
}

fn region(origin: &str, line: usize, key: &str, v: &str) -> Result<Region> {
    match floats(origin, line, key, v)?.as_slice() {
        &[x0, y0, x1, y1] if x0 <= x1 && y0 <= y1 => Ok(Region { x0, y0, x1, y1 }),
        _ => Err(perr(origin, line, format!("`{key}` expects x0,y0,x1,y1 with x0<=x1, y0<=y1"))),
    }
}

#[derive(Default)]
struct GenDraft {
    rows: Option<usize>,
    cols: Option<usize>,
    spacing: Option<f64>,
    nodes: Option<usize>,
    source_probability: Option<f64>,
    source_region: Option<Region>,
    sink_region: Option<Region>,
    pool: Option<usize>,
    seed: Option<u64>,
}

#[derive(PartialEq)]
enum Section {
    Top,
    Nodes,
    Generator,
}

/// Parses scenario text; `origin` names the source in error messages.
pub fn parse(text: &str, origin: &str) -> Result<Scenario> {
    let mut sc = Scenario {
        name: String::new(),
        nodes: Vec::new(),
        generator: None,
        tx_range: 25.0,
        queue_len: 8,
        sim_time: 600.0,
        sample_period: 1.0,
        mobile_speed: 1.0,
        rates: vec![25.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0],
    };
    let mut gen: Option<GenDraft> = None;
    let mut section = Section::Top;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') {
            section = match body {
                "[nodes]" => Section::Nodes,
                "[generator]" => {
                    gen.get_or_insert_with(GenDraft::default);
                    Section::Generator
                }
                other => return Err(perr(origin, line, format!("unknown section {other}"))),
            };
            continue;
        }
        if section == Section::Nodes {
            let f: Vec<&str> = body.split_whitespace().collect();
            let [id, kind, x, y] = f.as_slice() else {
                return Err(perr(origin, line, "node row expects: id kind x y"));
            };
            let id: u32 = num(origin, line, "id", id)?;
            let (kind, source) = match *kind {
                "sink" => (NodeKind::Sink, false),
                "static" => (NodeKind::Static, false),
                "source" => (NodeKind::Static, true),
                "mobile" => (NodeKind::Mobile, false),
                other => return Err(perr(origin, line, format!("unknown node kind `{other}`"))),
            };
            sc.nodes.push(NodeSpec {
                id: NodeId(id),
                kind,
                position: Point::new(num(origin, line, "x", x)?, num(origin, line, "y", y)?),
                source,
            });
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(perr(origin, line, "expected `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if section == Section::Generator {
            let g = gen.as_mut().expect("section opened");
            match key {
                "rows" => g.rows = Some(num(origin, line, key, value)?),
                "cols" => g.cols = Some(num(origin, line, key, value)?),
                "spacing" => g.spacing = Some(num(origin, line, key, value)?),
                "nodes" => g.nodes = Some(num(origin, line, key, value)?),
                "source_probability" => g.source_probability = Some(num(origin, line, key, value)?),
                "source_region" => g.source_region = Some(region(origin, line, key, value)?),
                "sink_region" => g.sink_region = Some(region(origin, line, key, value)?),
                "pool" => g.pool = Some(num(origin, line, key, value)?),
                "seed" => g.seed = Some(num(origin, line, key, value)?),
                _ => return Err(perr(origin, line, format!("unknown generator key `{key}`"))),
            }
            continue;
        }
        match key {
            "name" => sc.name = value.to_string(),
            "tx_range" => sc.tx_range = num(origin, line, key, value)?,
            "queue_len" => sc.queue_len = num(origin, line, key, value)?,
            "sim_time" => sc.sim_time = num(origin, line, key, value)?,
            "sample_period" => sc.sample_period = num(origin, line, key, value)?,
            "mobile_speed" => sc.mobile_speed = num(origin, line, key, value)?,
            "rates" => sc.rates = floats(origin, line, key, value)?,
            _ => return Err(perr(origin, line, format!("unknown key `{key}`"))),
        }
    }
    if sc.name.is_empty() {
        return Err(perr(origin, 0, "missing `name`"));
    }
    if let Some(g) = gen {
        if !sc.nodes.is_empty() {
            return Err(perr(origin, 0, "a scenario has either [nodes] or [generator], not both"));
        }
        let missing = |k: &str| perr(origin, 0, format!("generator is missing `{k}`"));
        let spec = GeneratorSpec {
            rows: g.rows.ok_or_else(|| missing("rows"))?,
            cols: g.cols.ok_or_else(|| missing("cols"))?,
            spacing: g.spacing.ok_or_else(|| missing("spacing"))?,
            nodes: g.nodes.ok_or_else(|| missing("nodes"))?,
            source_probability: g.source_probability.ok_or_else(|| missing("source_probability"))?,
            source_region: g.source_region.ok_or_else(|| missing("source_region"))?,
            sink_region: g.sink_region.ok_or_else(|| missing("sink_region"))?,
            pool: g.pool.ok_or_else(|| missing("pool"))?,
            seed: g.seed.ok_or_else(|| missing("seed"))?,
        };
        sc.nodes = generate(&spec, sc.tx_range)?;
        sc.generator = Some(spec);
    }
    sc.validate()?;
    Ok(sc)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    parse(&text, &path.display().to_string())
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(n, _)| *n)
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let (_, text) = BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Scenario(format!("no built-in scenario `{name}`")))?;
    parse(text, name)
}

/// A built-in name or a path to a scenario file.
pub fn resolve(name_or_path: &str) -> Result<Scenario> {
    if builtin_names().any(|n| n == name_or_path) {
        builtin(name_or_path)
    } else {
        load_scenario(Path::new(name_or_path))
    }
}

const MAX_ATTEMPTS: usize = 1000;

/// Deterministic grid topology: sink at a lattice point in the sink region,
/// the remaining static nodes drawn without replacement from the lattice,
/// sources drawn by probability inside the source region, the pool parked
/// beside the sink. Redraws until every node is reachable from the sink.
pub fn generate(spec: &GeneratorSpec, tx_range: f64) -> Result<Vec<NodeSpec>> {
    let cells = spec.rows * spec.cols;
    if spec.nodes < 2 || spec.nodes > cells {
        return Err(Error::Scenario(format!("generator wants {} nodes on {cells} lattice points", spec.nodes)));
    }
    if !(spec.spacing > 0.0) || !(0.0..=1.0).contains(&spec.source_probability) {
        return Err(Error::Scenario("generator spacing or probability out of range".into()));
    }
    let lattice: Vec<Point> = (0..spec.rows)
        .flat_map(|r| (0..spec.cols).map(move |c| (r, c)))
        .map(|(r, c)| Point::new(c as f64 * spec.spacing, r as f64 * spec.spacing))
        .collect();
    let sink_cells: Vec<usize> = (0..cells).filter(|&k| spec.sink_region.contains(lattice[k])).collect();
    if sink_cells.is_empty() {
        return Err(Error::Scenario("sink region holds no lattice point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        let sink = *sink_cells.choose(&mut rng).expect("non-empty");
        let mut rest: Vec<usize> = (0..cells).filter(|&k| k != sink).collect();
        rest.shuffle(&mut rng);
        let mut chosen: Vec<usize> = rest[..spec.nodes - 1].to_vec();
        chosen.sort_unstable();
        let mut nodes = vec![NodeSpec {
            id: NodeId(1),
            kind: NodeKind::Sink,
            position: lattice[sink],
            source: false,
        }];
        for (k, &cell) in chosen.iter().enumerate() {
            let p = lattice[cell];
            let source = spec.source_region.contains(p) && rng.gen_bool(spec.source_probability);
            nodes.push(NodeSpec {
                id: NodeId(k as u32 + 2),
                kind: NodeKind::Static,
                position: p,
                source,
            });
        }
        if !nodes.iter().any(|n| n.source) || !connected(&nodes, tx_range) {
            continue;
        }
        let sp = lattice[sink];
        let base = nodes.len() as u32 + 1;
        for m in 0..spec.pool {
            // parked on a small ring around the sink
            let a = m as f64 * std::f64::consts::TAU / spec.pool.max(1) as f64;
            nodes.push(NodeSpec {
                id: NodeId(base + m as u32),
                kind: NodeKind::Mobile,
                position: Point::new(sp.x + a.cos(), sp.y + a.sin()),
                source: false,
            });
        }
        return Ok(nodes);
    }
    Err(Error::Scenario(format!("no connected layout found in {MAX_ATTEMPTS} draws")))
}

fn connected(nodes: &[NodeSpec], r: f64) -> bool {
    let mut seen = vec![false; nodes.len()];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..nodes.len() {
            if !seen[j] && distance(nodes[i].position, nodes[j].position) <= r + crate::geometry::EPS {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "name = small\n[nodes]\n1 sink 0 0\n2 source 10 0\n3 mobile 1 0\n";

    #[test]
    fn parses_small_table() {
        let s = parse(SMALL, "t").unwrap();
        assert_eq!(s.count(NodeKind::Sink), 1);
        assert_eq!(s.sources().count(), 1);
        assert_eq!(s.pool_size(), 1);
        assert_eq!(s.network().unwrap().pool_len(), 1);
    }

    #[test]
    fn two_sinks_rejected() {
        let t = "name = x\n[nodes]\n1 sink 0 0\n2 sink 5 0\n";
        assert!(matches!(parse(t, "t"), Err(Error::Scenario(_))));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let t = "name = x\n[nodes]\n1 sink 0 0\n2 static 5 0\n2 static 6 0\n";
        assert!(matches!(parse(t, "t"), Err(Error::Scenario(_))));
    }

    #[test]
    fn malformed_row_reports_line() {
        let t = "name = x\n[nodes]\n1 sink 0 0\n2 static five 0\n";
        match parse(t, "f.scn") {
            Err(Error::Parse { line, path, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(path, "f.scn");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(parse("name = x\ncolour = red\n", "t"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn example26_shape() {
        let s = builtin("example26").unwrap();
        assert_eq!(s.count(NodeKind::Sink), 1);
        assert_eq!(s.count(NodeKind::Static), 19);
        assert_eq!(s.count(NodeKind::Mobile), 6);
        assert_eq!(s.sources().count(), 9);
    }

    #[test]
    fn generators_are_deterministic() {
        for name in ["uniform50", "uniform100"] {
            let a = builtin(name).unwrap();
            let b = builtin(name).unwrap();
            assert_eq!(a, b);
            assert!(a.sources().count() > 0);
        }
        let s = builtin("uniform70").unwrap();
        assert_eq!(s.count(NodeKind::Sink) + s.count(NodeKind::Static), 70);
    }

    #[test]
    fn every_builtin_loads_connected() {
        for name in builtin_names() {
            let s = builtin(name).unwrap();
            let net = s.network().unwrap();
            for src in s.sources() {
                assert!(net.node(src.id).unwrap().level.is_some(), "{name}: source {} unreachable", src.id);
            }
        }
    }
}
