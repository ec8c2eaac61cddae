//! Deterministic discrete-event core: traffic generation, a CSMA-style
//! contention MAC, bounded queues, congestion reporting and mobile travel.

mod event;
mod trace;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::congestion::{detect, reset_window, Accounting, CongestionMessage, DetectionConfig};
use crate::energy::{node_energy_scaled, ticks, EnergyLedger, EnergyScale};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::metrics::{NodeReport, PlacementRecord, RunMetrics};
use crate::placement::{dispatch, plan_direct, plan_dynamic, Dispatch};
use crate::routing::{decide, hysteresis_flag, Overrides, RouteDecision};
use crate::topology::{Network, NodeId, NodeState};

pub use event::{to_nanos, to_seconds, EventKind, Nanos};
use event::{EventQueue, Payload};
pub use trace::TraceLine;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub uid: u64,
    pub source: NodeId,
    pub created_at: f64,
    pub hops: u32,
    /// Bytes.
    pub size: u32,
    /// Failed transmissions of this packet on the current hop.
    pub retries: u32,
    /// Set for congestion reports travelling to the sink.
    pub control: Option<Box<CongestionMessage>>,
}

impl Packet {
    pub fn new(uid: u64, source: NodeId, created_at: f64, size: u32) -> Self {
        Self {
            uid,
            source,
            created_at,
            hops: 0,
            size,
            retries: 0,
            control: None,
        }
    }

    pub fn is_control(&self) -> bool {
        self.control.is_some()
    }
}

/// Bounded FIFO with tail drop. The head stays queued while it is on the air.
#[derive(Debug, Clone)]
pub struct PacketQueue {
    buf: VecDeque<Packet>,
    capacity: usize,
}

impl PacketQueue {
    pub fn new(capacity: usize) -> Self {
        Self {
            buf: VecDeque::new(),
            capacity,
        }
    }

    /// Appends unless full; a rejected packet is handed back.
    pub fn push(&mut self, p: Packet) -> std::result::Result<(), Packet> {
        if self.is_full() {
            Err(p)
        } else {
            self.buf.push_back(p);
            Ok(())
        }
    }

    pub fn pop(&mut self) -> Option<Packet> {
        self.buf.pop_front()
    }

    pub fn front(&self) -> Option<&Packet> {
        self.buf.front()
    }

    pub fn front_mut(&mut self) -> Option<&mut Packet> {
        self.buf.front_mut()
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() >= self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.buf.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Enqueue {
    Accepted,
    Dropped(Packet),
}

/// Tail-drop admission of a data packet. The sink accepts everything and
/// keeps nothing; the caller accounts for delivery.
pub fn enqueue(node: &mut NodeState, packet: Packet) -> Enqueue {
    if node.is_sink() {
        return Enqueue::Accepted;
    }
    match node.queue.push(packet) {
        Ok(()) => Enqueue::Accepted,
        Err(p) => {
            node.counters.dropped += 1;
            Enqueue::Dropped(p)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Baseline,
    Dynamic,
    Direct,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Baseline, Algorithm::Dynamic, Algorithm::Direct];

    pub fn rank(self) -> u8 {
        match self {
            Algorithm::Baseline => 0,
            Algorithm::Dynamic => 1,
            Algorithm::Direct => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Baseline => "baseline",
            Algorithm::Dynamic => "dynamic",
            Algorithm::Direct => "direct",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(Algorithm::Baseline),
            "dynamic" => Ok(Algorithm::Dynamic),
            "direct" => Ok(Algorithm::Direct),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Contention MAC parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacConfig {
    /// Backoff slot, seconds.
    pub slot: f64,
    /// Backoff is uniform over `[1, backoff_slots]` slots.
    pub backoff_slots: u32,
    /// Retransmissions allowed after the first failed attempt.
    pub max_retries: u32,
    /// Transmissions younger than this are not yet sensed.
    pub cca_delay: f64,
    /// Processing charged to a node per handled event, seconds.
    pub cpu_per_event: f64,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self {
            slot: 0.00032,
            backoff_slots: 8,
            max_retries: 5,
            cca_delay: 0.000192,
            cpu_per_event: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub sim_time: f64,
    pub queue_len: usize,
    pub tx_range: f64,
    /// Bits per second.
    pub channel_rate: f64,
    /// Bytes.
    pub packet_size: u32,
    /// Packets per second per source.
    pub source_rate: f64,
    pub sample_period: f64,
    pub seed: u64,
    pub mobile_speed: f64,
    pub algorithm: Algorithm,
    pub detection: DetectionConfig,
    pub mac: MacConfig,
    pub energy_scale: EnergyScale,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sim_time: 600.0,
            queue_len: 8,
            tx_range: 25.0,
            channel_rate: 250_000.0,
            packet_size: 128,
            source_rate: 1.0,
            sample_period: 1.0,
            seed: 1,
            mobile_speed: 1.0,
            algorithm: Algorithm::Baseline,
            detection: DetectionConfig::default(),
            mac: MacConfig::default(),
            energy_scale: EnergyScale::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sim_time", self.sim_time),
            ("tx_range", self.tx_range),
            ("channel_rate", self.channel_rate),
            ("source_rate", self.source_rate),
            ("sample_period", self.sample_period),
            ("mobile_speed", self.mobile_speed),
            ("mac.slot", self.mac.slot),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("mac.cca_delay", self.mac.cca_delay), ("mac.cpu_per_event", self.mac.cpu_per_event)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.queue_len == 0 {
            return Err(Error::Config("queue_len must be positive".into()));
        }
        if self.packet_size == 0 {
            return Err(Error::Config("packet_size must be positive".into()));
        }
        if self.mac.backoff_slots == 0 {
            return Err(Error::Config("mac.backoff_slots must be positive".into()));
        }
        if self.detection.threshold == 0 || self.detection.threshold > self.queue_len {
            return Err(Error::Config(format!(
                "congestion threshold {} must lie in 1..={}",
                self.detection.threshold, self.queue_len
            )));
        }
        Ok(())
    }

    /// Airtime of one packet, seconds.
    pub fn tx_time(&self) -> f64 {
        f64::from(self.packet_size) * 8.0 / self.channel_rate
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Mac {
    /// A TxAttempt is scheduled.
    pending: bool,
    /// Index into `Simulation::air` while transmitting.
    on_air: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Transmission {
    sender: usize,
    receiver: usize,
    start: Nanos,
    end: Nanos,
    corrupted: bool,
    live: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Usage {
    tx_ns: u64,
    radio_ns: u64,
    radio_since: Option<Nanos>,
    events: u64,
}

#[derive(Debug, Clone)]
struct Group {
    dispatch: Dispatch,
    arrived: usize,
    activated_at: Option<f64>,
}

/// One simulation run. Drive it with [`Simulation::run_to_end`] or step
/// through events with [`Simulation::step`].
pub struct Simulation {
    network: Network,
    config: SimConfig,
    rng: ChaCha8Rng,
    queue: EventQueue,
    now: Nanos,
    end: Nanos,
    tx_ns: Nanos,
    sample_ns: Nanos,
    cca_ns: Nanos,
    reach: Vec<bool>,
    mac: Vec<Mac>,
    air: Vec<Transmission>,
    active: Vec<usize>,
    usage: Vec<Usage>,
    overrides: Overrides,
    groups: Vec<Group>,
    next_uid: u64,
    generated: u64,
    delivered: u64,
    dropped: u64,
    delay_sum: f64,
    cms_emitted: u64,
    cms_delivered: u64,
    events: u64,
    trace: Option<Vec<TraceLine>>,
}

impl Simulation {
    /// Validates the configuration and schedules the initial events.
    pub fn new(network: Network, config: SimConfig) -> Result<Self> {
        config.validate()?;
        let n = network.len();
        let mut sim = Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            queue: EventQueue::default(),
            now: 0,
            end: to_nanos(config.sim_time),
            tx_ns: to_nanos(config.tx_time()).max(1),
            sample_ns: to_nanos(config.sample_period).max(1),
            cca_ns: to_nanos(config.mac.cca_delay),
            reach: vec![false; n * n],
            mac: vec![Mac::default(); n],
            air: Vec::new(),
            active: Vec::new(),
            usage: vec![Usage::default(); n],
            overrides: Overrides::new(),
            groups: Vec::new(),
            next_uid: 0,
            generated: 0,
            delivered: 0,
            dropped: 0,
            delay_sum: 0.0,
            cms_emitted: 0,
            cms_delivered: 0,
            events: 0,
            trace: None,
            network,
            config,
        };
        sim.refresh_reach();
        for i in 0..n {
            if sim.network.at(i).radio_on {
                sim.usage[i].radio_since = Some(0);
            }
        }
        let period = 1.0 / sim.config.source_rate;
        for i in 0..n {
            let node = sim.network.at(i);
            if node.source && !node.is_sink() {
                let phase = sim.rng.gen_range(0.0..period);
                let id = node.id.0;
                sim.queue.push(to_nanos(phase), id, 0, Payload::Generate { node: i });
            }
        }
        sim.queue.push(sim.sample_ns, 0, 0, Payload::SampleTick);
        Ok(sim)
    }

    /// Records every processed event.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn overrides(&self) -> &Overrides {
        &self.overrides
    }

    pub fn now(&self) -> f64 {
        to_seconds(self.now)
    }

    pub fn trace(&self) -> Option<&[TraceLine]> {
        self.trace.as_deref()
    }

    /// Processes the next event. Returns false once the clock would pass
    /// `sim_time` or nothing is left.
    pub fn step(&mut self) -> Result<bool> {
        match self.queue.peek_time() {
            Some(t) if t <= self.end => {}
            _ => return Ok(false),
        }
        let ev = self.queue.pop().expect("peeked");
        self.now = ev.time;
        self.events += 1;
        match ev.payload {
            Payload::Generate { node } => self.on_generate(node),
            Payload::TxAttempt { node } => {
                self.mac[node].pending = false;
                self.charge(node);
                self.service_step(node)
            }
            Payload::Receive { tx } => self.on_tx_end(tx),
            Payload::SampleTick => self.on_sample(),
            Payload::MobileArrive { group, mobile } => self.on_arrive(group, mobile),
            Payload::CongestionMsgArrive { cm } => self.on_cm(*cm),
        }
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while self.step()? {}
        Ok(())
    }

    fn log(&mut self, kind: EventKind, node: NodeId, uid: u64, detail: impl FnOnce() -> String) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceLine {
                time: self.now,
                kind,
                node,
                uid,
                detail: detail(),
            });
        }
    }

    fn charge(&mut self, i: usize) {
        self.usage[i].events += 1;
    }

    fn refresh_reach(&mut self) {
        let n = self.network.len();
        self.reach.iter_mut().for_each(|r| *r = false);
        for a in 0..n {
            for &b in self.network.adjacent(a) {
                self.reach[a * n + b] = true;
            }
        }
    }

    fn hears(&self, from: usize, at: usize) -> bool {
        from == at || self.reach[from * self.network.len() + at]
    }

    fn backoff(&mut self) -> Nanos {
        let k = self.rng.gen_range(1..=self.config.mac.backoff_slots);
        to_nanos(self.config.mac.slot * f64::from(k))
    }

    /// Schedules a transmission attempt if the node is idle and has work.
    fn kick(&mut self, i: usize) {
        let node = self.network.at(i);
        if node.is_sink() || !node.radio_on || self.mac[i].pending || self.mac[i].on_air.is_some() {
            return;
        }
        if node.control.is_empty() && node.queue.is_empty() {
            return;
        }
        let id = node.id.0;
        let at = self.now + self.backoff();
        self.mac[i].pending = true;
        self.queue.push(at, id, 0, Payload::TxAttempt { node: i });
    }

    fn kick_all(&mut self) {
        for i in 0..self.network.len() {
            self.kick(i);
        }
    }

    fn fresh_packet(&mut self, source: NodeId) -> Packet {
        self.next_uid += 1;
        Packet::new(self.next_uid, source, self.now(), self.config.packet_size)
    }

    fn on_generate(&mut self, i: usize) -> Result<bool> {
        self.charge(i);
        let next = self.now + to_nanos(1.0 / self.config.source_rate);
        let id = self.network.at(i).id;
        self.queue.push(next, id.0, 0, Payload::Generate { node: i });
        let p = self.fresh_packet(id);
        let uid = p.uid;
        self.generated += 1;
        self.log(EventKind::Generate, id, uid, String::new);
        if self.network.at(i).level.is_none() {
            self.network.at_mut(i).counters.dropped += 1;
            self.dropped += 1;
            self.log(EventKind::Drop, id, uid, || "unreachable".into());
            return Ok(true);
        }
        match enqueue(self.network.at_mut(i), p) {
            Enqueue::Accepted => self.kick(i),
            Enqueue::Dropped(_) => {
                self.dropped += 1;
                self.log(EventKind::Drop, id, uid, || "queue_full".into());
            }
        }
        Ok(true)
    }

    /// Attempts to put the node's head packet on the air.
    fn service_step(&mut self, i: usize) -> Result<bool> {
        let node = self.network.at(i);
        if !node.radio_on || node.is_sink() || self.mac[i].on_air.is_some() {
            return Ok(true);
        }
        let (control, uid) = match (node.control.front(), node.queue.front()) {
            (Some(p), _) => (true, p.uid),
            (None, Some(p)) => (false, p.uid),
            (None, None) => return Ok(true),
        };
        let decision = decide(node, &self.overrides, !control);
        let id = node.id;
        let RouteDecision::Hop(next) = decision else {
            self.log(EventKind::TxAttempt, id, uid, || "stall".into());
            return Ok(true);
        };
        let cca = self.cca_ns;
        let busy = self.active.iter().any(|&k| {
            let t = &self.air[k];
            t.sender != i && self.reach[t.sender * self.network.len() + i] && self.now >= t.start + cca
        });
        if busy {
            self.log(EventKind::TxAttempt, id, uid, || "busy".into());
            let at = self.now + self.backoff();
            self.mac[i].pending = true;
            self.queue.push(at, id.0, 0, Payload::TxAttempt { node: i });
            return Ok(true);
        }
        let receiver = self.network.idx(next).ok_or(Error::InvalidNode(next))?;
        let mut tx = Transmission {
            sender: i,
            receiver,
            start: self.now,
            end: self.now + self.tx_ns,
            corrupted: false,
            live: true,
        };
        for idx in 0..self.active.len() {
            let k = self.active[idx];
            let other = self.air[k];
            if self.hears(other.sender, receiver) {
                tx.corrupted = true;
            }
            if self.hears(i, other.receiver) {
                self.air[k].corrupted = true;
            }
        }
        let k = self.air.len();
        self.air.push(tx);
        self.active.push(k);
        self.mac[i].on_air = Some(k);
        self.usage[i].tx_ns += self.tx_ns;
        if self.network.at(i).t0.is_none() {
            let now = self.now();
            self.network.at_mut(i).t0 = Some(now);
        }
        self.log(EventKind::TxAttempt, id, uid, || format!("to={next}"));
        self.queue.push(tx.end, id.0, uid, Payload::Receive { tx: k });
        Ok(true)
    }

    fn on_tx_end(&mut self, k: usize) -> Result<bool> {
        let tx = self.air[k];
        self.air[k].live = false;
        self.active.retain(|&a| a != k);
        let (s, r) = (tx.sender, tx.receiver);
        self.mac[s].on_air = None;
        self.charge(s);
        let sender_id = self.network.at(s).id;
        let control = !self.network.at(s).control.is_empty();
        if tx.corrupted {
            self.on_collision(s, control);
            self.kick(s);
            return Ok(true);
        }
        let mut p = {
            let node = self.network.at_mut(s);
            let p = if control {
                node.control.pop_front()
            } else {
                node.queue.pop()
            };
            p.expect("head packet stays queued while on the air")
        };
        p.retries = 0;
        p.hops += 1;
        {
            let node = self.network.at_mut(s);
            node.counters.transmitted += 1;
            if !control {
                node.window.forwarded += 1;
            }
        }
        self.charge(r);
        let receiver = self.network.at_mut(r);
        let receiver_id = receiver.id;
        receiver.counters.received += 1;
        if !control {
            receiver.window.received += 1;
            if let Some(e) = receiver.neighbor_entry_mut(sender_id) {
                e.packets_received += 1;
            }
        }
        let uid = p.uid;
        self.log(EventKind::Receive, receiver_id, uid, || format!("from={sender_id}"));
        if let Some(cm) = p.control.take() {
            if self.network.at(r).is_sink() {
                self.queue.push(self.now, receiver_id.0, uid, Payload::CongestionMsgArrive { cm });
            } else {
                p.control = Some(cm);
                self.network.at_mut(r).control.push_back(p);
                self.kick(r);
            }
        } else if self.network.at(r).is_sink() {
            self.delivered += 1;
            self.delay_sum += self.now() - p.created_at;
        } else {
            match enqueue(self.network.at_mut(r), p) {
                Enqueue::Accepted => self.kick(r),
                Enqueue::Dropped(_) => {
                    self.dropped += 1;
                    self.log(EventKind::Drop, receiver_id, uid, || "queue_full".into());
                }
            }
        }
        self.kick(s);
        Ok(true)
    }

    fn on_collision(&mut self, s: usize, control: bool) {
        let max = self.config.mac.max_retries;
        let node = self.network.at_mut(s);
        let id = node.id;
        let head = if control {
            node.control.front_mut()
        } else {
            node.queue.front_mut()
        };
        let p = head.expect("head packet stays queued while on the air");
        let uid = p.uid;
        if control {
            // reports are retried until they get through
            p.retries = p.retries.saturating_add(1);
            self.log(EventKind::Drop, id, uid, || "collision".into());
            return;
        }
        if p.retries >= max {
            node.queue.pop();
            node.counters.dropped += 1;
            self.dropped += 1;
            self.log(EventKind::Drop, id, uid, || "retries".into());
        } else {
            p.retries += 1;
            self.log(EventKind::Drop, id, uid, || "collision".into());
        }
    }

    fn on_sample(&mut self) -> Result<bool> {
        let now = self.now();
        let next = self.now + self.sample_ns;
        self.queue.push(next, 0, 0, Payload::SampleTick);
        self.log(EventKind::SampleTick, self.network.sink(), 0, String::new);
        let threshold = self.config.detection.threshold;
        for node in self.network.nodes_mut() {
            if !node.is_sink() && node.radio_on {
                node.available = hysteresis_flag(node.available, node.queue.len(), threshold);
            }
        }
        self.network.propagate_availability();
        let ids: Vec<NodeId> = self.network.nodes().iter().map(|n| n.id).collect();
        if self.config.algorithm != Algorithm::Baseline {
            for &id in &ids {
                let cfg = self.config.detection;
                if let Some(cm) = detect(&mut self.network, id, now, self.config.sample_period, &cfg)? {
                    self.cms_emitted += 1;
                    let mut p = self.fresh_packet(id);
                    let uid = p.uid;
                    let line = serde_json::to_string(&cm)?;
                    p.control = Some(Box::new(cm));
                    self.log(EventKind::CongestionMsgArrive, id, uid, || format!("emit {line}"));
                    let i = self.network.idx(id).expect("listed");
                    self.network.at_mut(i).control.push_back(p);
                }
            }
        }
        if self.config.detection.accounting == Accounting::Windowed {
            let cooldown = f64::from(self.config.detection.cooldown_periods) * self.config.sample_period;
            for &id in &ids {
                let start = self.network.node(id).expect("listed").window.start;
                if now - start >= cooldown - 1e-9 {
                    reset_window(&mut self.network, id, now);
                }
            }
        }
        self.kick_all();
        Ok(true)
    }

    fn on_cm(&mut self, cm: CongestionMessage) -> Result<bool> {
        self.cms_delivered += 1;
        let sink = self.network.sink();
        let congested = cm.congested;
        // each node is relieved at most once per run
        let served = self.groups.iter().any(|g| g.dispatch.congested == congested);
        if self.config.algorithm == Algorithm::Baseline || served {
            self.log(EventKind::CongestionMsgArrive, sink, 0, || format!("ignore congested={congested}"));
            return Ok(true);
        }
        let plans = match self.config.algorithm {
            Algorithm::Dynamic => plan_dynamic(&cm, &self.network),
            Algorithm::Direct => plan_direct(&cm, &self.network),
            Algorithm::Baseline => unreachable!(),
        };
        let plans = match plans {
            Ok(p) if !p.is_empty() => p,
            Ok(_) => {
                self.log(EventKind::CongestionMsgArrive, sink, 0, || format!("no_relief congested={congested}"));
                return Ok(true);
            }
            Err(e @ (Error::PoolExhausted | Error::ChainInfeasible { .. } | Error::SpuriousCongestion(_))) => {
                self.log(EventKind::CongestionMsgArrive, sink, 0, || format!("rejected congested={congested}: {e}"));
                return Ok(true);
            }
            Err(e) => return Err(e),
        };
        let now = self.now();
        let d = dispatch(congested, plans, &mut self.network, now, self.config.mobile_speed)?;
        let group = self.groups.len();
        for t in &d.travel {
            self.schedule_mobile_travel(group, t.mobile, t.from, t.to)?;
        }
        self.log(EventKind::CongestionMsgArrive, sink, 0, || {
            format!("dispatch congested={congested} mobiles={}", d.plans.len())
        });
        self.groups.push(Group {
            dispatch: d,
            arrived: 0,
            activated_at: None,
        });
        Ok(true)
    }

    /// Keeps the mobile's radio off while it travels and schedules its arrival.
    fn schedule_mobile_travel(&mut self, group: usize, mobile: NodeId, from: Point, to: Point) -> Result<()> {
        let i = self.network.idx(mobile).ok_or(Error::InvalidNode(mobile))?;
        self.network.at_mut(i).radio_on = false;
        let secs = crate::geometry::distance(from, to) / self.config.mobile_speed;
        let at = self.now + to_nanos(secs);
        self.queue.push(at, mobile.0, 0, Payload::MobileArrive { group, mobile });
        Ok(())
    }

    fn on_arrive(&mut self, group: usize, mobile: NodeId) -> Result<bool> {
        let target = self.groups[group]
            .dispatch
            .plans
            .iter()
            .find(|p| p.mobile == mobile)
            .expect("mobile belongs to its group")
            .target;
        self.network.admit_mobile(mobile, target)?;
        let i = self.network.idx(mobile).expect("admitted");
        self.usage[i].radio_since = Some(self.now);
        self.charge(i);
        self.refresh_reach();
        self.log(EventKind::MobileArrive, mobile, 0, || format!("at={target}"));
        let g = &mut self.groups[group];
        g.arrived += 1;
        if g.arrived == g.dispatch.plans.len() {
            g.activated_at = Some(to_seconds(self.now));
            for o in g.dispatch.overrides.clone() {
                self.overrides.insert(o);
            }
            let congested = g.dispatch.congested;
            self.log(EventKind::MobileArrive, congested, 0, || "overrides_active".into());
        }
        self.kick_all();
        Ok(true)
    }

    /// Closes the books at the current clock and reports the run.
    pub fn finish(mut self) -> RunMetrics {
        let end = self.now;
        let n = self.network.len();
        let mut reports = Vec::with_capacity(n);
        let mut residual = 0u64;
        let mut total = 0.0;
        for i in 0..n {
            let u = &mut self.usage[i];
            if let Some(since) = u.radio_since.take() {
                u.radio_ns += end.saturating_sub(since);
            }
            let cpu_ns = (u.events as f64 * self.config.mac.cpu_per_event * 1e9).round() as u64;
            let cpu_ns = cpu_ns.min(end);
            let ledger = EnergyLedger {
                transmit_ticks: ticks(to_seconds(u.tx_ns)),
                listen_ticks: ticks(to_seconds(u.radio_ns.saturating_sub(u.tx_ns))),
                cpu_ticks: ticks(to_seconds(cpu_ns)),
                lpm_ticks: ticks(to_seconds(end - cpu_ns)),
            };
            let node = self.network.at_mut(i);
            node.energy = ledger;
            residual += node.queue.len() as u64;
            let energy_mj = node_energy_scaled(&ledger, self.config.energy_scale);
            total += energy_mj;
            reports.push(NodeReport {
                id: node.id,
                kind: node.kind,
                received: node.counters.received,
                transmitted: node.counters.transmitted,
                dropped: node.counters.dropped,
                energy_mj,
                ledger,
            });
        }
        let placements = self
            .groups
            .iter()
            .flat_map(|g| {
                g.dispatch.plans.iter().zip(&g.dispatch.travel).map(move |(p, t)| PlacementRecord {
                    congested: g.dispatch.congested,
                    mobile: p.mobile,
                    target: p.target,
                    served: p.served.clone(),
                    next_hop: p.next_hop_hint,
                    dispatched_at: t.depart,
                    arrived_at: t.arrive,
                    activated_at: g.activated_at,
                })
            })
            .collect::<Vec<_>>();
        let delivery_ratio = if self.generated == 0 {
            1.0
        } else {
            self.delivered as f64 / self.generated as f64
        };
        RunMetrics {
            generated: self.generated,
            delivered: self.delivered,
            dropped: self.dropped,
            residual,
            delivery_ratio,
            mean_delay: if self.delivered == 0 {
                0.0
            } else {
                self.delay_sum / self.delivered as f64
            },
            total_energy: total,
            mobiles_used: placements.len(),
            cms_emitted: self.cms_emitted,
            cms_delivered: self.cms_delivered,
            cms_lost: self.cms_emitted - self.cms_delivered,
            events: self.events,
            nodes: reports,
            placements,
        }
    }

    pub fn into_trace(self) -> Vec<TraceLine> {
        self.trace.unwrap_or_default()
    }
}

/// Runs a network under `config` until `sim_time`.
pub fn run(network: Network, config: &SimConfig) -> Result<RunMetrics> {
    let mut sim = Simulation::new(network, config.clone())?;
    sim.run_to_end()?;
    sim.now = sim.end;
    Ok(sim.finish())
}

/// As [`run`], also returning the rendered event trace.
pub fn run_traced(network: Network, config: &SimConfig) -> Result<(RunMetrics, String)> {
    let mut sim = Simulation::new(network, config.clone())?;
    sim.enable_trace();
    sim.run_to_end()?;
    sim.now = sim.end;
    let text = trace::render(sim.trace().unwrap_or_default());
    Ok((sim.finish(), text))
}
