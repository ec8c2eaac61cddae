use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::congestion::CongestionMessage;
use crate::topology::NodeId;

/// Simulation time in integer nanoseconds.
pub type Nanos = u64;

pub const NANOS_PER_SECOND: f64 = 1e9;

pub fn to_nanos(seconds: f64) -> Nanos {
    (seconds * NANOS_PER_SECOND).round() as Nanos
}

pub fn to_seconds(t: Nanos) -> f64 {
    t as f64 / NANOS_PER_SECOND
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Generate,
    TxAttempt,
    Receive,
    Drop,
    SampleTick,
    MobileArrive,
    CongestionMsgArrive,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Generate => "generate",
            EventKind::TxAttempt => "tx_attempt",
            EventKind::Receive => "receive",
            EventKind::Drop => "drop",
            EventKind::SampleTick => "sample_tick",
            EventKind::MobileArrive => "mobile_arrive",
            EventKind::CongestionMsgArrive => "cm_arrive",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Payload {
    Generate { node: usize },
    TxAttempt { node: usize },
    /// End of an over-the-air transmission.
    Receive { tx: usize },
    SampleTick,
    MobileArrive { group: usize, mobile: NodeId },
    CongestionMsgArrive { cm: Box<CongestionMessage> },
}

impl Payload {
    pub fn kind(&self) -> EventKind {
        match self {
            Payload::Generate { .. } => EventKind::Generate,
            Payload::TxAttempt { .. } => EventKind::TxAttempt,
            Payload::Receive { .. } => EventKind::Receive,
            Payload::SampleTick => EventKind::SampleTick,
            Payload::MobileArrive { .. } => EventKind::MobileArrive,
            Payload::CongestionMsgArrive { .. } => EventKind::CongestionMsgArrive,
        }
    }
}

#[derive(Debug)]
pub struct Event {
    pub time: Nanos,
    /// Node id (or 0) and packet uid (or 0) used for deterministic tie-breaks.
    pub node: u32,
    pub uid: u64,
    seq: u64,
    pub payload: Payload,
}

impl Event {
    fn key(&self) -> (Nanos, EventKind, u32, u64, u64) {
        (self.time, self.payload.kind(), self.node, self.uid, self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

/// Time-ordered event queue; ties resolve by (kind, node, uid, insertion).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: Nanos, node: u32, uid: u64, payload: Payload) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            node,
            uid,
            seq: self.seq,
            payload,
        });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn peek_time(&self) -> Option<Nanos> {
        self.heap.peek().map(|e| e.time)
    }
}
