mod common;

use common::node;
use mobilecc::congestion::{additional_resources, contributors, detect, DetectionConfig};
use mobilecc::energy::{node_energy, node_energy_scaled, total_energy, EnergyLedger, EnergyScale, TICKS_PER_SECOND};
use mobilecc::engine::Packet;
use mobilecc::topology::{Network, NodeId, NodeKind, NodeState};
use mobilecc::{Error, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn additional_resources_matches_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let recv: u64 = rng.gen_range(0..10_000);
        let tran: u64 = rng.gen_range(0..10_000);
        let t0: f64 = rng.gen_range(0.0..500.0);
        let t = t0 + rng.gen_range(0.001..100.0);
        let want = if recv >= tran { (recv - tran) as f64 / (t - t0) } else { 0.0 };
        assert_eq!(additional_resources(recv, tran, t, t0).unwrap(), want);
    }
    assert_eq!(additional_resources(8, 0, 1.0, 0.0).unwrap(), 8.0);
    assert!(matches!(additional_resources(5, 1, 3.0, 3.0), Err(Error::InvalidWindow { .. })));
}

#[test]
fn one_second_of_transmit() {
    let l = EnergyLedger {
        transmit_ticks: TICKS_PER_SECOND,
        ..Default::default()
    };
    assert_eq!(node_energy(&l), 58.5);
    let lpm = EnergyLedger {
        lpm_ticks: TICKS_PER_SECOND,
        ..Default::default()
    };
    assert!((node_energy(&lpm) - 0.1635).abs() < 1e-12);
    assert_eq!(node_energy_scaled(&l, EnergyScale::Literal), 58.5 * 32768.0 * 8.0 / 4096.0);
}

fn ledger(rng: &mut impl Rng) -> EnergyLedger {
    EnergyLedger {
        transmit_ticks: rng.gen_range(0..1 << 20),
        listen_ticks: rng.gen_range(0..1 << 20),
        cpu_ticks: rng.gen_range(0..1 << 20),
        lpm_ticks: rng.gen_range(0..1 << 24),
    }
}

fn with_ledger(id: u32, kind: NodeKind, l: EnergyLedger) -> NodeState {
    let mut n = node(id, kind, Point::new(id as f64, 0.0), 25.0);
    n.energy = l;
    n
}

#[test]
fn total_energy_is_linear_under_duplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let base: Vec<EnergyLedger> = (0..rng.gen_range(1..8)).map(|_| ledger(&mut rng)).collect();
        let build = |copies: u32| {
            let mut nodes = vec![with_ledger(1, NodeKind::Sink, EnergyLedger::default())];
            for c in 0..copies {
                for (i, l) in base.iter().enumerate() {
                    nodes.push(with_ledger(10 + c * 100 + i as u32, NodeKind::Static, *l));
                }
            }
            Network::new(nodes).unwrap()
        };
        let once = total_energy(&build(1));
        let twice = total_energy(&build(2));
        let thrice = total_energy(&build(3));
        assert!((twice - 2.0 * once).abs() <= 1e-9 * once.max(1.0));
        assert!((thrice - 3.0 * once).abs() <= 1e-9 * once.max(1.0));
    }
}

#[test]
fn idle_mobile_adds_energy() {
    let idle = EnergyLedger {
        lpm_ticks: 10 * TICKS_PER_SECOND,
        ..Default::default()
    };
    let a = Network::new(vec![with_ledger(1, NodeKind::Sink, idle)]).unwrap();
    let b = Network::new(vec![with_ledger(1, NodeKind::Sink, idle), with_ledger(2, NodeKind::Mobile, idle)]).unwrap();
    assert!(total_energy(&b) > total_energy(&a));
}

fn congested_pair() -> Network {
    Network::new(vec![
        node(1, NodeKind::Sink, Point::new(0.0, 0.0), 25.0),
        node(2, NodeKind::Static, Point::new(0.0, 20.0), 25.0),
        node(3, NodeKind::Static, Point::new(0.0, 40.0), 25.0),
    ])
    .unwrap()
}

fn fill(net: &mut Network, id: u32, n: usize) {
    let node = net.node_mut(NodeId(id)).unwrap();
    for k in 0..n {
        node.queue.push(Packet::new(k as u64, NodeId(3), 0.0, 128)).unwrap();
    }
}

#[test]
fn detection_needs_backlog_and_deficit() {
    let cfg = DetectionConfig::default();
    let mut net = congested_pair();
    fill(&mut net, 2, 5);
    {
        let n = net.node_mut(NodeId(2)).unwrap();
        n.window.received = 40;
        n.window.forwarded = 10;
        n.neighbor_entry_mut(NodeId(3)).unwrap().packets_received = 40;
    }
    assert!(detect(&mut net, NodeId(2), 5.0, 1.0, &cfg).unwrap().is_none());
    fill(&mut net, 2, 1);
    let cm = detect(&mut net, NodeId(2), 5.0, 1.0, &cfg).unwrap().expect("report");
    assert_eq!(cm.additional_resources().unwrap(), 6.0);
    let feeds = contributors(&cm).unwrap();
    assert_eq!(feeds.len(), 1);
    assert_eq!(feeds[0].node, NodeId(3));
    assert_eq!(feeds[0].sending_rate, 8.0);
    // the window restarted and the cooldown holds
    assert_eq!(net.node(NodeId(2)).unwrap().window.received, 0);
    assert!(detect(&mut net, NodeId(2), 9.0, 1.0, &cfg).unwrap().is_none());
}

#[test]
fn sink_and_mobiles_never_report() {
    let cfg = DetectionConfig::default();
    let mut net = Network::new(vec![
        node(1, NodeKind::Sink, Point::new(0.0, 0.0), 25.0),
        node(2, NodeKind::Mobile, Point::new(0.0, 20.0), 25.0),
    ])
    .unwrap();
    for id in [1, 2] {
        fill(&mut net, id, 8);
        let n = net.node_mut(NodeId(id)).unwrap();
        n.radio_on = true;
        n.window.received = 50;
        assert!(detect(&mut net, NodeId(id), 5.0, 1.0, &cfg).unwrap().is_none());
    }
}

proptest! {
    #[test]
    fn energy_is_linear_in_each_counter(
        t in 0u64..1 << 30, l in 0u64..1 << 30, c in 0u64..1 << 30, p in 0u64..1 << 30, k in 1u64..8,
    ) {
        let a = EnergyLedger { transmit_ticks: t, listen_ticks: l, cpu_ticks: c, lpm_ticks: p };
        let b = EnergyLedger { transmit_ticks: t * k, listen_ticks: l * k, cpu_ticks: c * k, lpm_ticks: p * k };
        let (ea, eb) = (node_energy(&a), node_energy(&b));
        prop_assert!((eb - k as f64 * ea).abs() <= 1e-9 * eb.max(1.0));
    }

    #[test]
    fn deficit_is_never_negative(recv in 0u64..1_000_000, tran in 0u64..1_000_000, t0 in 0.0..1e4f64, w in 1e-3..1e3f64) {
        prop_assert!(additional_resources(recv, tran, t0 + w, t0).unwrap() >= 0.0);
    }
}
