mod common;

use common::{common_point_oracle, synthetic_cm, toward_oracle, SyntheticCm};
use mobilecc::placement::{find_forwarder, plan_direct, plan_dynamic};
use mobilecc::topology::NodeId;
use mobilecc::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Smallest subset size that covers the deficit from a point with a forwarder.
fn minimal_feasible(s: &SyntheticCm) -> Option<usize> {
    let deficit = s.cm.additional_resources().unwrap();
    let sink = s.network.sink_position();
    let range = 25.0;
    let pos = |id: NodeId| s.network.node(id).unwrap().position;
    let served = |p| find_forwarder(&s.network, p, s.cm.congested, s.cm.level).is_some();
    let n = s.rates.len();
    (1..=n).find(|&size| {
        (0u32..1 << n).filter(|m| m.count_ones() as usize == size).any(|mask| {
            let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let total: f64 = members.iter().map(|&i| s.rates[i].1).sum();
            if total < deficit {
                return false;
            }
            let target = if size == 1 {
                Some(toward_oracle(pos(s.rates[members[0]].0), range, sink))
            } else {
                let centers: Vec<_> = members.iter().map(|&i| pos(s.rates[i].0)).collect();
                common_point_oracle(&centers, range, sink)
            };
            target.is_some_and(served)
        })
    })
}

#[test]
fn dynamic_subset_has_minimal_cardinality() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut placed, mut multi) = (0, 0);
    for i in 0..200 {
        let s = synthetic_cm(&mut rng, 10);
        let plans = plan_dynamic(&s.cm, &s.network).unwrap();
        let want = minimal_feasible(&s);
        match (plans.first(), want) {
            (Some(p), Some(k)) => {
                placed += 1;
                multi += usize::from(k > 1);
                assert_eq!(p.served.len(), k, "instance {i}: served {:?}", p.served);
                let rate: f64 = p
                    .served
                    .iter()
                    .map(|id| s.rates.iter().find(|r| r.0 == *id).unwrap().1)
                    .sum();
                assert!(rate >= s.cm.additional_resources().unwrap());
            }
            (None, None) => {}
            (got, want) => panic!("instance {i}: plan {got:?}, oracle {want:?}"),
        }
    }
    assert!(placed > 50, "only {placed} instances had a feasible subset");
    assert!(multi > 10, "only {multi} instances needed more than one contributor");
}

#[test]
fn direct_chain_reaches_sink_or_reports_shortage() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let s = synthetic_cm(&mut rng, 6);
        match plan_direct(&s.cm, &s.network) {
            Ok(plans) if plans.is_empty() => {}
            Ok(plans) => {
                assert_eq!(plans.last().unwrap().next_hop_hint, s.network.sink());
            }
            Err(Error::ChainInfeasible { needed, available }) => assert!(needed > available),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

proptest! {
    #[test]
    fn dynamic_plan_is_deterministic(seed in 0u64..5000) {
        let a = synthetic_cm(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        let b = synthetic_cm(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        prop_assert_eq!(plan_dynamic(&a.cm, &a.network).unwrap(), plan_dynamic(&b.cm, &b.network).unwrap());
    }

    #[test]
    fn dynamic_target_keeps_served_in_range(seed in 0u64..5000) {
        let s = synthetic_cm(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        for p in plan_dynamic(&s.cm, &s.network).unwrap() {
            for id in &p.served {
                let d = mobilecc::geometry::distance(s.network.node(*id).unwrap().position, p.target);
                prop_assert!(d <= 25.0 + 1e-6);
            }
        }
    }
}
