//! Sink-side mobile placement.
//!
//! Dynamic placement parks one mobile where it can take over the excess
//! traffic of the fewest contributors and hand it to a non-congested node
//! closer to the sink. Direct placement starts from the same relief point and
//! lays a chain of mobiles straight to the sink.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::congestion::{contributors, CongestionMessage, ContributorProfile};
use crate::error::{Error, Result};
use crate::geometry::{common_point_closest_to_sink, distance, point_toward_sink, within, Point, EPS};
use crate::routing::RouteOverride;
use crate::topology::{Network, NodeId};

/// Busiest contributors the subset search considers.
pub const MAX_CONTRIBUTORS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub target: Point,
    pub served: Vec<NodeId>,
    /// Node the mobile forwards to: an existing node, the next chain
    /// mobile, or the sink.
    pub next_hop_hint: NodeId,
    pub mobile: NodeId,
}

/// A relief point before a mobile is assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct Relief {
    pub target: Point,
    pub served: Vec<NodeId>,
    pub forwarder: Option<NodeId>,
}

/// Lowest-level (then smallest id) radio-on node that can take traffic from
/// `target`: the sink, or a non-congested node strictly below
/// `congested_level`.
pub fn find_forwarder(network: &Network, target: Point, congested: NodeId, congested_level: Option<u32>) -> Option<NodeId> {
    let sink = network.node(network.sink())?;
    if within(sink.position, target, sink.tx_range) {
        return Some(sink.id);
    }
    let bound = congested_level.unwrap_or(u32::MAX);
    network
        .nodes_near(target, sink.tx_range)
        .filter(|n| n.id != congested && n.available)
        .filter_map(|n| n.level.filter(|&l| l < bound).map(|l| (l, n.id)))
        .min()
        .map(|(_, id)| id)
}

/// Searches single contributors first, then subsets of increasing size, and
/// returns the first feasible relief point. With `need_forwarder` the point
/// must have a forwarder in range.
pub fn find_relief(
    cm: &CongestionMessage,
    profiles: &[ContributorProfile],
    network: &Network,
    need_forwarder: bool,
) -> Result<Option<Relief>> {
    let deficit = cm.additional_resources()?;
    let sink = network.sink_position();
    let range = network.try_node(network.sink())?.tx_range;
    let forwarder = |p: Point| find_forwarder(network, p, cm.congested, cm.level);

    for c in profiles.iter().filter(|c| c.sending_rate >= deficit) {
        let pos = network.try_node(c.node)?.position;
        let target = point_toward_sink(pos, range, sink)?;
        let fwd = forwarder(target);
        if fwd.is_some() || !need_forwarder {
            return Ok(Some(Relief {
                target,
                served: vec![c.node],
                forwarder: fwd,
            }));
        }
    }

    let pool: Vec<(NodeId, f64, Point)> = profiles
        .iter()
        .take(MAX_CONTRIBUTORS)
        .map(|c| Ok((c.node, c.sending_rate, network.try_node(c.node)?.position)))
        .collect::<Result<_>>()?;
    for n in 2..=pool.len() {
        let mut best: Option<Relief> = None;
        for subset in (0..pool.len()).combinations(n) {
            let total: f64 = subset.iter().map(|&i| pool[i].1).sum();
            if total < deficit {
                continue;
            }
            let centers: Vec<Point> = subset.iter().map(|&i| pool[i].2).collect();
            let Some(target) = common_point_closest_to_sink(&centers, range, sink)? else {
                continue;
            };
            let fwd = forwarder(target);
            if fwd.is_none() && need_forwarder {
                continue;
            }
            if best.as_ref().is_none_or(|b| closer(target, b.target, sink)) {
                best = Some(Relief {
                    target,
                    served: subset.iter().map(|&i| pool[i].0).collect(),
                    forwarder: fwd,
                });
            }
        }
        if best.is_some() {
            return Ok(best);
        }
    }
    Ok(None)
}

/// Strictly closer to `sink`, with lexicographic order settling exact ties.
fn closer(a: Point, b: Point, sink: Point) -> bool {
    let (da, db) = (distance(a, sink), distance(b, sink));
    if (da - db).abs() <= EPS {
        a.lex_cmp(&b).is_lt()
    } else {
        da < db
    }
}

pub fn plan_dynamic(cm: &CongestionMessage, network: &Network) -> Result<Vec<PlacementPlan>> {
    let mobile = network.mobile_pool().next().ok_or(Error::PoolExhausted)?;
    let profiles = contributors(cm)?;
    let Some(relief) = find_relief(cm, &profiles, network, true)? else {
        return Ok(Vec::new());
    };
    Ok(vec![PlacementPlan {
        target: relief.target,
        served: relief.served,
        next_hop_hint: relief.forwarder.expect("forwarder required"),
        mobile,
    }])
}

/// Positions of a chain that starts at `first` and steps one range toward
/// the sink until the last mobile can reach it.
pub fn chain_targets(first: Point, range: f64, sink: Point) -> Result<Vec<Point>> {
    let mut out = vec![first];
    let mut last = first;
    while !within(last, sink, range) {
        last = point_toward_sink(last, range, sink)?;
        out.push(last);
    }
    Ok(out)
}

pub fn plan_direct(cm: &CongestionMessage, network: &Network) -> Result<Vec<PlacementPlan>> {
    if network.pool_len() == 0 {
        return Err(Error::PoolExhausted);
    }
    let profiles = contributors(cm)?;
    let Some(relief) = find_relief(cm, &profiles, network, false)? else {
        return Ok(Vec::new());
    };
    let range = network.try_node(network.sink())?.tx_range;
    let targets = chain_targets(relief.target, range, network.sink_position())?;
    if targets.len() > network.pool_len() {
        return Err(Error::ChainInfeasible {
            needed: targets.len(),
            available: network.pool_len(),
        });
    }
    let mobiles: Vec<NodeId> = network.mobile_pool().take(targets.len()).collect();
    let plans = targets
        .iter()
        .enumerate()
        .map(|(i, &target)| PlacementPlan {
            target,
            served: if i == 0 {
                relief.served.clone()
            } else {
                vec![mobiles[i - 1]]
            },
            next_hop_hint: mobiles.get(i + 1).copied().unwrap_or(network.sink()),
            mobile: mobiles[i],
        })
        .collect();
    Ok(plans)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Travel {
    pub mobile: NodeId,
    pub from: Point,
    pub to: Point,
    pub depart: f64,
    pub arrive: f64,
}

/// A set of plans dispatched together; overrides go live once every mobile
/// in the group has arrived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub congested: NodeId,
    pub plans: Vec<PlacementPlan>,
    pub travel: Vec<Travel>,
    pub overrides: Vec<RouteOverride>,
}

impl Dispatch {
    /// Time at which the last mobile of the group arrives.
    pub fn ready_at(&self) -> f64 {
        self.travel.iter().map(|t| t.arrive).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Reserves the plans' mobiles and computes their journeys. Plans must name
/// the pool's leading mobiles in order.
pub fn dispatch(
    congested: NodeId,
    plans: Vec<PlacementPlan>,
    network: &mut Network,
    time: f64,
    speed: f64,
) -> Result<Dispatch> {
    if !(speed > 0.0) {
        return Err(Error::Config(format!("mobile speed must be positive, got {speed}")));
    }
    let expected: Vec<NodeId> = network.mobile_pool().take(plans.len()).collect();
    let named: Vec<NodeId> = plans.iter().map(|p| p.mobile).collect();
    if expected != named {
        return Err(Error::PoolExhausted);
    }
    network.reserve_mobiles(plans.len())?;
    let mut travel = Vec::with_capacity(plans.len());
    let mut overrides = Vec::new();
    for p in &plans {
        let from = network.try_node(p.mobile)?.position;
        travel.push(Travel {
            mobile: p.mobile,
            from,
            to: p.target,
            depart: time,
            arrive: time + distance(from, p.target) / speed,
        });
        for &s in &p.served {
            overrides.push(RouteOverride {
                sender: s,
                next_hop: p.mobile,
            });
        }
        overrides.push(RouteOverride {
            sender: p.mobile,
            next_hop: p.next_hop_hint,
        });
    }
    Ok(Dispatch {
        congested,
        plans,
        travel,
        overrides,
    })
}
