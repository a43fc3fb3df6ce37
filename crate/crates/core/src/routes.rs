//! Route plans: extraction from MILP solutions, bookkeeping and validation.
//!
//! Travel is at unit speed, so lengths double as times. Charge is a battery
//! fraction that drops by `length / max_range` per leg and resets to 1 on
//! every departure from a ground vehicle. Ground vehicles also act as cargo
//! depots: a quadcopter may leave a vehicle with any load it can carry.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{PdpInstance, Point};
use crate::layout::{Family, VariableLayout};

/// Slack allowed on charge, cargo weight and length comparisons.
pub const PLAN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub from: usize,
    pub to: usize,
    pub from_site: String,
    pub to_site: String,
    pub from_position: Point,
    pub to_position: Point,
    pub length: f64,
    /// Items carried on this leg.
    pub cargo: BTreeMap<String, i64>,
    /// Battery fraction on arrival.
    pub charge: f64,
    /// Battery reserve reported by the MILP for this leg.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reserve: Option<f64>,
    /// Legs remaining after this one.
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadRoute {
    pub quad: String,
    pub start: usize,
    pub start_position: Point,
    pub legs: Vec<Leg>,
}

impl QuadRoute {
    pub fn length(&self) -> f64 {
        self.legs.iter().map(|l| l.length).sum()
    }

    /// Visited sites in order, starting with the start site.
    pub fn nodes(&self) -> Vec<usize> {
        std::iter::once(self.start).chain(self.legs.iter().map(|l| l.to)).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub routes: Vec<QuadRoute>,
    pub makespan: f64,
}

impl RoutePlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Node sequence per quadcopter.
    pub fn walks(&self) -> Vec<Vec<usize>> {
        self.routes.iter().map(QuadRoute::nodes).collect()
    }
}

/// Longest route length.
pub fn makespan(plan: &RoutePlan) -> f64 {
    plan.routes.iter().map(QuadRoute::length).fold(0.0, f64::max)
}

/// Battery fraction on arrival after each leg of `walk` (the node sequence
/// starting at quadcopter `h`'s start).
pub fn charge_profile(inst: &PdpInstance, h: usize, walk: &[usize]) -> Vec<f64> {
    let quad = &inst.quadcopters[h];
    let mut charge = quad.initial_charge;
    walk.windows(2)
        .map(|e| {
            if inst.is_vehicle_node(e[0]) {
                charge = 1.0;
            }
            charge -= inst.distance(e[0], e[1]) / quad.max_range;
            charge
        })
        .collect()
}

/// Cargo carried on each leg of `walk`, or `None` when no loading works.
///
/// The first leg carries the initial cargo; each request subtracts its signed
/// demand. After a vehicle the quadcopter loads the smallest vector that
/// keeps every count non-negative until the next vehicle. When the walk ends
/// at a request, the last segment must arrive with exactly that request's
/// demand.
pub fn cargo_profile(inst: &PdpInstance, h: usize, walk: &[usize]) -> Option<Vec<Vec<i64>>> {
    let legs = walk.len().saturating_sub(1);
    let s = inst.items.len();
    let cap = inst.quadcopters[h].capacity;
    let mut out = vec![vec![0i64; s]; legs];
    // split the legs into segments at vehicle departures
    let mut seg_start = 0;
    while seg_start < legs {
        let from_vehicle = inst.is_vehicle_node(walk[seg_start]);
        let mut seg_end = seg_start + 1;
        while seg_end < legs && !inst.is_vehicle_node(walk[seg_end]) {
            seg_end += 1;
        }
        let ends_at_route_end = seg_end == legs;
        let last = walk[seg_end];
        let terminal_request = ends_at_route_end && inst.is_request_node(last);
        // prefix[j] = demand served by the first j requests of the segment
        let mut prefix = vec![vec![0i64; s]];
        for k in seg_start + 1..=seg_end {
            if inst.is_request_node(walk[k]) {
                let d = inst.demand_vector(walk[k]);
                let mut p = prefix.last().unwrap().clone();
                p.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
                prefix.push(p);
            }
        }
        let load: Vec<i64> = if !from_vehicle {
            inst.initial_cargo_vector(h)
        } else if terminal_request {
            prefix.last().unwrap().clone()
        } else {
            (0..s).map(|i| prefix.iter().map(|p| p[i]).max().unwrap()).collect()
        };
        let total = prefix.last().unwrap();
        if terminal_request && load != *total {
            return None;
        }
        for (j, k) in (seg_start..seg_end).enumerate() {
            let carried: Vec<i64> = load.iter().zip(&prefix[j]).map(|(l, p)| l - p).collect();
            if carried.iter().any(|&c| c < 0) || inst.cargo_weight(&carried) > cap + PLAN_TOL {
                return None;
            }
            out[k] = carried;
        }
        seg_start = seg_end;
    }
    Some(out)
}

/// Builds a plan from one node walk per quadcopter, or `None` when some
/// walk has no valid cargo loading.
pub fn plan_from_walks(inst: &PdpInstance, walks: &[Vec<usize>]) -> Option<RoutePlan> {
    let mut routes = Vec::with_capacity(walks.len());
    for (h, walk) in walks.iter().enumerate() {
        let cargo = cargo_profile(inst, h, walk)?;
        routes.push(build_route(inst, h, walk, &cargo, None));
    }
    let mut plan = RoutePlan { routes, makespan: 0.0 };
    plan.makespan = makespan(&plan);
    Some(plan)
}

fn cargo_map(inst: &PdpInstance, cargo: &[i64]) -> BTreeMap<String, i64> {
    inst.items.iter().zip(cargo).map(|(i, &c)| (i.id.clone(), c)).collect()
}

fn build_route(
    inst: &PdpInstance,
    h: usize,
    walk: &[usize],
    cargo: &[Vec<i64>],
    reserve: Option<&[f64]>,
) -> QuadRoute {
    let charge = charge_profile(inst, h, walk);
    let n_legs = walk.len().saturating_sub(1);
    let legs = (0..n_legs)
        .map(|k| {
            let (a, b) = (walk[k], walk[k + 1]);
            Leg {
                from: a,
                to: b,
                from_site: inst.site_id(a).to_string(),
                to_site: inst.site_id(b).to_string(),
                from_position: inst.position(a),
                to_position: inst.position(b),
                length: inst.distance(a, b),
                cargo: cargo_map(inst, &cargo[k]),
                charge: charge[k],
                reserve: reserve.map(|r| r[k]),
                t: (n_legs - 1 - k) as f64,
            }
        })
        .collect();
    QuadRoute {
        quad: inst.quadcopters[h].id.clone(),
        start: inst.quad_node(h),
        start_position: inst.position(inst.quad_node(h)),
        legs,
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RouteError {
    #[error("edges of quadcopter `{quad}` do not form a walk from its start")]
    DisconnectedRoute { quad: String },
    #[error("solution vector has {got} entries, layout needs {expected}")]
    WrongLength { got: usize, expected: usize },
}

/// Reads per-quadcopter walks from a MILP solution vector.
///
/// At sites left more than once, the departure with the larger leg counter
/// `t` is taken first, unless that would strand the remaining edges.
pub fn extract_routes(inst: &PdpInstance, layout: &VariableLayout, values: &[f64]) -> Result<RoutePlan, RouteError> {
    if values.len() != layout.total_columns() {
        return Err(RouteError::WrongLength {
            got: values.len(),
            expected: layout.total_columns(),
        });
    }
    let n = inst.node_count();
    let mut routes = Vec::new();
    for h in 0..inst.quadcopters.len() {
        let quad_id = inst.quadcopters[h].id.clone();
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for to in 0..n {
            for from in 0..n {
                if values[layout.col(Family::X, h, from, to)] > 0.5 {
                    edges.push((from, to, values[layout.col(Family::T, h, from, to)]));
                }
            }
        }
        let walk = trail(inst.quad_node(h), &mut edges)
            .ok_or_else(|| RouteError::DisconnectedRoute { quad: quad_id.clone() })?;
        let cargo: Vec<Vec<i64>> = walk
            .windows(2)
            .map(|e| {
                (0..inst.items.len())
                    .map(|s| values[layout.col(Family::Q, s, e[0], e[1])].round() as i64)
                    .collect()
            })
            .collect();
        let reserve: Vec<f64> = walk
            .windows(2)
            .map(|e| values[layout.col(Family::Z, h, e[0], e[1])])
            .collect();
        let mut route = build_route(inst, h, &walk, &cargo, Some(&reserve));
        for (leg, e) in route.legs.iter_mut().zip(walk.windows(2)) {
            leg.t = values[layout.col(Family::T, h, e[0], e[1])];
        }
        routes.push(route);
    }
    let mut plan = RoutePlan { routes, makespan: 0.0 };
    plan.makespan = makespan(&plan);
    Ok(plan)
}

/// Orders every edge into one trail from `start`, preferring larger `t`.
fn trail(start: usize, edges: &mut [(usize, usize, f64)]) -> Option<Vec<usize>> {
    let mut walk = vec![start];
    if edges.is_empty() {
        return Some(walk);
    }
    edges.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut used = vec![false; edges.len()];
    let mut at = start;
    loop {
        let candidates: Vec<usize> = (0..edges.len()).filter(|&k| !used[k] && edges[k].0 == at).collect();
        let Some(&first) = candidates.first() else { break };
        let pick = candidates
            .iter()
            .copied()
            .find(|&k| {
                used[k] = true;
                let ok = all_reachable(edges[k].1, edges, &used);
                used[k] = false;
                ok
            })
            .unwrap_or(first);
        used[pick] = true;
        at = edges[pick].1;
        walk.push(at);
    }
    used.iter().all(|&u| u).then_some(walk)
}

/// Whether every unused edge can still be reached from `from`.
fn all_reachable(from: usize, edges: &[(usize, usize, f64)], used: &[bool]) -> bool {
    let mut seen = vec![from];
    let mut frontier = vec![from];
    while let Some(u) = frontier.pop() {
        for (k, e) in edges.iter().enumerate() {
            if !used[k] && e.0 == u && !seen.contains(&e.1) {
                seen.push(e.1);
                frontier.push(e.1);
            }
        }
    }
    edges.iter().zip(used).all(|(e, &u)| u || seen.contains(&e.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    RouteCount,
    WrongStart,
    BrokenChain,
    SelfLoop,
    ArrivalAtStart,
    NoMovement,
    RequestUnserved,
    RequestRevisited,
    EdgeReused,
    LegLimit,
    Battery,
    ChargeMismatch,
    ReserveAboveCharge,
    Capacity,
    NegativeCargo,
    CargoMismatch,
    LengthMismatch,
    MakespanMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub quad: Option<usize>,
    pub leg: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(h) = self.quad {
            write!(f, " quad {h}")?;
        }
        if let Some(k) = self.leg {
            write!(f, " leg {k}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Checks a plan against the instance and reports every violation found.
pub fn validate_plan(inst: &PdpInstance, plan: &RoutePlan) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut flag = |kind, quad: Option<usize>, leg: Option<usize>, detail: String| {
        report.violations.push(Violation { kind, quad, leg, detail });
    };
    if plan.routes.len() != inst.quadcopters.len() {
        flag(
            ViolationKind::RouteCount,
            None,
            None,
            format!("{} routes for {} quadcopters", plan.routes.len(), inst.quadcopters.len()),
        );
        return report;
    }
    let n = inst.node_count();
    let leg_limit = 2 * inst.requests.len() + inst.vehicles.len() + 1;
    let mut arrivals = vec![0usize; inst.requests.len()];
    let mut edge_use: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    for (h, route) in plan.routes.iter().enumerate() {
        let quad = &inst.quadcopters[h];
        let q = Some(h);
        if route.quad != quad.id || route.start != inst.quad_node(h) {
            flag(ViolationKind::WrongStart, q, None, format!("route `{}` is not {}", route.quad, quad.id));
            continue;
        }
        if route.legs.is_empty() {
            flag(ViolationKind::NoMovement, q, None, "quadcopter never departs".into());
            continue;
        }
        if route.legs.len() > leg_limit {
            flag(ViolationKind::LegLimit, q, None, format!("{} legs, limit {leg_limit}", route.legs.len()));
        }
        let mut at = route.start;
        let mut chained = true;
        for (k, leg) in route.legs.iter().enumerate() {
            let l = Some(k);
            if leg.from != at || leg.from >= n || leg.to >= n {
                flag(ViolationKind::BrokenChain, q, l, format!("leg starts at {} not {at}", leg.from));
                chained = false;
                break;
            }
            at = leg.to;
            if leg.from == leg.to {
                flag(ViolationKind::SelfLoop, q, l, format!("self loop at {}", leg.from));
            }
            if inst.is_quad_start_node(leg.to) {
                flag(ViolationKind::ArrivalAtStart, q, l, format!("arrives at start site {}", leg.to));
            }
            if inst.is_request_node(leg.to) {
                arrivals[leg.to] += 1;
            }
            *edge_use.entry((leg.from, leg.to)).or_insert(0) += 1;
            let d = inst.distance(leg.from, leg.to);
            if (leg.length - d).abs() > PLAN_TOL {
                flag(ViolationKind::LengthMismatch, q, l, format!("length {} but distance {d}", leg.length));
            }
        }
        if !chained {
            continue;
        }

        let walk = route.nodes();
        let charge = charge_profile(inst, h, &walk);
        for (k, leg) in route.legs.iter().enumerate() {
            let l = Some(k);
            if charge[k] < -PLAN_TOL {
                flag(ViolationKind::Battery, q, l, format!("charge {:.6} on arrival", charge[k]));
            }
            if (leg.charge - charge[k]).abs() > PLAN_TOL {
                flag(ViolationKind::ChargeMismatch, q, l, format!("reported {} actual {}", leg.charge, charge[k]));
            }
            if let Some(z) = leg.reserve {
                if z > charge[k] + PLAN_TOL {
                    flag(ViolationKind::ReserveAboveCharge, q, l, format!("reserve {z} above charge {}", charge[k]));
                }
            }
        }

        let cargo: Vec<Vec<i64>> = route
            .legs
            .iter()
            .map(|leg| {
                let mut v = vec![0i64; inst.items.len()];
                for (id, &c) in &leg.cargo {
                    match inst.item_index(id) {
                        Some(s) => v[s] = c,
                        None => v.push(i64::MIN),
                    }
                }
                v
            })
            .collect();
        for (k, c) in cargo.iter().enumerate() {
            let l = Some(k);
            if c.len() != inst.items.len() || c.iter().any(|&x| x < 0) {
                flag(ViolationKind::NegativeCargo, q, l, "unknown item or negative count".into());
                continue;
            }
            let w = inst.cargo_weight(c);
            if w > quad.capacity + PLAN_TOL {
                flag(ViolationKind::Capacity, q, l, format!("load {w} above capacity {}", quad.capacity));
            }
        }
        if cargo[0] != inst.initial_cargo_vector(h) {
            flag(ViolationKind::CargoMismatch, q, Some(0), "first leg differs from initial cargo".into());
        }
        for k in 0..route.legs.len() {
            let site = route.legs[k].to;
            if !inst.is_request_node(site) {
                continue;
            }
            let demand = inst.demand_vector(site);
            let expected: Vec<i64> = cargo[k].iter().zip(&demand).map(|(c, d)| c - d).collect();
            match cargo.get(k + 1) {
                Some(next) if *next != expected => flag(
                    ViolationKind::CargoMismatch,
                    q,
                    Some(k + 1),
                    format!("request {} not served as demanded", inst.site_id(site)),
                ),
                None if expected.iter().any(|&c| c != 0) => flag(
                    ViolationKind::CargoMismatch,
                    q,
                    Some(k),
                    format!("route ends at {} with the wrong cargo", inst.site_id(site)),
                ),
                _ => {}
            }
        }
    }

    for (r, &count) in arrivals.iter().enumerate() {
        match count {
            0 => flag(
                ViolationKind::RequestUnserved,
                None,
                None,
                format!("request {} never visited", inst.requests[r].id),
            ),
            1 => {}
            c => flag(
                ViolationKind::RequestRevisited,
                None,
                None,
                format!("request {} visited {c} times", inst.requests[r].id),
            ),
        }
    }
    for (&(a, b), &count) in &edge_use {
        if count > 1 {
            flag(ViolationKind::EdgeReused, None, None, format!("edge {a}->{b} flown {count} times"));
        }
    }
    let recomputed = makespan(plan);
    if (plan.makespan - recomputed).abs() > PLAN_TOL {
        flag(
            ViolationKind::MakespanMismatch,
            None,
            None,
            format!("reported {} recomputed {recomputed}", plan.makespan),
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;

    fn two_requests() -> PdpInstance {
        PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![
                request("r1", [1.0, 0.0], &[("s1", 1)]),
                request("r2", [2.0, 0.0], &[("s1", 1)]),
            ],
            vec![quad("h1", [0.0, 0.0], &[("s1", 2)])],
            vec![],
        )
        .validate()
        .unwrap()
    }

    #[test]
    fn makespan_examples() {
        assert_eq!(makespan(&RoutePlan::default()), 0.0);
        let inst = worked_example();
        let plan = plan_from_walks(&inst, &[vec![1, 0]]).unwrap();
        assert_eq!(plan.makespan, 5.0);
        assert!(validate_plan(&inst, &plan).is_ok());
    }

    #[test]
    fn makespan_takes_the_longest_route() {
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [3.0, 4.0], &[("s1", 1)]), request("r2", [7.0, 10.0], &[("s1", 1)])],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)]), quad("h2", [7.0, 3.0], &[("s1", 1)])],
            vec![],
        )
        .validate()
        .unwrap();
        let plan = plan_from_walks(&inst, &[vec![2, 0], vec![3, 1]]).unwrap();
        assert_eq!(plan.routes[0].length(), 5.0);
        assert_eq!(plan.routes[1].length(), 7.0);
        assert_eq!(plan.makespan, 7.0);
    }

    #[test]
    fn cargo_follows_demands_and_vehicle_reloads() {
        let inst = two_requests();
        let c = cargo_profile(&inst, 0, &[2, 0, 1]).unwrap();
        assert_eq!(c, vec![vec![2], vec![1]]);
        // a terminal request must receive exactly its demand
        assert!(cargo_profile(&inst, 0, &[2, 0]).is_none());
        let with_vehicle = PdpInstance::new(
            inst.items.clone(),
            inst.requests.clone(),
            vec![quad("h1", [0.0, 0.0], &[])],
            vec![vehicle("v1", [0.0, 1.0])],
        )
        .validate()
        .unwrap();
        // h1 -> v1 -> r1 -> r2: load 2 at the vehicle
        let c = cargo_profile(&with_vehicle, 0, &[2, 3, 0, 1]).unwrap();
        assert_eq!(c, vec![vec![0], vec![2], vec![1]]);
        // h1 -> v1 -> r1 -> v1 is not allowed to reuse the edge, but the
        // loading rule alone accepts it
        let c = cargo_profile(&with_vehicle, 0, &[2, 3, 0, 3]).unwrap();
        assert_eq!(c[1], vec![1]);
    }

    #[test]
    fn pickups_need_room() {
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [1.0, 0.0], &[("s1", -3)])],
            vec![quad("h1", [0.0, 0.0], &[])],
            vec![vehicle("v1", [2.0, 0.0])],
        )
        .validate()
        .unwrap();
        assert!(cargo_profile(&inst, 0, &[1, 0, 2]).is_none());
        let roomy = {
            let mut i = inst.clone();
            i.quadcopters[0].capacity = 3.0;
            i
        };
        assert_eq!(cargo_profile(&roomy, 0, &[1, 0, 2]).unwrap(), vec![vec![0], vec![3]]);
        // a pickup can never be the final stop
        assert!(cargo_profile(&roomy, 0, &[1, 0]).is_none());
    }

    #[test]
    fn charge_resets_at_vehicles() {
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [16.0, 0.0], &[("s1", 1)])],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)])],
            vec![vehicle("v1", [8.0, 0.0])],
        )
        .validate()
        .unwrap();
        let c = charge_profile(&inst, 0, &[1, 2, 0]);
        assert_eq!(c, vec![0.6, 0.6]);
        assert!((charge_profile(&inst, 0, &[1, 0])[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_leg_is_flagged() {
        let mut inst = worked_example();
        let plan = plan_from_walks(&inst, &[vec![1, 0]]).unwrap();
        inst.quadcopters[0].max_range = 4.0;
        let report = validate_plan(&inst, &plan);
        assert!(report.has(ViolationKind::Battery));
    }

    #[test]
    fn double_service_is_flagged() {
        let inst = two_requests();
        let mut plan = plan_from_walks(&inst, &[vec![2, 0, 1]]).unwrap();
        let mut again = plan.routes[0].legs[1].clone();
        again.from = 1;
        again.to = 0;
        plan.routes[0].legs.push(again);
        let report = validate_plan(&inst, &plan);
        assert!(report.has(ViolationKind::RequestRevisited));
    }

    #[test]
    fn dropped_request_and_capacity_are_flagged() {
        let inst = two_requests();
        let plan = plan_from_walks(&inst, &[vec![2, 0, 1]]).unwrap();
        assert!(validate_plan(&inst, &plan).is_ok());
        let mut dropped = plan.clone();
        dropped.routes[0].legs.pop();
        dropped.makespan = makespan(&dropped);
        let report = validate_plan(&inst, &dropped);
        assert!(report.has(ViolationKind::RequestUnserved));
        let mut small = inst.clone();
        small.quadcopters[0].capacity = 1.0;
        assert!(validate_plan(&small, &plan).has(ViolationKind::Capacity));
    }

    #[test]
    fn trail_prefers_larger_counters_without_stranding() {
        // start 9 -> a(0) -> v(5) -> b(1) -> v(5) -> c(2)
        let mut edges = vec![(9, 0, 4.0), (0, 5, 3.0), (5, 1, 2.0), (1, 5, 1.0), (5, 2, 0.0)];
        assert_eq!(trail(9, &mut edges).unwrap(), vec![9, 0, 5, 1, 5, 2]);
        // swapped counters at the vehicle: taking 5->2 first would strand 5->1
        let mut edges = vec![(9, 0, 4.0), (0, 5, 3.0), (5, 1, 0.0), (1, 5, 1.0), (5, 2, 2.0)];
        assert_eq!(trail(9, &mut edges).unwrap(), vec![9, 0, 5, 1, 5, 2]);
        let mut broken = vec![(9, 0, 1.0), (1, 2, 0.0)];
        assert!(trail(9, &mut broken).is_none());
    }

    #[test]
    fn extraction_reads_the_worked_example() {
        let inst = worked_example();
        let layout = VariableLayout::for_instance(&inst);
        let mut v = vec![0.0; layout.total_columns()];
        v[layout.col(Family::X, 0, 1, 0)] = 1.0;
        v[layout.col(Family::Q, 0, 1, 0)] = 1.0;
        v[layout.makespan_column()] = 5.0;
        let plan = extract_routes(&inst, &layout, &v).unwrap();
        assert_eq!(plan.walks(), vec![vec![1, 0]]);
        assert_eq!(plan.makespan, 5.0);
        assert_eq!(plan.routes[0].legs[0].cargo["s1"], 1);
        assert!(validate_plan(&inst, &plan).is_ok());
        // no edges at all: an empty route
        let empty = extract_routes(&inst, &layout, &vec![0.0; layout.total_columns()]).unwrap();
        assert!(empty.routes[0].legs.is_empty());
    }

    #[test]
    fn extraction_orders_by_counter() {
        // start -> request -> vehicle with counters 1, 0
        let inst = worked_example();
        let layout = VariableLayout::for_instance(&inst);
        let mut v = vec![0.0; layout.total_columns()];
        v[layout.col(Family::X, 0, 0, 2)] = 1.0;
        v[layout.col(Family::T, 0, 0, 2)] = 0.0;
        v[layout.col(Family::X, 0, 1, 0)] = 1.0;
        v[layout.col(Family::T, 0, 1, 0)] = 1.0;
        let plan = extract_routes(&inst, &layout, &v).unwrap();
        assert_eq!(plan.walks(), vec![vec![1, 0, 2]]);
        assert_eq!(plan.routes[0].legs[0].t, 1.0);
        let mut bad = v.clone();
        bad[layout.col(Family::X, 0, 1, 0)] = 0.0;
        assert_eq!(
            extract_routes(&inst, &layout, &bad),
            Err(RouteError::DisconnectedRoute { quad: "h1".into() })
        );
    }

    #[test]
    fn plan_json_round_trip() {
        let inst = two_requests();
        let plan = plan_from_walks(&inst, &[vec![2, 0, 1]]).unwrap();
        assert_eq!(RoutePlan::from_json(&plan.to_json()).unwrap(), plan);
    }
}
