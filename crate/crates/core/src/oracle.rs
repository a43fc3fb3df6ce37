//! Exhaustive search over route plans for tiny instances.
//!
//! Every quadcopter flies one walk from its start: each leg enters a request
//! it has not served yet or a ground vehicle, no directed edge is flown twice
//! by anyone, no start site is ever entered, and every quadcopter flies at
//! least one leg. Each request is served by exactly one walk. Battery and
//! cargo follow [`charge_profile`] and [`cargo_profile`]. The plan with the
//! smallest makespan wins; ties go to the lexicographically smallest node
//! sequences.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::instance::PdpInstance;
use crate::par::{self, Parallelism};
use crate::routes::{cargo_profile, charge_profile, plan_from_walks, RoutePlan, PLAN_TOL};

pub const MAX_REQUESTS: usize = 4;
pub const MAX_QUADS: usize = 2;

const TIE: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OracleError {
    #[error("no feasible plan exists")]
    Infeasible,
    #[error("instance exceeds oracle limits: {0}")]
    OracleLimits(String),
}

/// Default leg cap per walk: 2|R| + |V|.
pub fn default_max_legs(inst: &PdpInstance) -> usize {
    2 * inst.requests.len() + inst.vehicles.len()
}

pub fn brute_force_solve(inst: &PdpInstance, max_legs: usize, mode: Parallelism) -> Result<RoutePlan, OracleError> {
    let (r, h) = (inst.requests.len(), inst.quadcopters.len());
    if r > MAX_REQUESTS || h > MAX_QUADS {
        return Err(OracleError::OracleLimits(format!(
            "{r} requests and {h} quadcopters (at most {MAX_REQUESTS} and {MAX_QUADS})"
        )));
    }
    if max_legs > default_max_legs(inst) {
        return Err(OracleError::OracleLimits(format!(
            "max_legs {max_legs} above 2|R| + |V| = {}",
            default_max_legs(inst)
        )));
    }
    if h == 0 {
        return if r == 0 {
            Ok(RoutePlan::default())
        } else {
            Err(OracleError::Infeasible)
        };
    }
    let walks: Vec<BTreeMap<u32, Vec<Walk>>> = par::map_range(mode, h, |q| {
        let mut by_mask: BTreeMap<u32, Vec<Walk>> = BTreeMap::new();
        for w in quad_walks(inst, q, max_legs) {
            by_mask.entry(w.mask).or_default().push(w);
        }
        for list in by_mask.values_mut() {
            list.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.nodes.cmp(&b.nodes)));
        }
        by_mask
    });
    let full: u32 = (1u32 << r) - 1;
    // request-to-quadcopter assignments as one mask per quadcopter
    let assignments: Vec<Vec<u32>> = (0..(h as u32).pow(r as u32))
        .map(|code| {
            let mut masks = vec![0u32; h];
            let mut c = code;
            for req in 0..r {
                masks[(c % h as u32) as usize] |= 1 << req;
                c /= h as u32;
            }
            masks
        })
        .filter(|masks| masks.iter().enumerate().all(|(q, m)| walks[q].contains_key(m)))
        .collect();
    debug_assert!(assignments.iter().all(|m| m.iter().fold(0, |a, b| a | b) == full));
    let best = par::map(mode, &assignments, |masks| best_combination(&walks, masks))
        .into_iter()
        .flatten()
        .min_by(compare_candidates);
    let (_, nodes) = best.ok_or(OracleError::Infeasible)?;
    Ok(plan_from_walks(inst, &nodes).expect("oracle walks have valid cargo"))
}

#[derive(Clone, Debug)]
struct Walk {
    nodes: Vec<usize>,
    length: f64,
    mask: u32,
}

type Candidate = (f64, Vec<Vec<usize>>);

fn compare_candidates(a: &Candidate, b: &Candidate) -> Ordering {
    if (a.0 - b.0).abs() > TIE {
        a.0.total_cmp(&b.0)
    } else {
        a.1.cmp(&b.1)
    }
}

fn best_combination(walks: &[BTreeMap<u32, Vec<Walk>>], masks: &[u32]) -> Option<Candidate> {
    let lists: Vec<&[Walk]> = masks.iter().enumerate().map(|(q, m)| walks[q][m].as_slice()).collect();
    let mut best: Option<Candidate> = None;
    let mut chosen: Vec<&Walk> = Vec::new();
    combine(&lists, &mut chosen, &mut best);
    best
}

fn combine<'a>(lists: &[&'a [Walk]], chosen: &mut Vec<&'a Walk>, best: &mut Option<Candidate>) {
    let q = chosen.len();
    if q == lists.len() {
        let span = chosen.iter().map(|w| w.length).fold(0.0, f64::max);
        let cand = (span, chosen.iter().map(|w| w.nodes.clone()).collect());
        if best.as_ref().is_none_or(|b| compare_candidates(&cand, b) == Ordering::Less) {
            *best = Some(cand);
        }
        return;
    }
    for w in lists[q] {
        if let Some((b, _)) = best {
            if w.length > *b + TIE {
                break;
            }
        }
        if chosen.iter().any(|other| shares_edge(other, w)) {
            continue;
        }
        chosen.push(w);
        combine(lists, chosen, best);
        chosen.pop();
    }
}

fn shares_edge(a: &Walk, b: &Walk) -> bool {
    a.nodes
        .windows(2)
        .any(|e| b.nodes.windows(2).any(|f| e == f))
}

/// Every feasible walk of quadcopter `h` with between 1 and `max_legs` legs.
fn quad_walks(inst: &PdpInstance, h: usize, max_legs: usize) -> Vec<Walk> {
    let mut out = Vec::new();
    let mut path = vec![inst.quad_node(h)];
    extend(inst, h, max_legs, &mut path, 0, 0.0, &mut out);
    out
}

fn extend(
    inst: &PdpInstance,
    h: usize,
    max_legs: usize,
    path: &mut Vec<usize>,
    mask: u32,
    length: f64,
    out: &mut Vec<Walk>,
) {
    let legs = path.len() - 1;
    if legs >= 1 && cargo_profile(inst, h, path).is_some() {
        out.push(Walk {
            nodes: path.clone(),
            length,
            mask,
        });
    }
    if legs == max_legs {
        return;
    }
    let at = *path.last().unwrap();
    for next in 0..inst.node_count() {
        if next == at || inst.is_quad_start_node(next) {
            continue;
        }
        if inst.is_request_node(next) && mask & (1 << next) != 0 {
            continue;
        }
        if path.windows(2).any(|e| e[0] == at && e[1] == next) {
            continue;
        }
        path.push(next);
        if prefix_feasible(inst, h, path) {
            let m = if inst.is_request_node(next) { mask | 1 << next } else { mask };
            extend(inst, h, max_legs, path, m, length + inst.distance(at, next), out);
        }
        path.pop();
    }
}

/// Necessary conditions that every extension of `path` keeps violating:
/// battery exhaustion, and cargo loads that are already impossible.
fn prefix_feasible(inst: &PdpInstance, h: usize, path: &[usize]) -> bool {
    if charge_profile(inst, h, path).last().is_some_and(|&c| c < -PLAN_TOL) {
        return false;
    }
    // treat the path as if it ended at a vehicle: the terminal-request rule
    // does not apply to prefixes
    let last = *path.last().unwrap();
    if !inst.is_request_node(last) {
        return cargo_profile(inst, h, path).is_some();
    }
    open_cargo_ok(inst, h, path)
}

fn open_cargo_ok(inst: &PdpInstance, h: usize, path: &[usize]) -> bool {
    let cap = inst.quadcopters[h].capacity;
    let s = inst.items.len();
    let seg = path
        .iter()
        .rposition(|&n| inst.is_vehicle_node(n))
        .filter(|&k| k + 1 < path.len())
        .unwrap_or(0);
    if seg == 0 && !inst.is_vehicle_node(path[0]) {
        // fixed initial load
        let mut load = inst.initial_cargo_vector(h);
        for &n in &path[1..] {
            if inst.is_request_node(n) {
                let d = inst.demand_vector(n);
                load.iter_mut().zip(&d).for_each(|(l, d)| *l -= d);
                if load.iter().any(|&c| c < 0) || inst.cargo_weight(&load) > cap + PLAN_TOL {
                    return false;
                }
            } else {
                // a vehicle lets the quadcopter reload
                return true;
            }
        }
        return true;
    }
    let mut prefix = vec![vec![0i64; s]];
    for &n in &path[seg + 1..] {
        let d = inst.demand_vector(n);
        let mut p = prefix.last().unwrap().clone();
        p.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
        prefix.push(p);
    }
    let load: Vec<i64> = (0..s).map(|i| prefix.iter().map(|p| p[i]).max().unwrap()).collect();
    prefix.iter().all(|p| {
        let carried: Vec<i64> = load.iter().zip(p).map(|(l, q)| l - q).collect();
        inst.cargo_weight(&carried) <= cap + PLAN_TOL
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;
    use crate::routes::validate_plan;

    fn solve(inst: &PdpInstance) -> Result<RoutePlan, OracleError> {
        brute_force_solve(inst, default_max_legs(inst), Parallelism::Sequential)
    }

    #[test]
    fn single_leg_worked_example() {
        let inst = worked_example();
        let plan = solve(&inst).unwrap();
        assert_eq!(plan.walks(), vec![vec![1, 0]]);
        assert_eq!(plan.makespan, 5.0);
        assert!(validate_plan(&inst, &plan).is_ok());
    }

    #[test]
    fn out_of_range_without_vehicle_is_infeasible() {
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [30.0, 40.0], &[("s1", 1)])],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)])],
            vec![],
        )
        .validate()
        .unwrap();
        assert_eq!(solve(&inst), Err(OracleError::Infeasible));
    }

    #[test]
    fn visits_requests_in_x_order() {
        let inst = PdpInstance::new(
            vec![item("a", 1.0), item("b", 1.0)],
            vec![
                request("r1", [1.0, 0.0], &[("a", 1)]),
                request("r2", [2.0, 0.0], &[("b", 1)]),
            ],
            vec![quad("h1", [0.0, 0.0], &[("a", 1), ("b", 1)])],
            vec![],
        )
        .validate()
        .unwrap();
        let plan = solve(&inst).unwrap();
        assert_eq!(plan.walks(), vec![vec![2, 0, 1]]);
        assert_eq!(plan.makespan, 2.0);
    }

    #[test]
    fn vehicle_recharge_extends_reach() {
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [30.0, 0.0], &[("s1", 1)])],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)])],
            vec![vehicle("v1", [15.0, 0.0])],
        )
        .validate()
        .unwrap();
        let plan = solve(&inst).unwrap();
        assert_eq!(plan.walks(), vec![vec![1, 2, 0]]);
        assert_eq!(plan.makespan, 30.0);
        assert!(validate_plan(&inst, &plan).is_ok());
    }

    #[test]
    fn limits_are_enforced() {
        let reqs = (0..5).map(|k| request(&format!("r{k}"), [k as f64, 0.0], &[("s1", 1)])).collect();
        let big = PdpInstance::new(vec![item("s1", 1.0)], reqs, vec![quad("h1", [0.0, 0.0], &[])], vec![])
            .validate()
            .unwrap();
        assert!(matches!(solve(&big), Err(OracleError::OracleLimits(_))));
        let inst = worked_example();
        assert!(matches!(
            brute_force_solve(&inst, 4, Parallelism::Sequential),
            Err(OracleError::OracleLimits(_))
        ));
    }

    #[test]
    fn both_quadcopters_must_fly() {
        // two quads, one request, no vehicle: the second quad has nowhere to go
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [1.0, 0.0], &[("s1", 1)])],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)]), quad("h2", [5.0, 0.0], &[])],
            vec![],
        )
        .validate()
        .unwrap();
        assert_eq!(solve(&inst), Err(OracleError::Infeasible));
    }

    #[test]
    fn modes_agree() {
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![
                request("r1", [1.0, 0.0], &[("s1", 1)]),
                request("r2", [4.0, 3.0], &[("s1", -1)]),
            ],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)]), quad("h2", [5.0, 5.0], &[])],
            vec![vehicle("v1", [3.0, 3.0])],
        )
        .validate()
        .unwrap();
        let a = brute_force_solve(&inst, default_max_legs(&inst), Parallelism::Sequential).unwrap();
        let b = brute_force_solve(&inst, default_max_legs(&inst), Parallelism::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(validate_plan(&inst, &a).is_ok());
    }
}
