//! Best-first branch and bound over the integrality mask.
//!
//! Every node stores its LP bound. Children of a branched node are solved
//! eagerly (concurrently when parallel), and the incumbent is updated in a
//! fixed order so results do not depend on the number of workers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::model::{MilpModel, VarKind};
use crate::par::{self, Parallelism};
use crate::presolve::presolve;
use crate::simplex::{solve_lp_with, LpConfig, LpError, LpSolution, LpStatus, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MipConfig {
    pub lp: LpConfig,
    pub node_limit: usize,
    pub parallelism: Parallelism,
    pub presolve: bool,
}

impl Default for MipConfig {
    fn default() -> Self {
        Self {
            lp: LpConfig::default(),
            node_limit: 1_000_000,
            parallelism: Parallelism::default(),
            presolve: true,
        }
    }
}

impl MipConfig {
    pub fn tol(&self) -> &Tolerances {
        &self.lp.tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MipStatus {
    Optimal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundRecord {
    pub nodes: usize,
    pub best_bound: f64,
    pub incumbent: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MipStats {
    pub nodes: usize,
    pub lp_solves: usize,
    pub pivots: usize,
    pub columns: usize,
    pub rows: usize,
    pub presolved_columns: usize,
    pub presolved_rows: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MipSolution {
    pub status: MipStatus,
    pub incumbent: Vec<f64>,
    pub objective: f64,
    pub nodes: usize,
    pub bound_history: Vec<BoundRecord>,
    pub stats: MipStats,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MipError {
    #[error("model is infeasible")]
    Infeasible,
    #[error("relaxation is unbounded")]
    Unbounded,
    #[error("node limit {0} exceeded")]
    NodeLimitExceeded(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

struct Node {
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    primal: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Reversed so the max-heap pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

pub fn branch_and_bound(model: &MilpModel, cfg: &MipConfig) -> Result<MipSolution, MipError> {
    let start = Instant::now();
    model.validate().map_err(LpError::from)?;
    let mut stats = MipStats {
        columns: model.columns(),
        rows: model.rows.len(),
        ..MipStats::default()
    };
    let (work, reduced) = if cfg.presolve {
        let r = presolve(model).ok_or(MipError::Infeasible)?;
        (r.model.clone(), Some(r))
    } else {
        (model.clone(), None)
    };
    stats.presolved_columns = work.columns();
    stats.presolved_rows = work.rows.len();
    let offset = reduced.as_ref().map_or(0.0, |r| r.offset);

    let mut sol = search(&work, cfg, &mut stats)?;
    if let Some(r) = &reduced {
        sol.incumbent = r.expand(&sol.incumbent);
    }
    for j in 0..model.columns() {
        if model.kinds[j].is_integral() {
            sol.incumbent[j] = sol.incumbent[j].round();
        }
    }
    sol.objective = model.objective_value(&sol.incumbent);
    for rec in &mut sol.bound_history {
        rec.best_bound += offset;
        rec.incumbent += offset;
    }
    stats.wall_time = start.elapsed();
    sol.stats = stats;
    Ok(sol)
}

fn solve_node(model: &MilpModel, lower: &[f64], upper: &[f64], cfg: &MipConfig) -> Result<LpSolution, LpError> {
    solve_lp_with(model, lower, upper, &cfg.lp)
}

/// Most fractional integral column; binaries win ties, then lower index.
fn branching_column(model: &MilpModel, x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64, bool)> = None;
    for j in 0..model.columns() {
        if !model.kinds[j].is_integral() {
            continue;
        }
        let frac = x[j] - x[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist <= tol {
            continue;
        }
        let binary = model.kinds[j] == VarKind::Binary;
        let better = match best {
            None => true,
            Some((_, d, b)) => dist > d + 1e-12 || ((dist - d).abs() <= 1e-12 && binary && !b),
        };
        if better {
            best = Some((j, dist, binary));
        }
    }
    best.map(|(j, _, _)| j)
}

fn search(model: &MilpModel, cfg: &MipConfig, stats: &mut MipStats) -> Result<MipSolution, MipError> {
    let tol = *cfg.tol();
    let root = solve_node(model, &model.lower, &model.upper, cfg)?;
    stats.lp_solves += 1;
    stats.pivots += root.stats.pivots;
    match root.status {
        LpStatus::Infeasible => return Err(MipError::Infeasible),
        LpStatus::Unbounded => return Err(MipError::Unbounded),
        LpStatus::Optimal => {}
    }
    let mut heap = BinaryHeap::new();
    let mut next_id = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut history = Vec::new();
    let mut nodes = 1usize;

    let consider = |sol: LpSolution,
                        lower: Vec<f64>,
                        upper: Vec<f64>,
                        id: usize,
                        heap: &mut BinaryHeap<Node>,
                        incumbent: &mut Option<(f64, Vec<f64>)>| {
        if sol.status != LpStatus::Optimal {
            return;
        }
        if let Some((best, _)) = incumbent {
            if sol.objective >= *best - tol.gap {
                return;
            }
        }
        if branching_column(model, &sol.primal, tol.integrality).is_none() {
            *incumbent = Some((sol.objective, sol.primal));
            return;
        }
        heap.push(Node {
            bound: sol.objective,
            id,
            lower,
            upper,
            primal: sol.primal,
        });
    };
    consider(root, model.lower.clone(), model.upper.clone(), 0, &mut heap, &mut incumbent);

    while let Some(node) = heap.pop() {
        let inc_value = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
        history.push(BoundRecord {
            nodes,
            best_bound: node.bound,
            incumbent: inc_value,
        });
        if node.bound >= inc_value - tol.gap {
            // best-first: every remaining node is at least as bad
            heap.clear();
            break;
        }
        let Some(j) = branching_column(model, &node.primal, tol.integrality) else {
            continue;
        };
        if nodes + 2 > cfg.node_limit {
            return Err(MipError::NodeLimitExceeded(cfg.node_limit));
        }
        let v = node.primal[j];
        let mut down_upper = node.upper.clone();
        down_upper[j] = v.floor();
        let mut up_lower = node.lower.clone();
        up_lower[j] = v.ceil();
        let (down, up) = par::join(
            cfg.parallelism,
            || solve_node(model, &node.lower, &down_upper, cfg),
            || solve_node(model, &up_lower, &node.upper, cfg),
        );
        let (down, up) = (down?, up?);
        nodes += 2;
        stats.lp_solves += 2;
        stats.pivots += down.stats.pivots + up.stats.pivots;
        if down.status == LpStatus::Unbounded || up.status == LpStatus::Unbounded {
            return Err(MipError::Unbounded);
        }
        consider(down, node.lower.clone(), down_upper, next_id, &mut heap, &mut incumbent);
        consider(up, up_lower, node.upper, next_id + 1, &mut heap, &mut incumbent);
        next_id += 2;
    }
    let (objective, x) = incumbent.ok_or(MipError::Infeasible)?;
    history.push(BoundRecord {
        nodes,
        best_bound: objective,
        incumbent: objective,
    });
    stats.nodes = nodes;
    Ok(MipSolution {
        status: MipStatus::Optimal,
        incumbent: x,
        objective,
        nodes,
        bound_history: history,
        stats: MipStats::default(),
    })
}
