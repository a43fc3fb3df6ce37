//! Bound-driven reductions applied before branch and bound.
//!
//! Repeats until nothing changes: integral bounds are rounded, singleton
//! rows become bounds, rows that are implied by the bounds are dropped,
//! rows forced to one end of their activity range fix their columns, and
//! fixed columns are substituted out.

use crate::model::{MilpModel, Sense};

const EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Reduced {
    pub model: MilpModel,
    /// Original index of every kept column.
    pub kept: Vec<usize>,
    /// Values of removed columns, indexed by original column.
    pub fixed: Vec<Option<f64>>,
    /// Objective contribution of the removed columns.
    pub offset: f64,
}

impl Reduced {
    /// Expands a vector over kept columns to the original model.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (k, &j) in self.kept.iter().enumerate() {
            out[j] = reduced[k];
        }
        out
    }
}

/// Returns `None` when the reductions prove infeasibility.
pub fn presolve(model: &MilpModel) -> Option<Reduced> {
    let n = model.columns();
    let mut lo = model.lower.clone();
    let mut hi = model.upper.clone();
    let mut alive = vec![true; model.rows.len()];
    loop {
        let mut changed = false;
        for j in 0..n {
            if model.kinds[j].is_integral() {
                let (l, u) = ((lo[j] - EPS).ceil(), (hi[j] + EPS).floor());
                changed |= l != lo[j] || u != hi[j];
                lo[j] = l;
                hi[j] = u;
            }
            if lo[j] > hi[j] + EPS {
                return None;
            }
            if lo[j] > hi[j] {
                hi[j] = lo[j];
            }
        }
        for (i, row) in model.rows.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            let mut rhs = row.rhs;
            let mut free = Vec::new();
            for &(j, a) in &row.terms {
                if lo[j] == hi[j] {
                    rhs -= a * lo[j];
                } else {
                    free.push((j, a));
                }
            }
            let (min_act, max_act) = activity_range(&free, &lo, &hi);
            let (need_low, need_high) = match row.sense {
                Sense::Le => (false, true),
                Sense::Ge => (true, false),
                Sense::Eq => (true, true),
            };
            if (need_high && min_act > rhs + EPS) || (need_low && max_act < rhs - EPS) {
                return None;
            }
            let redundant = (!need_high || max_act <= rhs + EPS) && (!need_low || min_act >= rhs - EPS);
            if redundant {
                alive[i] = false;
                changed = true;
                continue;
            }
            if free.len() == 1 {
                let (j, a) = free[0];
                let v = rhs / a;
                let (tighten_hi, tighten_lo) = match (row.sense, a > 0.0) {
                    (Sense::Eq, _) => (true, true),
                    (Sense::Le, true) | (Sense::Ge, false) => (true, false),
                    _ => (false, true),
                };
                if tighten_hi && v < hi[j] {
                    hi[j] = v;
                }
                if tighten_lo && v > lo[j] {
                    lo[j] = v;
                }
                if !model.kinds[j].is_integral() && lo[j] > hi[j] - EPS && lo[j] <= hi[j] + EPS {
                    hi[j] = lo[j];
                }
                alive[i] = false;
                changed = true;
                continue;
            }
            // forcing rows: the only feasible activity is an extreme one
            let force_min = need_high && min_act.is_finite() && min_act >= rhs - EPS;
            let force_max = need_low && max_act.is_finite() && max_act <= rhs + EPS;
            if force_min || force_max {
                for &(j, a) in &free {
                    let at_low = (a > 0.0) == force_min;
                    let v = if at_low { lo[j] } else { hi[j] };
                    lo[j] = v;
                    hi[j] = v;
                }
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut kept = Vec::new();
    let mut fixed = vec![None; n];
    let mut index = vec![usize::MAX; n];
    let mut offset = 0.0;
    let mut out = MilpModel::new();
    for j in 0..n {
        if lo[j] == hi[j] {
            fixed[j] = Some(lo[j]);
            offset += model.objective[j] * lo[j];
        } else {
            index[j] = out.add_column(model.names[j].clone(), model.kinds[j], lo[j], hi[j], model.objective[j]);
            kept.push(j);
        }
    }
    for (i, row) in model.rows.iter().enumerate() {
        if !alive[i] {
            continue;
        }
        let mut rhs = row.rhs;
        let mut terms = Vec::new();
        for &(j, a) in &row.terms {
            match fixed[j] {
                Some(v) => rhs -= a * v,
                None => terms.push((index[j], a)),
            }
        }
        out.add_row(row.tag, terms, row.sense, rhs);
    }
    Some(Reduced {
        model: out,
        kept,
        fixed,
        offset,
    })
}

fn activity_range(terms: &[(usize, f64)], lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let mut min = 0.0;
    let mut max = 0.0;
    for &(j, a) in terms {
        if a > 0.0 {
            min += a * lo[j];
            max += a * hi[j];
        } else {
            min += a * hi[j];
            max += a * lo[j];
        }
    }
    (min, max)
}
