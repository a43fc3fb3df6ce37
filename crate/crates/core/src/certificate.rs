//! Optimality certificates for LP solutions.

use crate::model::{MilpModel, RowTag, Sense};
use crate::simplex::{farkas_margin, LpSolution, LpStatus, Tolerances};

#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    /// Largest row or bound violation of the primal vector.
    pub primal_residual: f64,
    /// Largest sign violation of row multipliers or reduced costs.
    pub dual_residual: f64,
    /// Largest product of a multiplier and the slack of its constraint.
    pub complementarity: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    /// Row with the largest primal violation when that check fails.
    pub violated_row: Option<(usize, RowTag)>,
    pub pass: bool,
}

pub fn check_duality(model: &MilpModel, sol: &LpSolution) -> DualityReport {
    check_duality_with(model, &model.lower, &model.upper, sol, &Tolerances::default())
}

pub fn check_duality_with(
    model: &MilpModel,
    lower: &[f64],
    upper: &[f64],
    sol: &LpSolution,
    tol: &Tolerances,
) -> DualityReport {
    let x = &sol.primal;
    let y = &sol.dual;
    let n = model.columns();
    let rhs_scale = 1.0 + model.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
    let cost_scale = 1.0 + model.objective.iter().map(|c| c.abs()).fold(0.0, f64::max);

    let mut primal_residual: f64 = 0.0;
    let mut violated_row = None;
    let mut worst_row = 0.0;
    for (i, row) in model.rows.iter().enumerate() {
        let v = row.violation(x);
        if v > worst_row {
            worst_row = v;
            violated_row = Some((i, row.tag));
        }
    }
    primal_residual = primal_residual.max(worst_row);
    for j in 0..n {
        primal_residual = primal_residual.max((lower[j] - x[j]).max(x[j] - upper[j]));
    }

    let mut d = model.objective.clone();
    let mut dual_residual: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    let mut dual_objective = 0.0;
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, a) in &row.terms {
            d[j] -= y[i] * a;
        }
        let wrong_sign = match row.sense {
            Sense::Le => y[i].max(0.0),
            Sense::Ge => (-y[i]).max(0.0),
            Sense::Eq => 0.0,
        };
        dual_residual = dual_residual.max(wrong_sign);
        if row.sense != Sense::Eq {
            complementarity = complementarity.max(y[i].abs() * (row.activity(x) - row.rhs).abs());
        }
        dual_objective += y[i] * row.rhs;
    }
    for j in 0..n {
        let (pos, neg) = (d[j].max(0.0), (-d[j]).max(0.0));
        if pos > 0.0 {
            if lower[j].is_finite() {
                dual_objective += pos * lower[j];
                complementarity = complementarity.max(pos * (x[j] - lower[j]).abs());
            } else {
                dual_residual = dual_residual.max(pos);
            }
        }
        if neg > 0.0 {
            if upper[j].is_finite() {
                dual_objective -= neg * upper[j];
                complementarity = complementarity.max(neg * (upper[j] - x[j]).abs());
            } else {
                dual_residual = dual_residual.max(neg);
            }
        }
    }
    let primal_objective = model.objective_value(x);
    let gap = (primal_objective - dual_objective).abs();
    let obj_scale = 1.0 + primal_objective.abs();
    let primal_ok = primal_residual <= tol.feasibility * rhs_scale;
    let pass = sol.status == LpStatus::Optimal
        && primal_ok
        && dual_residual <= tol.optimality * cost_scale
        && complementarity <= tol.duality_gap * obj_scale
        && gap <= tol.duality_gap * obj_scale;
    DualityReport {
        primal_residual,
        dual_residual,
        complementarity,
        primal_objective,
        dual_objective,
        gap,
        violated_row: if primal_ok { None } else { violated_row },
        pass,
    }
}

/// True when `sol` carries a multiplier vector proving infeasibility.
pub fn check_farkas(model: &MilpModel, sol: &LpSolution) -> bool {
    sol.status == LpStatus::Infeasible
        && sol
            .farkas
            .as_ref()
            .is_some_and(|y| farkas_margin(model, &model.lower, &model.upper, y) < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarKind;
    use crate::simplex::{solve_lp, LpStats};

    fn two_by_two() -> MilpModel {
        // min -x - 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x, y >= 0
        let mut m = MilpModel::new();
        m.add_column("x", VarKind::Continuous, 0.0, f64::INFINITY, -1.0);
        m.add_column("y", VarKind::Continuous, 0.0, f64::INFINITY, -2.0);
        m.add_row(RowTag::Generic, [(0, 1.0), (1, 1.0)], Sense::Le, 4.0);
        m.add_row(RowTag::Generic, [(0, 1.0), (1, 3.0)], Sense::Le, 6.0);
        m
    }

    #[test]
    fn hand_built_pair_has_zero_gap() {
        // vertex (3, 1): duals solve y1 + y2 = -1, y1 + 3 y2 = -2
        let sol = LpSolution {
            status: LpStatus::Optimal,
            primal: vec![3.0, 1.0],
            dual: vec![-0.5, -0.5],
            reduced_costs: vec![0.0, 0.0],
            objective: -5.0,
            farkas: None,
            stats: LpStats::default(),
        };
        let r = check_duality(&two_by_two(), &sol);
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.dual_objective, -5.0);
        assert!(r.pass);
    }

    #[test]
    fn solver_output_passes() {
        let m = two_by_two();
        let sol = solve_lp(&m).unwrap();
        let r = check_duality(&m, &sol);
        assert!(r.pass, "{r:?}");
        assert!((sol.objective + 5.0).abs() < 1e-12);
    }

    #[test]
    fn perturbed_primal_names_the_row() {
        let m = two_by_two();
        let mut sol = solve_lp(&m).unwrap();
        sol.primal[1] += 0.1;
        let r = check_duality(&m, &sol);
        assert!(!r.pass);
        assert_eq!(r.violated_row, Some((1, RowTag::Generic)));
    }

    #[test]
    fn wrong_dual_sign_fails() {
        let m = two_by_two();
        let mut sol = solve_lp(&m).unwrap();
        sol.dual[0] = 0.5;
        assert!(!check_duality(&m, &sol).pass);
    }

    #[test]
    fn farkas_checked() {
        let mut m = MilpModel::new();
        m.add_column("x", VarKind::Continuous, 0.0, f64::INFINITY, 0.0);
        m.add_row(RowTag::Generic, [(0, 1.0)], Sense::Le, -1.0);
        let sol = solve_lp(&m).unwrap();
        assert!(check_farkas(&m, &sol));
        assert!(!check_farkas(&two_by_two(), &solve_lp(&two_by_two()).unwrap()));
    }
}
