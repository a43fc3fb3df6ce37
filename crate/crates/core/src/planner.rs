//! End-to-end planning: build the MILP, solve it, extract and validate routes.

use thiserror::Error;

use crate::bnb::{branch_and_bound, MipConfig, MipError, MipStats};
use crate::builder::build_model;
use crate::instance::PdpInstance;
use crate::routes::{extract_routes, validate_plan, RouteError, RoutePlan, ValidationReport, PLAN_TOL};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanOptions {
    pub with_cuts: bool,
    pub mip: MipConfig,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            with_cuts: true,
            mip: MipConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutcome {
    pub plan: RoutePlan,
    /// Optimal value of T reported by the solver.
    pub objective: f64,
    pub stats: MipStats,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("no feasible plan exists")]
    Infeasible,
    #[error("solver: {0}")]
    Solver(MipError),
    #[error("route extraction: {0}")]
    Extraction(#[from] RouteError),
    #[error("extracted plan fails validation: {}", .0.violations.len())]
    Invalid(ValidationReport),
}

pub fn plan(inst: &PdpInstance, opts: &PlanOptions) -> Result<PlanOutcome, PlanError> {
    let built = build_model(inst, opts.with_cuts);
    let sol = branch_and_bound(&built.model, &opts.mip).map_err(|e| match e {
        MipError::Infeasible => PlanError::Infeasible,
        other => PlanError::Solver(other),
    })?;
    let plan = extract_routes(inst, &built.layout, &sol.incumbent)?;
    let report = validate_plan(inst, &plan);
    if !report.is_ok() || (plan.makespan - sol.objective).abs() > PLAN_TOL * (1.0 + sol.objective.abs()) {
        return Err(PlanError::Invalid(report));
    }
    Ok(PlanOutcome {
        plan,
        objective: sol.objective,
        stats: sol.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;

    #[test]
    fn worked_example_plan() {
        let out = plan(&worked_example(), &PlanOptions::default()).unwrap();
        assert_eq!(out.plan.walks(), vec![vec![1, 0]]);
        assert!((out.objective - 5.0).abs() < 1e-9);
    }

    #[test]
    fn cuts_do_not_change_the_optimum() {
        let inst = worked_example();
        let without = PlanOptions {
            with_cuts: false,
            ..PlanOptions::default()
        };
        let a = plan(&inst, &PlanOptions::default()).unwrap();
        let b = plan(&inst, &without).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-9);
    }

    #[test]
    fn unreachable_request_is_infeasible() {
        let inst = PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [300.0, 0.0], &[("s1", 1)])],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)])],
            vec![],
        )
        .validate()
        .unwrap();
        assert_eq!(plan(&inst, &PlanOptions::default()), Err(PlanError::Infeasible));
    }
}
