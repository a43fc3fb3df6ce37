//! Planner integration: MILP against the oracle on random instances, and the
//! validator against mutated plans.

use proptest::prelude::*;
use quaddel::generate::{random_instance, Shape};
use quaddel::instance::PdpInstance;
use quaddel::oracle::{brute_force_solve, default_max_legs};
use quaddel::par::Parallelism;
use quaddel::planner::{plan, PlanOptions};
use quaddel::routes::{validate_plan, RoutePlan, ViolationKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> PdpInstance {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed), &Shape::default())
}

fn feasible_plans(count: usize) -> Vec<(PdpInstance, RoutePlan)> {
    (0..200u64)
        .map(instance)
        .filter_map(|inst| {
            let p = brute_force_solve(&inst, default_max_legs(&inst), Parallelism::Sequential).ok()?;
            Some((inst, p))
        })
        .take(count)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn milp_plans_are_valid_and_optimal(seed in any::<u64>()) {
        let inst = instance(seed);
        let oracle = brute_force_solve(&inst, default_max_legs(&inst), Parallelism::Sequential);
        match (plan(&inst, &PlanOptions::default()), oracle) {
            (Ok(m), Ok(o)) => {
                prop_assert!(validate_plan(&inst, &m.plan).is_ok());
                prop_assert!((m.objective - o.makespan).abs() < 1e-6);
            }
            (Err(_), Err(_)) => {}
            (m, o) => prop_assert!(false, "disagreement: {:?} vs {:?}", m.map(|m| m.objective), o.map(|o| o.makespan)),
        }
    }

    #[test]
    fn cuts_preserve_the_optimum(seed in any::<u64>()) {
        let inst = instance(seed);
        let with = plan(&inst, &PlanOptions::default()).ok().map(|o| o.objective);
        let without = plan(&inst, &PlanOptions { with_cuts: false, ..PlanOptions::default() }).ok().map(|o| o.objective);
        match (with, without) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-6),
            (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>()) {
        let inst = instance(seed);
        let back = PdpInstance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back, inst);
    }
}

#[test]
fn oracle_plans_round_trip_through_json() {
    for (inst, p) in feasible_plans(10) {
        let back = RoutePlan::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(validate_plan(&inst, &back).is_ok());
    }
}

#[test]
fn mutations_are_caught() {
    let plans = feasible_plans(20);
    assert!(plans.len() >= 10);
    for (inst, p) in plans {
        let mut m = p.clone();
        m.makespan += 1.0;
        assert!(validate_plan(&inst, &m).has(ViolationKind::MakespanMismatch));

        let mut m = p.clone();
        m.routes[0].legs[0].length += 0.5;
        assert!(validate_plan(&inst, &m).has(ViolationKind::LengthMismatch));

        let mut m = p.clone();
        m.routes[0].legs[0].charge += 0.1;
        assert!(validate_plan(&inst, &m).has(ViolationKind::ChargeMismatch));

        let mut m = p.clone();
        let leg = &mut m.routes[0].legs[0];
        leg.reserve = Some(leg.charge + 0.1);
        assert!(validate_plan(&inst, &m).has(ViolationKind::ReserveAboveCharge));

        let mut m = p.clone();
        if let Some(n) = m.routes[0].legs[0].cargo.values_mut().next() {
            *n += 1;
            assert!(!validate_plan(&inst, &m).is_ok());
        }

        let mut m = p.clone();
        let route = m.routes.iter_mut().find(|r| r.legs.len() >= 2);
        if let Some(r) = route {
            r.legs.pop();
            assert!(!validate_plan(&inst, &m).is_ok());
        }

        let mut m = p.clone();
        m.routes.pop();
        assert!(validate_plan(&inst, &m).has(ViolationKind::RouteCount));
    }
}
