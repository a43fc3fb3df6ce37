//! Translation of a delivery instance into its mixed-integer program.
//!
//! The model minimizes the makespan T. Charge is normalized to `[0, 1]`, so
//! flying an edge of length `|e|` costs `|e| / max_range(h)` of quadcopter
//! `h`'s battery.

use crate::instance::PdpInstance;
use crate::layout::{Family, VariableLayout};
use crate::model::{MilpModel, RowTag, Sense, VarKind};

/// Slack used when deciding whether a launch leg is out of battery range.
const RANGE_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PdpModel {
    pub layout: VariableLayout,
    pub model: MilpModel,
}

/// Builds the MILP; `with_cuts` adds the launch-leg feasibility cuts.
pub fn build_model(inst: &PdpInstance, with_cuts: bool) -> PdpModel {
    let layout = VariableLayout::for_instance(inst);
    let n = inst.node_count();
    let h_count = inst.quadcopters.len();
    let s_count = inst.items.len();
    let r_count = inst.requests.len();
    let v_count = inst.vehicles.len();
    let mut m = MilpModel::new();

    let max_capacity = inst
        .quadcopters
        .iter()
        .map(|q| q.capacity)
        .fold(0.0, f64::max);
    for j in 0..layout.total_columns() {
        let name = layout.name(j);
        match layout.key(j) {
            Some(crate::layout::VarKey::Edge { family, owner, .. }) => match family {
                Family::X => m.add_column(name, VarKind::Binary, 0.0, 1.0, 0.0),
                Family::Q => {
                    let ub = (max_capacity / inst.items[owner].weight + 1e-9).floor();
                    m.add_column(name, VarKind::Integer, 0.0, ub, 0.0)
                }
                Family::Z | Family::T => m.add_column(name, VarKind::Continuous, 0.0, f64::INFINITY, 0.0),
            },
            _ => m.add_column(name, VarKind::Continuous, 0.0, f64::INFINITY, 1.0),
        };
    }
    let t_col = layout.makespan_column();

    let x = |h: usize, a: usize, b: usize| layout.col(Family::X, h, a, b);
    let q = |s: usize, a: usize, b: usize| layout.col(Family::Q, s, a, b);
    let z = |h: usize, a: usize, b: usize| layout.col(Family::Z, h, a, b);
    let t = |h: usize, a: usize, b: usize| layout.col(Family::T, h, a, b);
    let charge_cost = |h: usize, a: usize, b: usize| inst.distance(a, b) / inst.quadcopters[h].max_range;
    let start = |h: usize| inst.quad_node(h);
    let vehicles = || (0..v_count).map(|k| inst.vehicle_node(k));

    for h in 0..h_count {
        for v in 0..n {
            m.add_row(RowTag::SelfLoop, [(x(h, v, v), 1.0)], Sense::Le, 0.0);
        }
    }
    // nobody may arrive at any quadcopter's start site
    for h in 0..h_count {
        for owner in 0..h_count {
            for v in 0..n {
                m.add_row(RowTag::StartArrival, [(x(h, v, start(owner)), 1.0)], Sense::Le, 0.0);
            }
        }
    }
    for h in 0..h_count {
        let c = inst.quadcopters[h].initial_charge;
        for v in 0..n {
            let s = start(h);
            m.add_row(
                RowTag::FirstLegBattery,
                [(z(h, s, v), 1.0), (x(h, s, v), charge_cost(h, s, v))],
                Sense::Le,
                c,
            );
        }
    }
    for h in 0..h_count {
        for depot in vehicles() {
            for v in 0..n {
                m.add_row(
                    RowTag::StationBattery,
                    [(z(h, depot, v), 1.0), (x(h, depot, v), charge_cost(h, depot, v))],
                    Sense::Le,
                    1.0,
                );
            }
        }
    }
    for owner in 0..h_count {
        for h in (0..h_count).filter(|&h| h != owner) {
            for v in 0..n {
                m.add_row(RowTag::ForeignDeparture, [(x(h, start(owner), v), 1.0)], Sense::Le, 0.0);
            }
        }
    }

    // Type 0: at most one departure from the start.
    for h in 0..h_count {
        m.add_row(RowTag::Type(0), (0..n).map(|v| (x(h, start(h), v), 1.0)), Sense::Le, 1.0);
    }
    // Type 1: cargo leaving the start equals the initial cargo.
    for h in 0..h_count {
        let cargo = inst.initial_cargo_vector(h);
        for s in 0..s_count {
            for v in 0..n {
                m.add_row(
                    RowTag::Type(1),
                    [(q(s, start(h), v), 1.0), (x(h, start(h), v), -(cargo[s] as f64))],
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }
    // Type 2: each edge flown by at most one quadcopter.
    for b in 0..n {
        for a in 0..n {
            m.add_row(RowTag::Type(2), (0..h_count).map(|h| (x(h, a, b), 1.0)), Sense::Le, 1.0);
        }
    }
    // Type 3: item inflow minus outflow at a request equals its signed demand.
    for r in 0..r_count {
        let site = inst.request_node(r);
        let demand = inst.demand_vector(r);
        for s in 0..s_count {
            let terms = (0..n)
                .map(|v| (q(s, v, site), 1.0))
                .chain((0..n).map(|v| (q(s, site, v), -1.0)));
            m.add_row(RowTag::Type(3), terms, Sense::Eq, demand[s] as f64);
        }
    }
    // Type 4: every request is entered exactly once over all quadcopters.
    for r in 0..r_count {
        let site = inst.request_node(r);
        let terms = (0..h_count).flat_map(|h| (0..n).map(move |v| (x(h, v, site), 1.0)));
        m.add_row(RowTag::Type(4), terms, Sense::Eq, 1.0);
    }
    // Type 5: carried weight within the flying quadcopter's capacity.
    for b in 0..n {
        for a in 0..n {
            let load = (0..s_count).map(|s| (q(s, a, b), inst.items[s].weight));
            let cap = (0..h_count).map(|h| (x(h, a, b), -inst.quadcopters[h].capacity));
            m.add_row(RowTag::Type(5), load.chain(cap), Sense::Le, 0.0);
        }
    }
    // Type 6: a quadcopter leaves a request only if it arrived there.
    for r in 0..r_count {
        let site = inst.request_node(r);
        for h in 0..h_count {
            let terms = (0..n)
                .map(|v| (x(h, site, v), 1.0))
                .chain((0..n).map(|v| (x(h, v, site), -1.0)));
            m.add_row(RowTag::Type(6), terms, Sense::Le, 0.0);
        }
    }
    // Type 7: departures from a vehicle never exceed arrivals.
    for h in 0..h_count {
        for depot in vehicles() {
            let terms = (0..n)
                .map(|v| (x(h, depot, v), 1.0))
                .chain((0..n).map(|v| (x(h, v, depot), -1.0)));
            m.add_row(RowTag::Type(7), terms, Sense::Le, 0.0);
        }
    }
    // Type 8: battery reserve only on flown edges (maximum charge 1).
    for h in 0..h_count {
        for b in 0..n {
            for a in 0..n {
                m.add_row(RowTag::Type(8), [(z(h, a, b), 1.0), (x(h, a, b), -1.0)], Sense::Le, 0.0);
            }
        }
    }
    // Type 9: reserve drops across a request by the next leg's consumption.
    for h in 0..h_count {
        for r in 0..r_count {
            let site = inst.request_node(r);
            let terms = (0..n)
                .map(|v| (z(h, v, site), 1.0))
                .chain((0..n).map(|v| (z(h, site, v), -1.0)))
                .chain((0..n).map(|v| (x(h, site, v), -charge_cost(h, site, v))));
            m.add_row(RowTag::Type(9), terms, Sense::Eq, 0.0);
        }
    }
    // Type 10: leg counters live on flown edges only.
    let big_m = (2 * r_count + v_count) as f64;
    for h in 0..h_count {
        for b in 0..n {
            for a in 0..n {
                m.add_row(RowTag::Type(10), [(t(h, a, b), 1.0), (x(h, a, b), -big_m)], Sense::Le, 0.0);
            }
        }
    }
    // Type 11: leg counter drops by one per departure at requests and vehicles.
    let counted = (0..v_count).map(|k| inst.vehicle_node(k)).chain(0..r_count);
    for site in counted {
        for h in 0..h_count {
            let terms = (0..n)
                .map(|v| (t(h, v, site), 1.0))
                .chain((0..n).map(|v| (t(h, site, v), -1.0)))
                .chain((0..n).map(|v| (x(h, site, v), -1.0)));
            m.add_row(RowTag::Type(11), terms, Sense::Eq, 0.0);
        }
    }
    // Type 12: makespan bounds every route length.
    for h in 0..h_count {
        let terms = (0..n)
            .flat_map(|b| (0..n).map(move |a| (a, b)))
            .map(|(a, b)| (x(h, a, b), inst.distance(a, b)))
            .chain(std::iter::once((t_col, -1.0)));
        m.add_row(RowTag::Type(12), terms, Sense::Le, 0.0);
    }
    // Type 13: every quadcopter departs.
    for h in 0..h_count {
        m.add_row(RowTag::Type(13), (0..n).map(|v| (x(h, start(h), v), 1.0)), Sense::Ge, 1.0);
    }

    if with_cuts {
        for h in 0..h_count {
            for v in launch_cuts(inst, h) {
                m.add_row(RowTag::LaunchCut, [(x(h, start(h), v), 1.0)], Sense::Le, 0.0);
            }
        }
    }

    PdpModel { layout, model: m }
}

/// Sites that quadcopter `h` can never reach on its launch leg: out of
/// battery range, a delivery the initial cargo cannot cover, or a pickup
/// that overflows the capacity.
pub fn launch_cuts(inst: &PdpInstance, h: usize) -> Vec<usize> {
    let quad = &inst.quadcopters[h];
    let s = inst.quad_node(h);
    let cargo = inst.initial_cargo_vector(h);
    let mut out = Vec::new();
    for v in 0..inst.node_count() {
        if v == s || inst.is_quad_start_node(v) {
            continue;
        }
        let out_of_range = inst.distance(s, v) / quad.max_range > quad.initial_charge + RANGE_EPS;
        let infeasible_service = inst.is_request_node(v) && {
            let demand = inst.demand_vector(v);
            let after: Vec<i64> = cargo.iter().zip(&demand).map(|(c, d)| c - d).collect();
            let missing = demand.iter().zip(&cargo).any(|(&d, &c)| d > 0 && c < d);
            missing || inst.cargo_weight(&after) > quad.capacity + RANGE_EPS
        };
        if out_of_range || infeasible_service {
            out.push(v);
        }
    }
    out
}
