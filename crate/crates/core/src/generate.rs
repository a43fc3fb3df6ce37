//! Seeded random instances on a small integer grid.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{GroundVehicle, Item, PdpInstance, Quadcopter, Request};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    pub max_quads: usize,
    pub max_requests: usize,
    pub max_vehicles: usize,
    pub max_items: usize,
    /// Coordinates are integers in `0..=grid`.
    pub grid: i32,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_quads: 2,
            max_requests: 3,
            max_vehicles: 1,
            max_items: 2,
            grid: 10,
        }
    }
}

fn point(rng: &mut impl Rng, grid: i32) -> [f64; 2] {
    [rng.gen_range(0..=grid) as f64, rng.gen_range(0..=grid) as f64]
}

/// One instance drawn from `rng`; always passes validation.
pub fn random_instance(rng: &mut impl Rng, shape: &Shape) -> PdpInstance {
    let n_items = rng.gen_range(1..=shape.max_items.max(1));
    let items: Vec<Item> = (0..n_items)
        .map(|s| Item {
            id: format!("s{}", s + 1),
            weight: rng.gen_range(1..=2) as f64,
        })
        .collect();
    let n_requests = rng.gen_range(1..=shape.max_requests.max(1));
    // every quadcopter has to fly somewhere, so fleets never outnumber requests
    let n_quads = rng.gen_range(1..=shape.max_quads.max(1).min(n_requests));
    let n_vehicles = if rng.gen_bool(0.75) {
        rng.gen_range(1..=shape.max_vehicles.max(1)).min(shape.max_vehicles)
    } else {
        0
    };

    let mut quads: Vec<Quadcopter> = (0..n_quads)
        .map(|h| Quadcopter {
            id: format!("h{}", h + 1),
            start_location: point(rng, shape.grid),
            capacity: rng.gen_range(3..=5) as f64,
            max_range: rng.gen_range(12..=30) as f64,
            initial_charge: rng.gen_range(7..=10) as f64 / 10.0,
            initial_cargo: BTreeMap::new(),
        })
        .collect();
    let mut requests = Vec::new();
    for r in 0..n_requests {
        let s = rng.gen_range(0..n_items);
        let pickup = rng.gen_bool(0.25);
        let count = rng.gen_range(1..=2i64);
        let mut demand = BTreeMap::new();
        demand.insert(items[s].id.clone(), if pickup { -count } else { count });
        if !pickup {
            // load the delivered units onto a random quadcopter when it fits
            let h = rng.gen_range(0..n_quads);
            let quad = &mut quads[h];
            let load: f64 = quad
                .initial_cargo
                .iter()
                .map(|(id, c)| items.iter().find(|i| &i.id == id).unwrap().weight * *c as f64)
                .sum();
            if load + items[s].weight * count as f64 <= quad.capacity {
                *quad.initial_cargo.entry(items[s].id.clone()).or_insert(0) += count as u32;
            }
        }
        requests.push(Request {
            id: format!("r{}", r + 1),
            location: point(rng, shape.grid),
            demand,
        });
    }
    let vehicles = (0..n_vehicles)
        .map(|k| GroundVehicle {
            id: format!("v{}", k + 1),
            location: point(rng, shape.grid),
        })
        .collect();
    PdpInstance::new(items, requests, quads, vehicles)
        .validate()
        .expect("generated instances are valid")
}

/// `count` instances from a ChaCha stream seeded with `seed`.
pub fn corpus(seed: u64, count: usize, shape: &Shape) -> Vec<PdpInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_instance(&mut rng, shape)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible_and_bounded() {
        let shape = Shape::default();
        let a = corpus(7, 20, &shape);
        assert_eq!(a, corpus(7, 20, &shape));
        assert_ne!(a, corpus(8, 20, &shape));
        for inst in &a {
            assert!((1..=2).contains(&inst.quadcopters.len()));
            assert!((1..=3).contains(&inst.requests.len()));
            assert!(inst.vehicles.len() <= 1);
            for r in &inst.requests {
                assert!(r.location.iter().all(|&c| (0.0..=10.0).contains(&c) && c.fract() == 0.0));
            }
        }
    }
}
