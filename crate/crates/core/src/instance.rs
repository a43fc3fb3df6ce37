//! Delivery-world domain types: items, requests, quadcopters, ground vehicles
//! and the derived site graph.
//!
//! Sites are numbered requests first, then quadcopter start locations, then
//! ground vehicles. Every ordered pair of sites (self pairs included) is an
//! edge, so an instance with `n` sites has `n * n` edges.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Planar coordinates in length units.
pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub weight: f64,
}

/// A service request. Positive demand counts are deliveries, negative counts
/// are pickups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: String,
    pub location: Point,
    pub demand: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadcopter {
    pub id: String,
    pub start_location: Point,
    pub capacity: f64,
    pub max_range: f64,
    /// Battery fraction in `[0, 1]` at the start of the mission.
    pub initial_charge: f64,
    #[serde(default)]
    pub initial_cargo: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundVehicle {
    pub id: String,
    pub location: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum SiteKind {
    Request(usize),
    QuadStart(usize),
    Vehicle(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site {
    pub kind: SiteKind,
    pub position: Point,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{entity} has a non-finite coordinate")]
    NonFiniteCoordinate { entity: String },
    #[error("quadcopter `{quad}` starts with cargo weight {weight} above its capacity {capacity}")]
    CargoExceedsCapacity {
        quad: String,
        weight: f64,
        capacity: f64,
    },
    #[error("{entity} references unknown item `{item}`")]
    UnknownItem { entity: String, item: String },
    #[error("{entity}: invalid {field} ({reason})")]
    InvalidField {
        entity: String,
        field: &'static str,
        reason: String,
    },
    #[error("request `{0}` has an empty demand")]
    EmptyDemand(String),
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// The complete delivery world.
///
/// Deserialized instances carry no site table until [`PdpInstance::validate`]
/// has run; every accessor below assumes a validated instance.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PdpInstance {
    #[serde(default)]
    pub items: Vec<Item>,
    #[serde(default)]
    pub requests: Vec<Request>,
    #[serde(default)]
    pub quadcopters: Vec<Quadcopter>,
    #[serde(default)]
    pub vehicles: Vec<GroundVehicle>,
    #[serde(skip)]
    sites: Vec<Site>,
}

impl PdpInstance {
    pub fn new(
        items: Vec<Item>,
        requests: Vec<Request>,
        quadcopters: Vec<Quadcopter>,
        vehicles: Vec<GroundVehicle>,
    ) -> Self {
        Self {
            items,
            requests,
            quadcopters,
            vehicles,
            sites: Vec::new(),
        }
    }

    /// Parses and validates an instance document.
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let raw: PdpInstance = serde_json::from_str(text)?;
        raw.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Checks every entity and derives the site table.
    pub fn validate(mut self) -> Result<Self, InstanceError> {
        unique_ids("item", self.items.iter().map(|i| i.id.as_str()))?;
        unique_ids("request", self.requests.iter().map(|r| r.id.as_str()))?;
        unique_ids("quadcopter", self.quadcopters.iter().map(|q| q.id.as_str()))?;
        unique_ids("vehicle", self.vehicles.iter().map(|v| v.id.as_str()))?;

        for item in &self.items {
            if !(item.weight.is_finite() && item.weight > 0.0) {
                return Err(invalid(format!("item `{}`", item.id), "weight", "must be positive"));
            }
        }
        let weights: BTreeMap<&str, f64> =
            self.items.iter().map(|i| (i.id.as_str(), i.weight)).collect();

        for r in &self.requests {
            let entity = format!("request `{}`", r.id);
            check_point(&entity, r.location)?;
            if r.demand.is_empty() {
                return Err(InstanceError::EmptyDemand(r.id.clone()));
            }
            for item in r.demand.keys() {
                if !weights.contains_key(item.as_str()) {
                    return Err(InstanceError::UnknownItem {
                        entity,
                        item: item.clone(),
                    });
                }
            }
        }

        for q in &self.quadcopters {
            let entity = format!("quadcopter `{}`", q.id);
            check_point(&entity, q.start_location)?;
            if !(q.capacity.is_finite() && q.capacity > 0.0) {
                return Err(invalid(entity, "capacity", "must be positive"));
            }
            if !(q.max_range.is_finite() && q.max_range > 0.0) {
                return Err(invalid(entity, "max_range", "must be positive"));
            }
            if !(0.0..=1.0).contains(&q.initial_charge) {
                return Err(invalid(entity, "initial_charge", "must lie in [0, 1]"));
            }
            let mut weight = 0.0;
            for (item, &count) in &q.initial_cargo {
                match weights.get(item.as_str()) {
                    Some(w) => weight += w * count as f64,
                    None => {
                        return Err(InstanceError::UnknownItem {
                            entity,
                            item: item.clone(),
                        })
                    }
                }
            }
            if weight > q.capacity {
                return Err(InstanceError::CargoExceedsCapacity {
                    quad: q.id.clone(),
                    weight,
                    capacity: q.capacity,
                });
            }
        }

        for v in &self.vehicles {
            check_point(&format!("vehicle `{}`", v.id), v.location)?;
        }

        self.sites = self
            .requests
            .iter()
            .enumerate()
            .map(|(i, r)| Site {
                kind: SiteKind::Request(i),
                position: r.location,
            })
            .chain(self.quadcopters.iter().enumerate().map(|(i, q)| Site {
                kind: SiteKind::QuadStart(i),
                position: q.start_location,
            }))
            .chain(self.vehicles.iter().enumerate().map(|(i, v)| Site {
                kind: SiteKind::Vehicle(i),
                position: v.location,
            }))
            .collect();
        Ok(self)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// |N|
    pub fn node_count(&self) -> usize {
        self.sites.len()
    }

    /// |E| = |N|²
    pub fn edge_count(&self) -> usize {
        self.sites.len() * self.sites.len()
    }

    pub fn request_node(&self, request: usize) -> usize {
        request
    }

    pub fn quad_node(&self, quad: usize) -> usize {
        self.requests.len() + quad
    }

    pub fn vehicle_node(&self, vehicle: usize) -> usize {
        self.requests.len() + self.quadcopters.len() + vehicle
    }

    pub fn is_request_node(&self, node: usize) -> bool {
        node < self.requests.len()
    }

    pub fn is_vehicle_node(&self, node: usize) -> bool {
        node >= self.requests.len() + self.quadcopters.len() && node < self.sites.len()
    }

    pub fn is_quad_start_node(&self, node: usize) -> bool {
        node >= self.requests.len() && node < self.requests.len() + self.quadcopters.len()
    }

    /// Id of the entity that owns site `node`.
    pub fn site_id(&self, node: usize) -> &str {
        match self.sites[node].kind {
            SiteKind::Request(i) => &self.requests[i].id,
            SiteKind::QuadStart(i) => &self.quadcopters[i].id,
            SiteKind::Vehicle(i) => &self.vehicles[i].id,
        }
    }

    pub fn position(&self, node: usize) -> Point {
        self.sites[node].position
    }

    /// Euclidean length |e| of the edge `from -> to`.
    pub fn distance(&self, from: usize, to: usize) -> f64 {
        distance(self.sites[from].position, self.sites[to].position)
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.items.iter().position(|i| i.id == id)
    }

    pub fn quad_index(&self, id: &str) -> Option<usize> {
        self.quadcopters.iter().position(|q| q.id == id)
    }

    /// Signed demand of `request`, aligned with `items`.
    pub fn demand_vector(&self, request: usize) -> Vec<i64> {
        let mut out = vec![0; self.items.len()];
        for (id, &count) in &self.requests[request].demand {
            if let Some(s) = self.item_index(id) {
                out[s] += count;
            }
        }
        out
    }

    /// Initial cargo of `quad`, aligned with `items`.
    pub fn initial_cargo_vector(&self, quad: usize) -> Vec<i64> {
        let mut out = vec![0; self.items.len()];
        for (id, &count) in &self.quadcopters[quad].initial_cargo {
            if let Some(s) = self.item_index(id) {
                out[s] += count as i64;
            }
        }
        out
    }

    /// Weight of an item-aligned cargo vector.
    pub fn cargo_weight(&self, cargo: &[i64]) -> f64 {
        cargo
            .iter()
            .zip(&self.items)
            .map(|(&c, item)| c as f64 * item.weight)
            .sum()
    }
}

/// Euclidean distance in the plane.
pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn unique_ids<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> Result<(), InstanceError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(InstanceError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

fn check_point(entity: &str, p: Point) -> Result<(), InstanceError> {
    if p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(InstanceError::NonFiniteCoordinate {
            entity: entity.to_string(),
        })
    }
}

fn invalid(entity: String, field: &'static str, reason: &str) -> InstanceError {
    InstanceError::InvalidField {
        entity,
        field,
        reason: reason.to_string(),
    }
}

/// Builders for small hand-made instances.
pub mod fixtures {
    use super::*;

    pub fn item(id: &str, weight: f64) -> Item {
        Item {
            id: id.into(),
            weight,
        }
    }

    pub fn request(id: &str, location: Point, demand: &[(&str, i64)]) -> Request {
        Request {
            id: id.into(),
            location,
            demand: demand.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn quad(id: &str, start: Point, cargo: &[(&str, u32)]) -> Quadcopter {
        Quadcopter {
            id: id.into(),
            start_location: start,
            capacity: 2.0,
            max_range: 20.0,
            initial_charge: 1.0,
            initial_cargo: cargo.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn vehicle(id: &str, location: Point) -> GroundVehicle {
        GroundVehicle {
            id: id.into(),
            location,
        }
    }

    /// One quadcopter carrying the single item, one request, one vehicle.
    pub fn worked_example() -> PdpInstance {
        PdpInstance::new(
            vec![item("s1", 1.0)],
            vec![request("r1", [3.0, 4.0], &[("s1", 1)])],
            vec![quad("h1", [0.0, 0.0], &[("s1", 1)])],
            vec![vehicle("v1", [6.0, 0.0])],
        )
        .validate()
        .expect("worked example is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn empty_instance_is_valid() {
        let inst = PdpInstance::default().validate().unwrap();
        assert_eq!(inst.node_count(), 0);
        assert_eq!(inst.edge_count(), 0);
    }

    #[test]
    fn worked_example_has_three_sites() {
        let inst = worked_example();
        assert_eq!(inst.node_count(), 3);
        assert_eq!(inst.edge_count(), 9);
        assert_eq!(inst.sites()[0].kind, SiteKind::Request(0));
        assert_eq!(inst.sites()[1].kind, SiteKind::QuadStart(0));
        assert_eq!(inst.sites()[2].kind, SiteKind::Vehicle(0));
    }

    #[test]
    fn cargo_above_capacity_is_rejected() {
        let mut q = quad("h1", [0.0, 0.0], &[("s1", 5)]);
        q.capacity = 3.0;
        let err = PdpInstance::new(vec![item("s1", 1.0)], vec![], vec![q], vec![])
            .validate()
            .unwrap_err();
        match err {
            InstanceError::CargoExceedsCapacity { quad, weight, .. } => {
                assert_eq!(quad, "h1");
                assert_eq!(weight, 5.0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_and_non_finite_are_named() {
        let err = PdpInstance::new(
            vec![item("a", 1.0), item("a", 2.0)],
            vec![],
            vec![],
            vec![],
        )
        .validate()
        .unwrap_err();
        assert!(err.to_string().contains("`a`"), "{err}");

        let err = PdpInstance::new(vec![], vec![], vec![], vec![vehicle("v9", [f64::NAN, 0.0])])
            .validate()
            .unwrap_err();
        assert!(matches!(err, InstanceError::NonFiniteCoordinate { ref entity } if entity.contains("v9")));
    }

    #[test]
    fn unknown_item_in_demand() {
        let err = PdpInstance::new(
            vec![item("a", 1.0)],
            vec![request("r", [0.0, 0.0], &[("b", 1)])],
            vec![],
            vec![],
        )
        .validate()
        .unwrap_err();
        assert!(matches!(err, InstanceError::UnknownItem { .. }));
    }

    #[test]
    fn distances() {
        assert_eq!(distance([0.0, 0.0], [0.0, 0.0]), 0.0);
        assert_eq!(distance([0.0, 0.0], [3.0, 4.0]), 5.0);
        assert_eq!(distance([1.0, 1.0], [4.0, 5.0]), 5.0);
    }

    #[test]
    fn node_numbering_is_stable() {
        let inst = PdpInstance::new(
            vec![item("a", 1.0)],
            vec![
                request("r1", [0.0, 0.0], &[("a", 1)]),
                request("r2", [1.0, 0.0], &[("a", -1)]),
            ],
            vec![quad("h1", [2.0, 0.0], &[]), quad("h2", [3.0, 0.0], &[])],
            vec![vehicle("v1", [4.0, 0.0])],
        )
        .validate()
        .unwrap();
        assert_eq!(inst.request_node(1), 1);
        assert_eq!(inst.quad_node(1), 3);
        assert_eq!(inst.vehicle_node(0), 4);
        assert!(inst.is_vehicle_node(4));
        assert!(inst.is_quad_start_node(2));
        assert!(!inst.is_quad_start_node(4));
    }

    #[test]
    fn json_round_trip_validates() {
        let text = r#"{
            "items": [{"id": "med", "weight": 1.0}],
            "requests": [{"id": "r1", "location": [3, 4], "demand": {"med": 1}}],
            "quadcopters": [{"id": "q1", "start_location": [0, 0], "capacity": 2,
                             "max_range": 10, "initial_charge": 1.0,
                             "initial_cargo": {"med": 1}}],
            "vehicles": [{"id": "v1", "location": [5, 5]}]
        }"#;
        let inst = PdpInstance::from_json(text).unwrap();
        assert_eq!(inst.node_count(), 3);
        let again = PdpInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn validate_is_idempotent() {
        let inst = worked_example();
        assert_eq!(inst.clone().validate().unwrap(), inst);
    }
}
