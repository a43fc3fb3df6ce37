//! Hardware requirement checks for a delivery quadrotor.

use std::fmt;

use crate::config::{ConfigError, KvConfig};

/// Numeric thresholds of the nine airframe requirements.
#[derive(Clone, Debug, PartialEq)]
pub struct UavRequirements {
    pub min_flight_minutes: f64,
    pub thrust_to_weight_range: [f64; 2],
    pub max_width_inches: f64,
    pub max_mass_kg: f64,
    pub payload_range_kg: [f64; 2],
    pub min_max_height_ft: f64,
}

impl Default for UavRequirements {
    fn default() -> Self {
        Self {
            min_flight_minutes: 10.0,
            thrust_to_weight_range: [1.5, 2.0],
            max_width_inches: 30.0,
            max_mass_kg: 1.5,
            payload_range_kg: [0.5, 1.0],
            min_max_height_ft: 10.0,
        }
    }
}

impl UavRequirements {
    pub fn is_well_formed(&self) -> bool {
        let positive = [
            self.min_flight_minutes,
            self.max_width_inches,
            self.max_mass_kg,
            self.min_max_height_ft,
            self.thrust_to_weight_range[0],
            self.payload_range_kg[0],
        ]
        .iter()
        .all(|v| *v > 0.0);
        positive
            && self.thrust_to_weight_range[0] < self.thrust_to_weight_range[1]
            && self.payload_range_kg[0] < self.payload_range_kg[1]
    }
}

/// Declared physical properties of an airframe.
#[derive(Clone, Debug, PartialEq)]
pub struct HardwareParams {
    pub endurance_minutes: f64,
    pub thrust_to_weight: f64,
    pub range_sensors: bool,
    pub autonomous_flight: bool,
    pub wireless: bool,
    pub width_inches: f64,
    pub mass_kg: f64,
    pub payload_kg: f64,
    pub prop_guards: bool,
    pub max_height_ft: f64,
}

impl HardwareParams {
    /// Reads the declaration from a config. `thrust_to_weight` may be given
    /// directly or derived from `thrust_coefficient`, `max_motor_speed`,
    /// `mass` and `gravity` (four rotors at full speed).
    pub fn from_config(cfg: &KvConfig) -> Result<Self, ConfigError> {
        let mass_kg: f64 = cfg.get("mass")?;
        let thrust_to_weight = if cfg.contains("thrust_to_weight") {
            cfg.get("thrust_to_weight")?
        } else {
            let k: f64 = cfg.get("thrust_coefficient")?;
            let w_max: f64 = cfg.get("max_motor_speed")?;
            let g: f64 = cfg.get_or("gravity", 9.81)?;
            4.0 * k * w_max * w_max / (mass_kg * g)
        };
        Ok(Self {
            endurance_minutes: cfg.get("endurance_minutes")?,
            thrust_to_weight,
            range_sensors: cfg.get("range_sensors")?,
            autonomous_flight: cfg.get("autonomous_flight")?,
            wireless: cfg.get("wireless")?,
            width_inches: cfg.get("width_inches")?,
            mass_kg,
            payload_kg: cfg.get("payload_kg")?,
            prop_guards: cfg.get("prop_guards")?,
            max_height_ft: cfg.get("max_height_ft")?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub number: u8,
    pub name: &'static str,
    pub threshold: String,
    pub observed: String,
    /// Declared-only properties that cannot be measured in simulation.
    pub declared: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecReport {
    pub verdicts: Vec<Verdict>,
}

impl SpecReport {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, number: u8) -> &Verdict {
        &self.verdicts[number as usize - 1]
    }
}

impl fmt::Display for SpecReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<3} {:<28} {:<22} {:<12} result", "#", "requirement", "threshold", "observed")?;
        for v in &self.verdicts {
            let kind = if v.declared { " (declared)" } else { "" };
            writeln!(
                f,
                "{:<3} {:<28} {:<22} {:<12} {}{}",
                v.number,
                v.name,
                v.threshold,
                v.observed,
                if v.pass { "PASS" } else { "FAIL" },
                kind
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

/// Evaluates the nine requirements in order.
pub fn spec_check(params: &HardwareParams, reqs: &UavRequirements) -> SpecReport {
    let [tw_lo, tw_hi] = reqs.thrust_to_weight_range;
    let [pl_lo, pl_hi] = reqs.payload_range_kg;
    let measured = |number, name, threshold: String, observed: f64, pass: bool| Verdict {
        number,
        name,
        threshold,
        observed: format!("{observed}"),
        declared: false,
        pass,
    };
    let declared = |number, name, value: bool| Verdict {
        number,
        name,
        threshold: "declared".into(),
        observed: format!("{value}"),
        declared: true,
        pass: value,
    };
    let verdicts = vec![
        measured(
            1,
            "battery endurance (min)",
            format!(">= {}", reqs.min_flight_minutes),
            params.endurance_minutes,
            params.endurance_minutes >= reqs.min_flight_minutes,
        ),
        measured(
            2,
            "thrust-to-weight ratio",
            format!("[{tw_lo}, {tw_hi}]"),
            params.thrust_to_weight,
            (tw_lo..=tw_hi).contains(&params.thrust_to_weight),
        ),
        declared(3, "range sensing", params.range_sensors),
        declared(4, "autonomous flight phases", params.autonomous_flight),
        declared(5, "wireless link", params.wireless),
        measured(
            6,
            "maximum width (in)",
            format!("< {}", reqs.max_width_inches),
            params.width_inches,
            params.width_inches < reqs.max_width_inches,
        ),
        Verdict {
            number: 7,
            name: "mass (kg) / payload (kg)",
            threshold: format!("< {}; [{pl_lo}, {pl_hi}]", reqs.max_mass_kg),
            observed: format!("{}/{}", params.mass_kg, params.payload_kg),
            declared: false,
            pass: params.mass_kg < reqs.max_mass_kg
                && (pl_lo..=pl_hi).contains(&params.payload_kg),
        },
        declared(8, "propeller guards", params.prop_guards),
        measured(
            9,
            "maximum height (ft)",
            format!(">= {}", reqs.min_max_height_ft),
            params.max_height_ft,
            params.max_height_ft >= reqs.min_max_height_ft,
        ),
    ];
    SpecReport { verdicts }
}
