//! Quadrotor delivery planning and simulation.
//!
//! * [`instance`], [`layout`], [`builder`]: the pickup-and-delivery world and
//!   its mixed-integer linear program.
//! * [`model`], [`simplex`], [`bnb`], [`certificate`]: an LP/MILP solver with
//!   duality checks.
//! * [`routes`], [`oracle`]: route extraction, plan validation and an
//!   exhaustive reference planner.
//! * [`dynamics`], [`control`], [`flight`]: rigid-body simulation and cascaded
//!   PID flight control.
//! * [`vision`]: Canny edge detection over portable graymaps.
//!
//! With the default `parallel` feature, batch workloads (node pairs in branch
//! and bound, oracle enumeration, image rows, multi-quad flights) run on
//! rayon; without it every path runs sequentially with identical results.

pub mod bnb;
pub mod builder;
pub mod certificate;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod flight;
pub mod generate;
pub mod instance;
pub mod layout;
pub mod model;
pub mod oracle;
pub mod par;
pub mod planner;
pub mod presolve;
pub mod requirements;
pub mod routes;
pub mod simplex;
pub mod vision;

pub use instance::{PdpInstance, Point};
pub use model::{MilpModel, RowTag, Sense, VarKind};
