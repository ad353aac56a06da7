//! Independent non-explosion oracles: the exact one-dimensional scale/speed
//! test and a Monte-Carlo escape-probability estimator.

pub mod explosion;
pub mod feller;

pub use explosion::{em_explosion_mc, ExplosionConfig, ExplosionEstimate, RungEstimate, Simulator};
pub use feller::{feller_test, FellerConfig, FellerResult, FellerSide, SideVerdict};
