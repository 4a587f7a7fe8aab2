//! Probabilistic parking on a one-way street: `m` cars, `n >= m` spots, and a
//! coin that sends a bumped car forward with probability `p`.
//!
//! The crate provides four views of the same model, built to cross-check one
//! another:
//!
//! - [`protocol`]: the deterministic parking protocol and the classical
//!   parking-function test;
//! - [`monte_carlo`]: seeded, reproducible sampling with mergeable estimators;
//! - [`oracle`]: exact ground truth at small sizes by full enumeration over
//!   the coin-decision tree (rational or float weights);
//! - [`closed_forms`] / [`asymptotics`] / [`tv`]: numerically stable closed
//!   forms for the last car's preference distribution and mean, their large-n
//!   expansions, and the total-variation convergence analysis with bounds.

pub mod asymptotics;
pub mod closed_forms;
pub mod error;
pub mod model;
pub mod monte_carlo;
pub mod numeric;
pub mod oracle;
pub mod protocol;
pub mod tv;

pub use error::{Error, Result};
pub use model::{
    cars_for_ratio, CoinDecisions, Direction, DistributionVector, ModelParams, ParkingTrace,
    PreferenceList,
};
pub use monte_carlo::{EstimateWithSe, HistogramResult, RngSpec};
pub use tv::TvReport;
