//! Precoded cluster hopping for multi-beam satellites.
//!
//! The pipeline runs from a [`Scenario`] (beam grid, demands, cluster
//! partition and adjacency) through per-cluster channel matrices, MMSE
//! precoding and DVB-S2 link adaptation to per-slot cluster capacities.
//! Valid snapshots of non-adjacent clusters and those capacities feed the
//! illumination planner, which splits the hopping window between snapshots
//! to maximize the worst demand satisfaction ratio.

pub mod benchmarks;
pub mod channel;
pub mod cli;
pub mod dvbs2;
pub mod error;
pub mod lp;
pub mod metrics;
pub mod planner;
pub mod precoding;
pub mod scenario;
pub mod snapshots;

pub use error::{Error, Result};
pub use scenario::{load_scenario, Scenario};
