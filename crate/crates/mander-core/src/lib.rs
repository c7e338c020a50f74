//! Exact models for two-party redistricting analysis.
//!
//! The crate provides, in dependency order:
//!
//! - [`model`]: cells, grid/planar maps, plans, and per-district tallies;
//! - [`validity`]: district connectivity and population-balance checking;
//! - [`metrics`]: seat/vote shares, efficiency gap, partisan bias, the
//!   seat-vote approximation factor, and Polsby-Popper compactness;
//! - [`enumerate`]: exhaustive enumeration of valid plans on small maps,
//!   plus a naive reference oracle;
//! - [`optimize`]: boundary-flip local search with restarts and optional
//!   simulated annealing;
//! - [`gadgets`]: generators and verifiers for two families of hard
//!   benchmark instances (a grid family reduced from PARTITION and a
//!   planar family reduced from maximum independent set on cubic graphs);
//! - [`io`]: JSON file formats and spec strings shared with the CLI.
//!
//! All counts are exact integers; derived ratios are exact rationals.
//! Floating point appears only in annealing acceptance probabilities and
//! in `_approx` convenience fields of serialized reports.

pub mod enumerate;
pub mod exact;
pub mod gadgets;
pub mod io;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod validity;

#[cfg(test)]
pub(crate) mod testutil;

pub use model::{CellData, MapInstance, Party, Plan};
pub use validity::BalanceCriterion;
