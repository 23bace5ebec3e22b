//! Exact local optima networks (LONs) for small Quadratic Assignment Problem
//! instances.
//!
//! The pipeline is:
//!
//! 1. generate or load a [`QapInstance`] ([`generate`]),
//! 2. hill-climb from every permutation to get the basins of attraction
//!    ([`landscape::enumerate_basins`]),
//! 3. count basin-to-basin swap transitions into a directed [`Lon`]
//!    ([`lon::build_lon`]) and filter it to an undirected backbone
//!    ([`lon::filter_lon`]),
//! 4. score the clustering of optima with modularity-based community
//!    detection ([`community`]),
//! 5. batch the above over many seeded instances and summarize
//!    ([`experiment`], [`stats`]).

pub mod community;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod landscape;
pub mod lon;
pub mod qap;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use landscape::{BasinMap, LocalOptimum};
pub use lon::{FilteredLon, Lon};
pub use qap::{ClassTag, Cost, Permutation, QapInstance};
