//! Multi-object tracking with a Poisson multi-Bernoulli filter that keeps a
//! single global association hypothesis per frame (GNN-PMB).
//!
//! The crate provides the filter and its PMBM and M/N-logic baselines, the
//! assignment solvers they use, detection preprocessing, tracking metrics
//! (MOTA/MOTP/AMOTA/AMOTP and friends), a synthetic scene simulator, and the
//! JSON/TOML file formats used by the `gnnpmb` command line tool.

pub mod association;
pub mod error;
pub mod filter;
pub mod models;
pub mod io;
pub mod metrics;
pub mod preprocess;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
