//! Simulation of decentralized online convex optimization over gossip
//! networks with compressed communication.
//!
//! Modules, bottom-up:
//!
//! - [`topology`]: graphs, max-degree gossip matrices and their spectra.
//! - [`compress`]: contractive compressors, the repeated compressor, byte costs.
//! - [`geometry`]: ball and box domains, projection, shrinkage.
//! - [`adversary`]: loss streams, the best fixed comparator, bandit estimators.
//! - [`gossip`]: Choco-gossip in naive and efficient form.
//! - [`algorithms`]: Top-DOGD, its bandit variants, DC-DOGD and D-OGD.
//! - [`harness`]: configs, seeded runs, CSV output, sweeps, delay probe.

pub mod adversary;
pub mod algorithms;
pub mod compress;
pub mod error;
pub mod geometry;
pub mod gossip;
pub mod harness;
pub mod rng;
pub mod topology;
pub mod vector;

pub use error::{Error, Result};
