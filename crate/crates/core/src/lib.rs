//! Core of a decentralized freight spot market simulator.
//!
//! A shipper posts a bid and a carrier posts an ask for every open transport
//! job, each day. A neutral broker ships the subset of jobs that maximizes the
//! total bid-ask spread under the vehicle capacity (an exact 0-1 knapsack).
//! Both traders learn Gaussian pricing strategies with policy-gradient updates
//! once per episode.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem, the command line or a serialization format lives in the
//! companion `spotmarket` crate.
//!
//! Module map:
//!
//! - [`market`]: jobs, states, case configurations, arrivals, rewards and the
//!   daily state transition.
//! - [`broker`]: spread-maximizing and volume-maximizing knapsack allocation.
//! - [`agents`]: features, networks, Gaussian policies, ADAM and the update rules.
//! - [`log`]: the per-episode information vectors consumed by updates and metrics.
//! - [`metrics`]: Nash adherence, fairness, utilization and reward shares.
//! - [`game`]: feasibility classification, equilibrium predicates and
//!   best-response analysis of payoff matrices.
//! - [`sim`]: episode loop and replication driver.
//! - [`experiment`]: experiment configuration and named presets.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agents;
pub mod broker;
mod error;
pub mod experiment;
pub mod game;
pub mod log;
pub mod market;
pub mod metrics;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
