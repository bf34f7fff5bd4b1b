//! Multi-hardware neural architecture search at desk scale.
//!
//! One model deployed across several hardware targets beats maintaining one
//! model per target, if the architecture is chosen well. This crate provides
//! the machinery to choose it:
//!
//! - [`graph`]: a concrete layer-level IR with analytical MAdds/parameter
//!   counting, plus the published mobile baselines as builders.
//! - [`space`] / [`genome`]: a categorical search space over a fixed
//!   skeleton, restricted to operations every examined hardware supports;
//!   genomes compile to layer graphs.
//! - [`profile`]: per-hardware constraint profiles and membership checks.
//! - [`latency`]: linear per-hardware latency cost models fitted from
//!   (architecture, latency) samples.
//! - [`metrics`]: normalized average/max latency across hardware and the
//!   reward functions built on them.
//! - [`search`]: random, evolutionary, policy-gradient and exhaustive
//!   optimizers over pluggable accuracy oracles ([`oracle`]).
//! - [`report`]: Pareto fronts, comparison tables, tradeoff CSVs.
//!
//! Batch evaluation is data-parallel via rayon behind the `parallel` feature
//! (on by default); disabling it yields a fully sequential build with
//! identical outputs.

pub mod baseline;
pub mod error;
pub mod fixtures;
pub mod genome;
pub mod graph;
pub mod latency;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod profile;
pub mod report;
pub mod search;
pub mod space;

pub use error::{Error, Result};
