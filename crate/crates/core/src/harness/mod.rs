//! Experiment harness: reference oracles, sweeps, statistics and the
//! acceptance checks.

pub mod oracle;
pub mod stats;
pub mod sweep;
pub mod acceptance;
