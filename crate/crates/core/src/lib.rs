//! Single-loop proximal-conditional-gradient penalty method for
//!
//! ```text
//!     minimize  f1(x) + f2(x) + g1(y) + g2(y)   subject to  A x + B y = c
//! ```
//!
//! where `f1`, `g1` have Hölder-continuous gradients, `f2` has a cheap
//! proximal mapping and `g2` has a cheap linear minimization oracle.
//!
//! Module map:
//!
//! - [`linmap`]: linear operators, adjoints, `λ_max(AᵀA)` by power iteration.
//! - [`blocks`]: smooth / prox / linear-oracle building blocks and [`blocks::ProblemSpec`].
//! - [`solver`]: the iteration itself, schedules, termination and traces.
//! - [`bounds`]: complexity certificates `τ_t`, `G_t` and the δ-selection rule.
//! - [`duality`]: Fenchel dual of the ℓ1 / ℓp-residual compressed-sensing problem.
//! - [`csgen`]: seeded compressed-sensing instances and their reformulation.
//! - [`harness`]: brute-force oracles, sweeps, statistics and the acceptance checks.

pub mod blocks;
pub mod bounds;
pub mod csgen;
pub mod duality;
pub mod error;
pub mod harness;
pub mod linmap;
pub mod solver;
pub mod vecops;

pub use error::{Error, Result};
