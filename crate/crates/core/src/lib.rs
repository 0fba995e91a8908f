//! Periodic-review lost-sales inventory systems with positive lead time and
//! uncertain supply.
//!
//! The crate provides, in dependency order:
//!
//! - [`rng`]: a seeded, platform-stable random stream (ChaCha8).
//! - [`dist`]: demand / supply-shock distributions.
//! - [`supply`]: the four random supply functions and the downshift operator
//!   that recovers `s(q', Z)` from an observed `s(q, Z)` for any `q' <= q`.
//! - [`inventory`]: exact system dynamics, per-period costs, and the censored
//!   observation channel consumed by ordering policies.
//! - [`eval`]: constant-order policy evaluation — stability checks,
//!   pseudo-cost and long-run average cost estimation, an exact
//!   stationary-chain solver for discrete instances, and grid search.
//! - [`learner`]: epoch-based active elimination over an order grid, driven
//!   only by censored observations.
//! - [`dp`]: a finite-horizon dynamic program on a discretized state space,
//!   for small lead times.
//! - [`stats`], [`regret`]: estimation and regret metrics used by the
//!   experiment harness.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (default) only widens error-trait integration. All floating-point
//! transcendentals are routed through `libm` so that results are bit-identical
//! across platforms regardless of the feature set.

#![cfg_attr(not(feature = "std"), no_std)]
// Validations deliberately use `!(x > 0.0)`-style negations so that NaN
// fails them; the suggested `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dist;
pub mod dp;
pub mod error;
pub mod eval;
pub mod inventory;
pub mod learner;
pub(crate) mod math;
pub mod regret;
pub mod rng;
pub mod stats;
pub mod supply;

pub use error::Error;
pub use rng::SeededRng;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
