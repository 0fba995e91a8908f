//! Configuration, command execution, CSV contracts, and the experiment
//! harness behind the `lostsales` binary.
// Validations deliberately use `!(x > 0.0)`-style negations so that NaN
// fails them; the suggested `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csvio;
pub mod harness;
pub mod plotgen;
