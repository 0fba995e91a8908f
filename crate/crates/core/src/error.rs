//! Library error type.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by the simulation and algorithm layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A distribution or model was constructed with invalid parameters.
    InvalidModel(String),
    /// A negative order quantity was supplied where `q >= 0` is required.
    NegativeQuantity(f64),
    /// `downshift` was called with `q_prime > q`.
    DownshiftAboveObserved { q: f64, q_prime: f64 },
    /// The observed supply is outside the feasible image of `realize(q, .)`.
    ObservedOutOfRange { q: f64, observed: f64 },
    /// The shock `z` cannot be recovered from `(q, observed)` (e.g. `q = 0`).
    ShockUnrecoverable,
    /// A policy emitted a negative or non-finite order.
    PolicyFault { period: u64, order: f64 },
    /// The order quantity violates the stability condition E[s(q,Z)] < E[D].
    UnstableOrder { q: f64 },
    /// An empty candidate grid was passed to a grid search.
    EmptyGrid,
    /// Invalid argument outside the model-construction path.
    InvalidArgument(String),
    /// The DP state-action space exceeds the configured budget.
    BudgetExceeded { size: u64, budget: u64 },
    /// A benchmark cost of zero (or below) cannot normalize a regret ratio.
    ZeroBenchmarkCost,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::NegativeQuantity(q) => write!(f, "negative quantity: {q}"),
            Error::DownshiftAboveObserved { q, q_prime } => {
                write!(f, "downshift target {q_prime} exceeds implemented order {q}")
            }
            Error::ObservedOutOfRange { q, observed } => {
                write!(f, "observed supply {observed} infeasible for order {q}")
            }
            Error::ShockUnrecoverable => write!(f, "supply shock not recoverable from q = 0"),
            Error::PolicyFault { period, order } => {
                write!(f, "policy emitted invalid order {order} at period {period}")
            }
            Error::UnstableOrder { q } => {
                write!(f, "order quantity {q} violates E[s(q,Z)] < E[D]")
            }
            Error::EmptyGrid => write!(f, "empty candidate grid"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::BudgetExceeded { size, budget } => {
                write!(f, "state-action space of size {size} exceeds budget {budget}")
            }
            Error::ZeroBenchmarkCost => write!(f, "benchmark cost must be strictly positive"),
        }
    }
}

impl core::error::Error for Error {}
