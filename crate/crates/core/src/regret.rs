//! Regret metrics for comparing a learning policy against the optimal
//! constant-order benchmark.

use crate::{Error, Result};

/// Relative average regret in percent:
/// `(learner - benchmark) / benchmark * 100`. Signed; may be negative by
/// noise. The benchmark cost must be strictly positive.
pub fn relative_regret_pct(learner_cost: f64, benchmark_cost: f64) -> Result<f64> {
    if !(benchmark_cost > 0.0) {
        return Err(Error::ZeroBenchmarkCost);
    }
    Ok((learner_cost - benchmark_cost) / benchmark_cost * 100.0)
}

/// Absolute regret over `t` periods against the benchmark's long-run average
/// cost: `learner_cost - t * long_run_average`. Zero at `t = 0`.
pub fn absolute_regret(learner_cost: f64, t: u64, long_run_average: f64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    learner_cost - t as f64 * long_run_average
}
