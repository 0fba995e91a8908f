//! Demand and supply-shock distributions.
//!
//! Three kinds are supported: uniform on `[lo, hi]`, normal truncated below
//! at 0 (sampled by rejection, clamped above at `mean + 6*sd` so the support
//! stays bounded), and finite discrete. All mass must lie on the non-negative
//! axis. Means are exact where a closed form exists under the sampling scheme
//! (uniform, discrete) and Monte Carlo otherwise.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// How many standard deviations above the mean the truncated normal is
/// clamped; keeps demand bounded with negligible mass affected.
pub const TRUNC_NORMAL_CLAMP_SDS: f64 = 6.0;

/// A non-negative, bounded-support distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Normal(mean, sd) conditioned on `>= 0`, clamped at `mean + 6*sd`.
    TruncatedNormal { mean: f64, sd: f64 },
    /// Finite support; `atoms` are `(value, probability)` pairs.
    Discrete { atoms: Vec<(f64, f64)> },
}

impl Distribution {
    /// Validates parameters; every constructor path funnels through here.
    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || *lo < 0.0 || lo >= hi {
                    return Err(Error::InvalidModel(format!(
                        "uniform requires 0 <= lo < hi, got lo={lo}, hi={hi}"
                    )));
                }
            }
            Distribution::TruncatedNormal { mean, sd } => {
                if !mean.is_finite() || !sd.is_finite() || *mean < 0.0 || *sd <= 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "truncated normal requires mean >= 0 and sd > 0, got mean={mean}, sd={sd}"
                    )));
                }
            }
            Distribution::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidModel("discrete support is empty".into()));
                }
                let mut total = 0.0;
                for &(v, p) in atoms {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::InvalidModel(format!(
                            "discrete support value {v} outside [0, inf)"
                        )));
                    }
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::InvalidModel(format!("negative probability {p}")));
                    }
                    total += p;
                }
                if math::abs(total - 1.0) > 1e-9 {
                    return Err(Error::InvalidModel(format!(
                        "discrete probabilities sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(lower, upper)` bounds of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Uniform { lo, hi } => (*lo, *hi),
            Distribution::TruncatedNormal { mean, sd } => {
                (0.0, mean + TRUNC_NORMAL_CLAMP_SDS * sd)
            }
            Distribution::Discrete { atoms } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &(v, _) in atoms {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (lo, hi)
            }
        }
    }

    /// One draw. Always lands inside [`Self::support`].
    pub fn sample(&self, rng: &mut SeededRng) -> f64 {
        match self {
            Distribution::Uniform { lo, hi } => lo + rng.next_f64() * (hi - lo),
            Distribution::TruncatedNormal { mean, sd } => {
                let clamp = mean + TRUNC_NORMAL_CLAMP_SDS * sd;
                loop {
                    let x = mean + sd * standard_normal(rng);
                    if x >= 0.0 {
                        return x.min(clamp);
                    }
                }
            }
            Distribution::Discrete { atoms } => {
                let u = rng.next_f64();
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                // Rounding in the cumulative sum; the tail atom absorbs it.
                atoms[atoms.len() - 1].0
            }
        }
    }

    /// `P(X <= x)` under the sampling scheme (the truncated normal accounts
    /// for the rejection below 0 and the clamp at `mean + 6 sd`).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Uniform { lo, hi } => {
                if x < *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else {
                    (x - lo) / (hi - lo)
                }
            }
            Distribution::TruncatedNormal { mean, sd } => {
                let clamp = mean + TRUNC_NORMAL_CLAMP_SDS * sd;
                if x < 0.0 {
                    return 0.0;
                }
                if x >= clamp {
                    return 1.0;
                }
                let phi = |v: f64| 0.5 * (1.0 + math::erf((v - mean) / (sd * core::f64::consts::SQRT_2)));
                let below_zero = phi(0.0);
                (phi(x) - below_zero) / (1.0 - below_zero)
            }
            Distribution::Discrete { atoms } => atoms
                .iter()
                .filter(|&&(v, _)| v <= x)
                .map(|&(_, p)| p)
                .sum(),
        }
    }

    /// Closed-form mean, when one exists under the sampling scheme.
    pub fn exact_mean(&self) -> Option<f64> {
        match self {
            Distribution::Uniform { lo, hi } => Some(0.5 * (lo + hi)),
            Distribution::TruncatedNormal { .. } => None,
            Distribution::Discrete { atoms } => {
                Some(atoms.iter().map(|&(v, p)| v * p).sum())
            }
        }
    }

    /// Exact mean where available, Monte Carlo over `n_draws` otherwise.
    pub fn mean(&self, n_draws: u64, rng: &mut SeededRng) -> f64 {
        if let Some(m) = self.exact_mean() {
            return m;
        }
        let n = n_draws.max(1);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += self.sample(rng);
        }
        sum / n as f64
    }
}

/// Standard normal draw via Box-Muller (cosine branch, two uniforms per
/// draw). Fixed mapping from the underlying stream.
fn standard_normal(rng: &mut SeededRng) -> f64 {
    let u1 = 1.0 - rng.next_f64(); // (0, 1], keeps ln finite
    let u2 = rng.next_f64();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// A validated demand distribution: mass on `[0, d_bar]`, strictly positive
/// mean.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    dist: Distribution,
}

impl DemandModel {
    pub fn new(dist: Distribution) -> Result<Self> {
        dist.validate()?;
        let (_, hi) = dist.support();
        if !(hi > 0.0) || !hi.is_finite() {
            return Err(Error::InvalidModel(format!(
                "demand upper bound must be finite and positive, got {hi}"
            )));
        }
        if let Some(m) = dist.exact_mean() {
            if !(m > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "demand mean must be strictly positive, got {m}"
                )));
            }
        }
        // Truncated normal with mean >= 0 and sd > 0 always has positive mean.
        Ok(Self { dist })
    }

    /// Upper bound of the demand support.
    pub fn d_bar(&self) -> f64 {
        self.dist.support().1
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    /// One demand draw in `[0, d_bar]`.
    pub fn sample(&self, rng: &mut SeededRng) -> f64 {
        self.dist.sample(rng)
    }

    /// E[D]: exact for uniform/discrete, Monte Carlo for truncated normal.
    pub fn mean(&self, n_draws: u64, rng: &mut SeededRng) -> f64 {
        self.dist.mean(n_draws, rng)
    }
}
