//! Constant-order policy evaluation.
//!
//! Under a constant order `q`, on-hand inventory follows the one-dimensional
//! chain `I_{t+1} = (I_t + s(q, Z_t) - D_t)^+`, which has a limiting
//! distribution exactly when `E[s(q, Z)] < E[D]`. The evaluators here:
//!
//! - classify that stability condition ([`check_stability`]);
//! - estimate the pseudo-cost `h E[I_inf] - b E[s(q, Z)]` by simulation with
//!   burn-in and batch-means standard errors ([`estimate_pseudo_cost`]);
//! - estimate the true long-run average cost, which adds the `q`-independent
//!   term `b E[D]` ([`long_run_average_cost`]);
//! - solve small discrete instances exactly through the stationary balance
//!   equations ([`exact_stationary_chain`]), the oracle route used to
//!   validate the simulation route;
//! - grid-search the optimal constant order with common random numbers
//!   ([`optimal_constant_order`]).
//!
//! These functions are benchmark-side: they may query the true
//! distributions. Learner-side code (see [`crate::learner`]) only ever holds
//! a [`crate::supply::SupplyFunction`] and censored observations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::dist::{DemandModel, Distribution};
use crate::math;
use crate::rng::{derive_seed, SeededRng};
use crate::stats;
use crate::supply::SupplyModel;
use crate::{Error, Result};

/// Draws used for Monte-Carlo expectations inside stability checks when a
/// closed form is unavailable.
const STABILITY_DRAWS: u64 = 100_000;

/// Batches used for batch-means standard errors.
const SE_BATCHES: usize = 32;

/// Stability classification of a constant order quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// `E[s(q,Z)] < E[D] - tolerance`: the chain has a limiting distribution.
    Stable,
    /// Within `tolerance` of the boundary either way.
    Marginal,
    /// `E[s(q,Z)] > E[D] + tolerance`: on-hand inventory drifts to infinity.
    Unstable,
}

/// Default burn-in: `ceil(10 * max(ln(reference), 2L))`, mirroring the
/// coupling window that governs how fast the chain forgets its start.
pub fn default_burn_in(reference_horizon: u64, lead_time: usize) -> u64 {
    let ln_t = math::ln(reference_horizon.max(2) as f64);
    math::ceil(10.0 * ln_t.max(2.0 * lead_time as f64)) as u64
}

/// Classifies `q` against the stability condition. Expectations are exact
/// for discrete models and Monte Carlo otherwise.
pub fn check_stability(
    q: f64,
    supply: &SupplyModel,
    demand: &DemandModel,
    tolerance: f64,
    rng: &mut SeededRng,
) -> Result<Stability> {
    if !(q >= 0.0) {
        return Err(Error::NegativeQuantity(q));
    }
    let es = supply.mean_supply(q, STABILITY_DRAWS, rng)?;
    let ed = demand.mean(STABILITY_DRAWS, rng);
    Ok(if es < ed - tolerance {
        Stability::Stable
    } else if es > ed + tolerance {
        Stability::Unstable
    } else {
        Stability::Marginal
    })
}

/// A simulated pseudo-cost estimate for one order quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoCostEstimate {
    pub q: f64,
    /// Estimate of `h E[I_inf] - b E[s(q, Z)]`.
    pub estimate: f64,
    /// Batch-means standard error of the estimate.
    pub std_error: f64,
    pub burn_in: u64,
    pub eval_periods: u64,
}

fn require_stable(
    q: f64,
    supply: &SupplyModel,
    demand: &DemandModel,
    rng: &mut SeededRng,
) -> Result<()> {
    match check_stability(q, supply, demand, 0.0, rng)? {
        Stability::Stable => Ok(()),
        _ => Err(Error::UnstableOrder { q }),
    }
}

/// Simulates the one-dimensional chain from `I = 0`, discards `burn_in`
/// periods, and averages `h I_t - b s(q, Z_t)` over `eval_periods` (with
/// `I_t` the start-of-period on-hand). Rejects unstable `q`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_pseudo_cost(
    q: f64,
    holding: f64,
    penalty: f64,
    supply: &SupplyModel,
    demand: &DemandModel,
    burn_in: u64,
    eval_periods: u64,
    rng: &mut SeededRng,
) -> Result<PseudoCostEstimate> {
    if burn_in < 1 || eval_periods < 1 {
        return Err(Error::InvalidArgument(
            "burn_in and eval_periods must be >= 1".into(),
        ));
    }
    require_stable(q, supply, demand, rng)?;

    let mut on_hand = 0.0;
    let mut values = Vec::with_capacity(eval_periods as usize);
    for t in 1..=(burn_in + eval_periods) {
        let z = supply.sample_z(rng);
        let s = supply.realize(q, z)?;
        let d = demand.sample(rng);
        if t > burn_in {
            values.push(holding * on_hand - penalty * s);
        }
        on_hand = math::pos(on_hand + s - d);
    }
    Ok(PseudoCostEstimate {
        q,
        estimate: stats::mean(&values),
        std_error: stats::batch_means_se(&values, SE_BATCHES),
        burn_in,
        eval_periods,
    })
}

/// Long-run average cost estimate: pseudo-cost plus `b E[D]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageCostEstimate {
    pub q: f64,
    pub estimate: f64,
    /// Standard error inherited from the simulated pseudo-cost term; the
    /// `E[D]` term is exact for closed-form demands and uses `mean_draws`
    /// Monte-Carlo draws otherwise.
    pub std_error: f64,
    pub pseudo_cost: f64,
}

/// `C_inf(q) = h E[I_inf] + b E[D] - b E[s(q, Z)]`. Benchmark-side: the
/// demand mean is oracle knowledge.
#[allow(clippy::too_many_arguments)]
pub fn long_run_average_cost(
    q: f64,
    holding: f64,
    penalty: f64,
    supply: &SupplyModel,
    demand: &DemandModel,
    burn_in: u64,
    eval_periods: u64,
    mean_draws: u64,
    rng: &mut SeededRng,
) -> Result<AverageCostEstimate> {
    let pseudo = estimate_pseudo_cost(
        q,
        holding,
        penalty,
        supply,
        demand,
        burn_in,
        eval_periods,
        rng,
    )?;
    let ed = demand.mean(mean_draws, rng);
    Ok(AverageCostEstimate {
        q,
        estimate: pseudo.estimate + penalty * ed,
        std_error: pseudo.std_error,
        pseudo_cost: pseudo.estimate,
    })
}

/// One grid point of a benchmark search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub q: f64,
    pub cost_mean: f64,
    pub cost_se: f64,
    pub pseudo_cost: f64,
    pub stable: bool,
}

/// Result of [`optimal_constant_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub q_star: f64,
    /// Long-run average cost estimate at `q_star`.
    pub cost: AverageCostEstimate,
    pub rows: Vec<BenchRow>,
}

/// Argmin of the long-run average cost over `grid`, evaluated with common
/// random numbers (every candidate consumes the identical shock/demand
/// stream derived from `crn_seed`). Ties break toward the smaller `q`.
/// All candidates must be stable.
#[allow(clippy::too_many_arguments)]
pub fn optimal_constant_order(
    grid: &[f64],
    holding: f64,
    penalty: f64,
    supply: &SupplyModel,
    demand: &DemandModel,
    burn_in: u64,
    eval_periods: u64,
    crn_seed: u64,
) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let ed = demand.mean(
        1_000_000,
        &mut SeededRng::new(derive_seed(crn_seed, 0x4d45_414e, 0)),
    );
    let mut rows = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, AverageCostEstimate)> = None;
    for &q in grid {
        let mut rng = SeededRng::new(derive_seed(crn_seed, 0x0043_524e, 0));
        let pseudo =
            estimate_pseudo_cost(q, holding, penalty, supply, demand, burn_in, eval_periods, &mut rng)?;
        let est = AverageCostEstimate {
            q,
            estimate: pseudo.estimate + penalty * ed,
            std_error: pseudo.std_error,
            pseudo_cost: pseudo.estimate,
        };
        rows.push(BenchRow {
            q,
            cost_mean: est.estimate,
            cost_se: est.std_error,
            pseudo_cost: est.pseudo_cost,
            stable: true,
        });
        let better = match &best {
            None => true,
            Some((_, cur)) => est.estimate < cur.estimate,
        };
        if better {
            best = Some((q, est));
        }
    }
    let (q_star, cost) = best.expect("non-empty grid");
    Ok(GridSearch { q_star, cost, rows })
}

/// Exact stationary analysis of a discrete instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactChain {
    pub q: f64,
    pub mean_on_hand: f64,
    pub pseudo_cost: f64,
    pub average_cost: f64,
    /// Number of on-hand states in the truncated chain.
    pub states: usize,
}

/// Solves the stationary balance equations of the on-hand chain for a
/// discrete shock and demand instance. The reachable state set is enumerated
/// from `I = 0` (values quantized at 1e-9) and truncated at `bound`, with
/// overflowing transitions lumped into the boundary state; stationary tails
/// are geometric under stability, so the truncation error is negligible for
/// bounds well past the drift scale.
pub fn exact_stationary_chain(
    q: f64,
    holding: f64,
    penalty: f64,
    supply: &SupplyModel,
    demand: &DemandModel,
    bound: f64,
) -> Result<ExactChain> {
    let z_atoms = match supply.z_distribution() {
        Distribution::Discrete { atoms } => atoms.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "exact chain requires a discrete shock distribution".into(),
            ))
        }
    };
    let d_atoms = match demand.distribution() {
        Distribution::Discrete { atoms } => atoms.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "exact chain requires a discrete demand distribution".into(),
            ))
        }
    };
    let es: f64 = z_atoms
        .iter()
        .map(|&(z, p)| Ok(p * supply.realize(q, z)?))
        .sum::<Result<f64>>()?;
    let ed: f64 = d_atoms.iter().map(|&(d, p)| p * d).sum();
    if !(es < ed) {
        return Err(Error::UnstableOrder { q });
    }

    // Pair outcomes (s - d, probability).
    let mut outcomes = Vec::new();
    for &(z, pz) in &z_atoms {
        let s = supply.realize(q, z)?;
        for &(d, pd) in &d_atoms {
            outcomes.push((s - d, pz * pd));
        }
    }

    const QUANTUM: f64 = 1e-9;
    let key = |x: f64| -> i64 { math::round(x / QUANTUM) as i64 };

    // Breadth-first closure of reachable on-hand values from 0, capped at
    // `bound` (overflow lumps into the running maximum reachable state).
    let mut index: BTreeMap<i64, usize> = BTreeMap::new();
    let mut values: Vec<f64> = Vec::new();
    let mut frontier: Vec<f64> = Vec::new();
    let push = |v: f64,
                index: &mut BTreeMap<i64, usize>,
                values: &mut Vec<f64>,
                frontier: &mut Vec<f64>| {
        if index.get(&key(v)).is_none() {
            index.insert(key(v), values.len());
            values.push(v);
            frontier.push(v);
        }
    };
    push(0.0, &mut index, &mut values, &mut frontier);
    while let Some(v) = frontier.pop() {
        for &(jump, _) in &outcomes {
            let nxt = math::pos(v + jump).min(bound);
            push(nxt, &mut index, &mut values, &mut frontier);
        }
        if values.len() > 100_000 {
            return Err(Error::InvalidArgument(format!(
                "state enumeration exceeded 100000 states below bound {bound}"
            )));
        }
    }

    let n = values.len();
    // Dense transition matrix, row i = from state i.
    let mut p = alloc::vec![0.0f64; n * n];
    for (i, &v) in values.iter().enumerate() {
        for &(jump, prob) in &outcomes {
            let nxt = math::pos(v + jump).min(bound);
            let j = *index.get(&key(nxt)).expect("closed under transitions");
            p[i * n + j] += prob;
        }
    }

    // Solve pi^T P = pi^T, sum(pi) = 1: rows of A are (P^T - I), the last
    // replaced by the normalization.
    let mut a = alloc::vec![0.0f64; n * n];
    let mut rhs = alloc::vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = p[j * n + i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1) * n + j] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let pi = solve_dense(&mut a, &mut rhs, n)?;

    let mean_on_hand: f64 = pi.iter().zip(&values).map(|(&w, &v)| w * v).sum();
    let pseudo = holding * mean_on_hand - penalty * es;
    Ok(ExactChain {
        q,
        mean_on_hand,
        pseudo_cost: pseudo,
        average_cost: pseudo + penalty * ed,
        states: n,
    })
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
fn solve_dense(a: &mut [f64], rhs: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = math::abs(a[col * n + col]);
        for row in (col + 1)..n {
            let mag = math::abs(a[row * n + col]);
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(Error::InvalidArgument(
                "singular balance-equation system".into(),
            ));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            rhs.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = alloc::vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in (row + 1)..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Finds `q_bar` such that `E[s(q_bar, Z)] = (1 - margin) E[D]` by bisecting
/// the monotone map `q -> E[s(q, Z)]` evaluated on a frozen shock sample.
/// Errors if the supply saturates below the target (set `q_bar` explicitly
/// in that case).
pub fn q_bar_auto(
    supply: &SupplyModel,
    demand: &DemandModel,
    margin: f64,
    seed: u64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::InvalidArgument("margin must be in [0, 1)".into()));
    }
    let ed = demand.mean(1_000_000, &mut SeededRng::new(derive_seed(seed, 0x5142, 0)));
    let target = (1.0 - margin) * ed;

    // Frozen draws keep q -> E-hat[s(q, Z)] deterministic and monotone.
    let zs: Vec<f64> = match supply.z_distribution() {
        Distribution::Discrete { atoms } => atoms.iter().map(|&(v, _)| v).collect(),
        dist => {
            let mut rng = SeededRng::new(derive_seed(seed, 0x5143, 0));
            (0..100_000).map(|_| dist.sample(&mut rng)).collect()
        }
    };
    let weights: Vec<f64> = match supply.z_distribution() {
        Distribution::Discrete { atoms } => atoms.iter().map(|&(_, p)| p).collect(),
        _ => alloc::vec![1.0 / zs.len() as f64; zs.len()],
    };
    let es = |q: f64| -> f64 {
        zs.iter()
            .zip(&weights)
            .map(|(&z, &w)| {
                w * supply
                    .function()
                    .realize(q, z)
                    .expect("non-negative order")
            })
            .sum()
    };

    let mut hi = 1.0;
    let mut grow = 0;
    while es(hi) < target {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::InvalidArgument(
                "supply saturates below the stability target; set q_bar explicitly".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if es(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supply::Formulation;
    use alloc::vec;

    fn point(v: f64) -> Distribution {
        Distribution::Discrete {
            atoms: vec![(v, 1.0)],
        }
    }

    fn capacity(z: Distribution) -> SupplyModel {
        SupplyModel::new(Formulation::Capacity, z).unwrap()
    }

    #[test]
    fn zero_order_is_always_stable() {
        let supply = capacity(point(5.0));
        let demand = DemandModel::new(point(3.0)).unwrap();
        let s = check_stability(0.0, &supply, &demand, 1e-9, &mut SeededRng::new(0)).unwrap();
        assert_eq!(s, Stability::Stable);
    }

    #[test]
    fn oversupply_is_unstable() {
        let supply = capacity(point(5.0));
        let demand = DemandModel::new(point(3.0)).unwrap();
        let s = check_stability(10.0, &supply, &demand, 1e-9, &mut SeededRng::new(0)).unwrap();
        assert_eq!(s, Stability::Unstable);
    }

    #[test]
    fn marginal_band_is_detected() {
        let supply = capacity(point(3.0));
        let demand = DemandModel::new(point(3.0)).unwrap();
        let s = check_stability(10.0, &supply, &demand, 1e-6, &mut SeededRng::new(0)).unwrap();
        assert_eq!(s, Stability::Marginal);
    }

    #[test]
    fn auto_q_bar_is_stable_with_margin() {
        // The random-capacity base configuration: Z ~ U[5,15], E[D] = 10.
        let supply = SupplyModel::new(
            Formulation::Capacity,
            Distribution::Uniform { lo: 5.0, hi: 15.0 },
        )
        .unwrap();
        let demand =
            DemandModel::new(Distribution::TruncatedNormal { mean: 10.0, sd: 2.0 }).unwrap();
        let q_bar = q_bar_auto(&supply, &demand, 0.05, 7).unwrap();
        // E[min(q, U[5,15])] = (30q - q^2 - 25)/20 = 9.5 at q ~ 11.838.
        assert!((q_bar - 11.8377).abs() < 0.05, "q_bar = {q_bar}");
        let s = check_stability(q_bar, &supply, &demand, 0.0, &mut SeededRng::new(1)).unwrap();
        assert_eq!(s, Stability::Stable);
    }

    #[test]
    fn deterministic_drain_gives_minus_b_supply() {
        // d = 10, s(q, z) = 4: inventory never accumulates, pseudo-cost -4b.
        let supply = capacity(point(4.0));
        let demand = DemandModel::new(point(10.0)).unwrap();
        let est = estimate_pseudo_cost(
            4.0,
            1.0,
            3.0,
            &supply,
            &demand,
            10,
            1000,
            &mut SeededRng::new(0),
        )
        .unwrap();
        assert_eq!(est.estimate, -12.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn zero_order_pseudo_cost_is_exactly_zero() {
        let supply = capacity(Distribution::Uniform { lo: 5.0, hi: 15.0 });
        let demand = DemandModel::new(Distribution::Uniform { lo: 5.0, hi: 15.0 }).unwrap();
        let est = estimate_pseudo_cost(
            0.0,
            5.0,
            15.0,
            &supply,
            &demand,
            10,
            500,
            &mut SeededRng::new(0),
        )
        .unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn unstable_order_is_rejected_by_the_estimator() {
        let supply = capacity(point(5.0));
        let demand = DemandModel::new(point(3.0)).unwrap();
        let err = estimate_pseudo_cost(
            10.0,
            1.0,
            1.0,
            &supply,
            &demand,
            10,
            100,
            &mut SeededRng::new(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnstableOrder { .. }));
    }

    #[test]
    fn deterministic_long_run_average() {
        // d = 10, s = 4, h = 1, b = 2: C = 0 + 2*10 - 2*4 = 12 exactly.
        let supply = capacity(point(4.0));
        let demand = DemandModel::new(point(10.0)).unwrap();
        let est = long_run_average_cost(
            4.0,
            1.0,
            2.0,
            &supply,
            &demand,
            10,
            1000,
            1,
            &mut SeededRng::new(0),
        )
        .unwrap();
        assert_eq!(est.estimate, 12.0);
    }

    /// Birth-death oracle: demand {0: 0.4, 2: 0.6}, capacity z = 1, q = 1.
    /// The chain moves +1 w.p. 0.4 and -1 w.p. 0.6 (reflected at 0), so the
    /// stationary law is geometric with ratio 2/3 and E[I] = 2 in closed
    /// form. The balance-equation solver must reproduce it, and the
    /// simulation must agree within 3 standard errors.
    #[test]
    fn balance_equations_match_the_geometric_chain() {
        let supply = capacity(point(1.0));
        let demand = DemandModel::new(Distribution::Discrete {
            atoms: vec![(0.0, 0.4), (2.0, 0.6)],
        })
        .unwrap();
        let exact = exact_stationary_chain(1.0, 1.0, 1.0, &supply, &demand, 200.0).unwrap();
        assert!(
            (exact.mean_on_hand - 2.0).abs() < 1e-9,
            "E[I] = {}",
            exact.mean_on_hand
        );
        assert!((exact.pseudo_cost - 1.0).abs() < 1e-9);
        assert!((exact.average_cost - 2.2).abs() < 1e-9);

        let sim = estimate_pseudo_cost(
            1.0,
            1.0,
            1.0,
            &supply,
            &demand,
            1000,
            100_000,
            &mut SeededRng::new(42),
        )
        .unwrap();
        let gap = (sim.estimate - exact.pseudo_cost).abs();
        assert!(
            gap <= 3.0 * sim.std_error,
            "gap {gap} vs 3se {}",
            3.0 * sim.std_error
        );
    }

    /// Identity of the two cost routes: C - C_hat = b E[D], checked with
    /// independent streams so the comparison is statistical, not algebraic.
    #[test]
    fn pseudo_cost_identity_on_a_stable_config() {
        let supply = capacity(Distribution::Uniform { lo: 5.0, hi: 15.0 });
        let demand = DemandModel::new(Distribution::Uniform { lo: 8.0, hi: 16.0 }).unwrap();
        let (h, b, q) = (2.0, 7.0, 10.0);
        let pseudo = estimate_pseudo_cost(
            q,
            h,
            b,
            &supply,
            &demand,
            500,
            100_000,
            &mut SeededRng::new(101),
        )
        .unwrap();
        let avg = long_run_average_cost(
            q,
            h,
            b,
            &supply,
            &demand,
            500,
            100_000,
            1,
            &mut SeededRng::new(202),
        )
        .unwrap();
        let ed = 12.0;
        let gap = (avg.estimate - pseudo.estimate - b * ed).abs();
        let combined = math::sqrt(
            avg.std_error * avg.std_error + pseudo.std_error * pseudo.std_error,
        );
        assert!(gap <= 3.0 * combined, "gap {gap}, combined se {combined}");
    }

    #[test]
    fn zero_holding_picks_the_largest_candidate() {
        // Yield supply has strictly increasing E[s(q, Z)], so with h = 0 the
        // cost is strictly decreasing in q.
        let supply = SupplyModel::new(
            Formulation::Yield,
            Distribution::Uniform { lo: 0.0, hi: 1.0 },
        )
        .unwrap();
        let demand = DemandModel::new(point(10.0)).unwrap();
        let grid = vec![0.0, 4.0, 8.0, 12.0];
        let gs = optimal_constant_order(&grid, 0.0, 5.0, &supply, &demand, 100, 20_000, 9).unwrap();
        assert_eq!(gs.q_star, 12.0);
    }

    #[test]
    fn zero_penalty_picks_zero_order() {
        // With b = 0 any supply only adds holding cost; demand must still
        // have a positive mean, so use a small one.
        let supply = SupplyModel::new(
            Formulation::Yield,
            Distribution::Uniform { lo: 0.0, hi: 1.0 },
        )
        .unwrap();
        let demand = DemandModel::new(point(0.1)).unwrap();
        let grid = vec![0.0, 0.05, 0.1];
        let gs = optimal_constant_order(&grid, 5.0, 0.0, &supply, &demand, 100, 20_000, 3).unwrap();
        assert_eq!(gs.q_star, 0.0);
    }

    /// Grid argmin agrees with the exact stationary route on the discrete
    /// instance (q* = 0.5; exact costs 1.2 / 1.0597 / 2.2).
    #[test]
    fn grid_search_matches_exact_chain_argmin() {
        let supply = capacity(point(1.0));
        let demand = DemandModel::new(Distribution::Discrete {
            atoms: vec![(0.0, 0.4), (2.0, 0.6)],
        })
        .unwrap();
        let grid = vec![0.0, 0.5, 1.0];

        let mut exact_best = (f64::INFINITY, f64::NAN);
        for &q in &grid {
            let avg = if q == 0.0 {
                1.2
            } else {
                exact_stationary_chain(q, 1.0, 1.0, &supply, &demand, 300.0)
                    .unwrap()
                    .average_cost
            };
            if avg < exact_best.0 {
                exact_best = (avg, q);
            }
        }
        assert_eq!(exact_best.1, 0.5);

        let gs = optimal_constant_order(&grid, 1.0, 1.0, &supply, &demand, 1000, 100_000, 11)
            .unwrap();
        assert_eq!(gs.q_star, 0.5);
    }

    #[test]
    fn grid_search_is_deterministic_and_rejects_empty_grids() {
        let supply = capacity(Distribution::Uniform { lo: 5.0, hi: 15.0 });
        let demand = DemandModel::new(Distribution::Uniform { lo: 8.0, hi: 16.0 }).unwrap();
        let grid = vec![0.0, 3.0, 6.0, 9.0];
        let a = optimal_constant_order(&grid, 2.0, 7.0, &supply, &demand, 100, 10_000, 5).unwrap();
        let b = optimal_constant_order(&grid, 2.0, 7.0, &supply, &demand, 100, 10_000, 5).unwrap();
        assert_eq!(a.q_star, b.q_star);
        assert_eq!(a.cost.estimate.to_bits(), b.cost.estimate.to_bits());
        assert!(matches!(
            optimal_constant_order(&[], 1.0, 1.0, &supply, &demand, 10, 10, 0),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn default_burn_in_tracks_lead_time_and_horizon() {
        assert_eq!(default_burn_in(1000, 10), 200); // 10 * max(6.9, 20)
        assert_eq!(default_burn_in(1000, 1), 70); // ceil(10 * 6.907) = 70
    }
}
