//! Finite-horizon dynamic program on a discretized state space.
//!
//! The state is `(I, x_1, ..., x_L)` with on-hand on a `delta` grid and
//! pipeline entries on the action grid (orders are placed on the grid, so
//! they stay there). Backward induction exploits the structure of the
//! transition: the order only enters the next state's last pipeline slot, so
//! for each arriving-order level the expectation over `(Z, D)` is one matrix
//! product, and the action minimization happens on the result.
//!
//! Feasible for small lead times only; the state-action count is checked
//! against an explicit budget and the solver refuses otherwise.

use alloc::vec;
use alloc::vec::Vec;

use crate::dist::{DemandModel, Distribution};
use crate::math;
use crate::supply::{SupplyFunction, SupplyModel};
use crate::{Error, Result};

/// A fully discretized instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInstance {
    /// Grid step for on-hand inventory and actions.
    pub delta: f64,
    /// On-hand levels are `0..=on_hand_max` times `delta`.
    pub on_hand_max: usize,
    /// Action levels are `0..=action_max` times `delta` (up to `q_bar`).
    pub action_max: usize,
    /// `(value, probability)` demand atoms.
    pub demand_pmf: Vec<(f64, f64)>,
    /// `(value, probability)` supply-shock atoms.
    pub shock_pmf: Vec<(f64, f64)>,
    pub supply: SupplyFunction,
    pub lead_time: usize,
    pub horizon: u64,
    pub holding: f64,
    pub penalty: f64,
}

/// Per arriving-order level: expected one-period costs and on-hand
/// transition rows.
type TransitionTables = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// State-space bounds used by [`discretize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpBounds {
    /// Cap for the on-hand grid; the conventional default is `4 * E[D]`.
    pub on_hand_cap: f64,
    /// Largest order quantity considered.
    pub q_bar: f64,
    /// Cap for the demand pmf grid; defaults to the demand support bound.
    pub demand_cap: Option<f64>,
}

/// Lumps a distribution onto the `delta` grid over `[0, cap]`: each grid
/// point takes the mass of its half-open cell, and the two boundary cells
/// absorb the tails. Discrete distributions pass through unchanged (their
/// atoms need not be grid-aligned; transitions re-lump on-hand anyway).
pub fn lump_to_grid(dist: &Distribution, delta: f64, cap: f64) -> Vec<(f64, f64)> {
    if let Distribution::Discrete { atoms } = dist {
        return atoms.clone();
    }
    let cells = (math::round(cap / delta) as usize).max(1);
    let mut pmf = Vec::new();
    for k in 0..=cells {
        let lo = if k == 0 {
            f64::NEG_INFINITY
        } else {
            (k as f64 - 0.5) * delta
        };
        let hi = if k == cells {
            f64::INFINITY
        } else {
            (k as f64 + 0.5) * delta
        };
        let mass = cdf_at(dist, hi) - cdf_at(dist, lo);
        if mass > 0.0 {
            pmf.push((k as f64 * delta, mass));
        }
    }
    pmf
}

fn cdf_at(dist: &Distribution, x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        dist.cdf(x)
    }
}

/// Builds a [`DiscreteInstance`] from continuous models.
#[allow(clippy::too_many_arguments)]
pub fn discretize(
    demand: &DemandModel,
    supply: &SupplyModel,
    delta: f64,
    bounds: DpBounds,
    holding: f64,
    penalty: f64,
    lead_time: usize,
    horizon: u64,
) -> Result<DiscreteInstance> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    if !(bounds.on_hand_cap > 0.0) || !(bounds.q_bar >= 0.0) {
        return Err(Error::InvalidArgument(
            "bounds must be positive (on_hand_cap) and non-negative (q_bar)".into(),
        ));
    }
    let demand_cap = bounds
        .demand_cap
        .unwrap_or_else(|| demand.distribution().support().1);
    let instance = DiscreteInstance {
        delta,
        on_hand_max: (math::round(bounds.on_hand_cap / delta) as usize).max(1),
        action_max: math::floor(bounds.q_bar / delta + 1e-9) as usize,
        demand_pmf: lump_to_grid(demand.distribution(), delta, demand_cap),
        shock_pmf: lump_to_grid(supply.z_distribution(), delta, supply.z_distribution().support().1),
        supply: supply.function().clone(),
        lead_time,
        horizon,
        holding,
        penalty,
    };
    instance.validate()?;
    Ok(instance)
}

impl DiscreteInstance {
    pub fn validate(&self) -> Result<()> {
        if self.lead_time < 1 || self.horizon < 1 {
            return Err(Error::InvalidArgument("need L >= 1 and T >= 1".into()));
        }
        for pmf in [&self.demand_pmf, &self.shock_pmf] {
            let total: f64 = pmf.iter().map(|&(_, p)| p).sum();
            if math::abs(total - 1.0) > 1e-9 {
                return Err(Error::InvalidModel(alloc::format!(
                    "pmf sums to {total}, expected 1"
                )));
            }
            if pmf.iter().any(|&(v, p)| v < 0.0 || p < 0.0) {
                return Err(Error::InvalidModel("pmf entries must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Number of action levels `B = action_max + 1`.
    pub fn action_levels(&self) -> usize {
        self.action_max + 1
    }

    /// Number of states `(on_hand_max + 1) * B^L`, or `None` on overflow.
    pub fn state_count(&self) -> Option<u64> {
        let b = self.action_levels() as u64;
        let mut pipes = 1u64;
        for _ in 0..self.lead_time {
            pipes = pipes.checked_mul(b)?;
        }
        pipes.checked_mul(self.on_hand_max as u64 + 1)
    }

    /// Total state-action count, or `None` on overflow.
    pub fn state_action_count(&self) -> Option<u64> {
        self.state_count()?.checked_mul(self.action_levels() as u64)
    }

    /// Decodes a flat state index into `(on_hand_level, pipeline_levels)`.
    pub fn decode_state(&self, mut idx: usize) -> (usize, Vec<usize>) {
        let b = self.action_levels();
        let mut pipe = vec![0usize; self.lead_time];
        for slot in (0..self.lead_time).rev() {
            pipe[slot] = idx % b;
            idx /= b;
        }
        (idx, pipe)
    }

    /// Expected one-period cost and on-hand transition rows for each
    /// arriving-order level: `cost[x1][i]` and row-stochastic
    /// `trans[x1][i * (M+1) + j]`.
    fn transition_tables(&self) -> Result<TransitionTables> {
        let m1 = self.on_hand_max + 1;
        let b = self.action_levels();
        let mut cost = vec![vec![0.0; m1]; b];
        let mut trans = vec![vec![0.0; m1 * m1]; b];
        for x1 in 0..b {
            let order_value = x1 as f64 * self.delta;
            for (z, pz) in self.shock_pmf.iter().copied() {
                let s = self.supply.realize(order_value, z)?;
                for (d, pd) in self.demand_pmf.iter().copied() {
                    let w = pz * pd;
                    if w == 0.0 {
                        continue;
                    }
                    for (i, c) in cost[x1].iter_mut().enumerate() {
                        let avail = i as f64 * self.delta + s;
                        *c += w
                            * (self.holding * math::pos(avail - d)
                                + self.penalty * math::pos(d - avail));
                        let next = math::pos(avail - d) / self.delta;
                        let j = (math::round(next) as usize).min(self.on_hand_max);
                        trans[x1][i * m1 + j] += w;
                    }
                }
            }
        }
        Ok((cost, trans))
    }
}

/// Time-dependent policy: one action level per (stage, state).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    pub stages: u64,
    pub states: usize,
    actions: Vec<u16>,
}

impl PolicyTable {
    /// Action level for a 1-based stage.
    pub fn action(&self, stage: u64, state: usize) -> usize {
        self.actions[(stage as usize - 1) * self.states + state] as usize
    }

    /// The stage-1 slice, the one worth exporting.
    pub fn first_stage(&self) -> &[u16] {
        &self.actions[..self.states]
    }
}

/// Output of [`solve_dp`].
#[derive(Debug, Clone)]
pub struct DpSolution {
    /// Optimal expected total cost from the all-zero start state.
    pub value: f64,
    pub policy: PolicyTable,
}

/// Backward induction over the horizon. Refuses instances whose state-action
/// space exceeds `budget`.
pub fn solve_dp(instance: &DiscreteInstance, budget: u64) -> Result<DpSolution> {
    instance.validate()?;
    let sa = instance
        .state_action_count()
        .ok_or(Error::BudgetExceeded {
            size: u64::MAX,
            budget,
        })?;
    if sa > budget {
        return Err(Error::BudgetExceeded { size: sa, budget });
    }
    let m1 = instance.on_hand_max + 1;
    let b = instance.action_levels();
    let lead = instance.lead_time;
    let bl = b.pow(lead as u32); // pipeline combinations
    let b_rest = bl / b; // combinations of the (L-1)-slot tail
    let states = m1 * bl;
    let (cost, trans) = instance.transition_tables()?;

    // v[state] with state = i * bl + pipe, pipe big-endian (x1 first).
    let mut v_next = vec![0.0f64; states];
    let mut v_now = vec![0.0f64; states];
    let mut expect = vec![0.0f64; m1 * bl]; // E_{x1}[i][pipe'] for one x1
    let mut actions = vec![0u16; instance.horizon as usize * states];

    for stage in (1..=instance.horizon).rev() {
        let act_slice =
            &mut actions[(stage as usize - 1) * states..(stage as usize) * states];
        for x1 in 0..b {
            // expect[i][pipe'] = sum_j trans[x1][i,j] * v_next[j * bl + pipe']
            expect.iter_mut().for_each(|e| *e = 0.0);
            for i in 0..m1 {
                let row = &trans[x1][i * m1..(i + 1) * m1];
                let dst = &mut expect[i * bl..(i + 1) * bl];
                for (j, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let src = &v_next[j * bl..(j + 1) * bl];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
            for (i, &stage_cost) in cost[x1].iter().enumerate() {
                for rest in 0..b_rest {
                    // Next pipeline = (tail of current, action appended).
                    let base = i * bl + rest * b;
                    let mut best = f64::INFINITY;
                    let mut best_a = 0u16;
                    for a in 0..b {
                        let val = expect[base + a];
                        if val < best {
                            best = val;
                            best_a = a as u16;
                        }
                    }
                    let pipe = x1 * b_rest + rest;
                    let state = i * bl + pipe;
                    v_now[state] = stage_cost + best;
                    act_slice[state] = best_a;
                }
            }
        }
        core::mem::swap(&mut v_now, &mut v_next);
    }

    Ok(DpSolution {
        value: v_next[0],
        policy: PolicyTable {
            stages: instance.horizon,
            states,
            actions,
        },
    })
}

/// A policy to evaluate on a discrete instance.
#[derive(Debug, Clone, Copy)]
pub enum DpPolicy<'a> {
    Table(&'a PolicyTable),
    /// Constant order at the given action level.
    Constant(usize),
}

/// Exact expected total cost of a policy by forward propagation of the state
/// distribution from the all-zero start state.
pub fn evaluate_policy(instance: &DiscreteInstance, policy: DpPolicy<'_>) -> Result<f64> {
    instance.validate()?;
    let m1 = instance.on_hand_max + 1;
    let b = instance.action_levels();
    let lead = instance.lead_time;
    let bl = b.pow(lead as u32);
    let b_rest = bl / b;
    let states = m1 * bl;
    if let DpPolicy::Constant(a) = policy {
        if a >= b {
            return Err(Error::InvalidArgument(
                "constant action level outside the grid".into(),
            ));
        }
    }
    if let DpPolicy::Table(t) = policy {
        if t.states != states || t.stages != instance.horizon {
            return Err(Error::InvalidArgument(
                "policy table does not match the instance".into(),
            ));
        }
    }
    let (cost, trans) = instance.transition_tables()?;

    let mut dist = vec![0.0f64; states];
    let mut next = vec![0.0f64; states];
    dist[0] = 1.0;
    let mut total = 0.0;
    for stage in 1..=instance.horizon {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (state, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let i = state / bl;
            let pipe = state % bl;
            let x1 = pipe / b_rest;
            let rest = pipe % b_rest;
            let a = match policy {
                DpPolicy::Table(t) => t.action(stage, state),
                DpPolicy::Constant(q) => q,
            };
            total += mass * cost[x1][i];
            let pipe_next = rest * b + a;
            let row = &trans[x1][i * m1..(i + 1) * m1];
            for (j, &w) in row.iter().enumerate() {
                if w > 0.0 {
                    next[j * bl + pipe_next] += mass * w;
                }
            }
        }
        core::mem::swap(&mut dist, &mut next);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supply::Formulation;

    fn point(v: f64) -> Distribution {
        Distribution::Discrete {
            atoms: vec![(v, 1.0)],
        }
    }

    fn tiny_instance(holding: f64, penalty: f64) -> DiscreteInstance {
        // L=1, T=2, demand in {1, 3}, capacity z = 1, actions {0, 1}.
        DiscreteInstance {
            delta: 1.0,
            on_hand_max: 4,
            action_max: 1,
            demand_pmf: vec![(1.0, 0.5), (3.0, 0.5)],
            shock_pmf: vec![(1.0, 1.0)],
            supply: SupplyFunction::new(Formulation::Capacity, 1.0, 1.0).unwrap(),
            lead_time: 1,
            horizon: 2,
            holding,
            penalty,
        }
    }

    #[test]
    fn point_mass_discretizes_to_itself() {
        let pmf = lump_to_grid(&point(10.0), 1.0, 20.0);
        assert_eq!(pmf, vec![(10.0, 1.0)]);
    }

    #[test]
    fn uniform_lumps_with_boundary_halves() {
        // U(5, 15) on a unit grid: cells 5..=15, interior mass 0.1,
        // boundary cells 0.05 each (interval-mass integration).
        let pmf = lump_to_grid(&Distribution::Uniform { lo: 5.0, hi: 15.0 }, 1.0, 15.0);
        assert_eq!(pmf.len(), 11);
        let total: f64 = pmf.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((pmf[0].1 - 0.05).abs() < 1e-12);
        assert!((pmf[10].1 - 0.05).abs() < 1e-12);
        for &(_, p) in &pmf[1..10] {
            assert!((p - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_cells_match_simpson_quadrature() {
        // Oracle route: composite Simpson integration of the truncated
        // density per cell; implementation route: erf differences.
        let dist = Distribution::TruncatedNormal { mean: 10.0, sd: 3.0 };
        let pmf = lump_to_grid(&dist, 1.0, 20.0);
        let total: f64 = pmf.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);

        let sigma = 3.0f64;
        let mu = 10.0f64;
        let norm = 1.0 - 0.5 * (1.0 + libm::erf((0.0 - mu) / (sigma * core::f64::consts::SQRT_2)));
        let density = |x: f64| {
            if x < 0.0 {
                0.0
            } else {
                libm::exp(-0.5 * ((x - mu) / sigma) * ((x - mu) / sigma))
                    / (sigma * libm::sqrt(2.0 * core::f64::consts::PI))
                    / norm
            }
        };
        let simpson = |a: f64, b: f64| {
            let n = 200;
            let h = (b - a) / n as f64;
            let mut acc = density(a) + density(b);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * density(a + k as f64 * h);
            }
            acc * h / 3.0
        };
        for &(v, p) in &pmf {
            if v == 0.0 || v == 20.0 {
                continue; // boundary cells absorb tails by construction
            }
            let oracle = simpson(v - 0.5, v + 0.5);
            assert!(
                (p - oracle).abs() < 1e-6,
                "cell {v}: impl {p} vs quadrature {oracle}"
            );
        }
    }

    #[test]
    fn one_period_horizon_costs_expected_lost_sales_regardless_of_action() {
        let mut inst = tiny_instance(1.0, 2.0);
        inst.horizon = 1;
        let sol = solve_dp(&inst, 1_000_000).unwrap();
        // Nothing can arrive within the horizon: value = b E[D] = 2 * 2.
        assert!((sol.value - 4.0).abs() < 1e-12);
        for a in 0..inst.action_levels() {
            let got = evaluate_policy(&inst, DpPolicy::Constant(a)).unwrap();
            assert!((got - sol.value).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_demand_orders_nothing_and_costs_nothing() {
        let inst = DiscreteInstance {
            demand_pmf: vec![(0.0, 1.0)],
            horizon: 5,
            ..tiny_instance(1.0, 2.0)
        };
        let sol = solve_dp(&inst, 1_000_000).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.policy.first_stage().iter().all(|&a| a == 0));
    }

    /// Enumeration oracle: with L=1 and T=2 only the first order matters and
    /// open-loop equals closed-loop; enumerate both action choices against
    /// all demand paths.
    #[test]
    fn tiny_instance_matches_exhaustive_enumeration() {
        let (h, b) = (1.0, 2.0);
        let inst = tiny_instance(h, b);
        let pos = |x: f64| if x > 0.0 { x } else { 0.0 };
        let mut best = f64::INFINITY;
        let mut best_q = usize::MAX;
        for q1 in 0..=1usize {
            // Period 1: empty system, every demand unit is lost.
            // Period 2: arrival min(q1, 1) meets demand d2.
            let mut value = 0.0;
            for (d1, p1) in [(1.0, 0.5), (3.0, 0.5)] {
                for (d2, p2) in [(1.0, 0.5), (3.0, 0.5)] {
                    let c1 = b * d1;
                    let avail = (q1 as f64).min(1.0);
                    let c2 = h * pos(avail - d2) + b * pos(d2 - avail);
                    value += p1 * p2 * (c1 + c2);
                }
            }
            if value < best {
                best = value;
                best_q = q1;
            }
        }
        assert_eq!(best_q, 1);
        assert!((best - 6.0).abs() < 1e-12);

        let sol = solve_dp(&inst, 1_000_000).unwrap();
        assert!((sol.value - best).abs() < 1e-12, "dp {} oracle {best}", sol.value);
        assert_eq!(sol.policy.action(1, 0), 1);

        // Constant policies evaluate to the enumerated costs too.
        let c0 = evaluate_policy(&inst, DpPolicy::Constant(0)).unwrap();
        let c1 = evaluate_policy(&inst, DpPolicy::Constant(1)).unwrap();
        assert!((c0 - 8.0).abs() < 1e-12);
        assert!((c1 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn forward_evaluation_of_the_dp_policy_reproduces_its_value() {
        let inst = DiscreteInstance {
            horizon: 30,
            on_hand_max: 12,
            action_max: 3,
            demand_pmf: vec![(0.0, 0.2), (1.0, 0.3), (2.0, 0.3), (3.0, 0.2)],
            shock_pmf: vec![(1.0, 0.5), (3.0, 0.5)],
            supply: SupplyFunction::new(Formulation::Capacity, 1.0, 3.0).unwrap(),
            lead_time: 2,
            delta: 1.0,
            holding: 1.0,
            penalty: 3.0,
        };
        let sol = solve_dp(&inst, 10_000_000).unwrap();
        let forward = evaluate_policy(&inst, DpPolicy::Table(&sol.policy)).unwrap();
        assert!(
            (forward - sol.value).abs() < 1e-9,
            "forward {forward} vs dp {}",
            sol.value
        );
        // Optimality: nothing a constant policy can do beats the DP.
        for a in 0..inst.action_levels() {
            let c = evaluate_policy(&inst, DpPolicy::Constant(a)).unwrap();
            assert!(c >= sol.value - 1e-9);
        }
    }

    #[test]
    fn value_is_monotone_in_costs() {
        let base = solve_dp(&tiny_instance(1.0, 2.0), 1_000_000).unwrap().value;
        let more_holding = solve_dp(&tiny_instance(2.0, 2.0), 1_000_000).unwrap().value;
        let more_penalty = solve_dp(&tiny_instance(1.0, 3.0), 1_000_000).unwrap().value;
        assert!(more_holding >= base);
        assert!(more_penalty >= base);
    }

    #[test]
    fn budget_refusal_reports_the_size() {
        let inst = tiny_instance(1.0, 2.0);
        let sa = inst.state_action_count().unwrap();
        match solve_dp(&inst, sa - 1) {
            Err(Error::BudgetExceeded { size, budget }) => {
                assert_eq!(size, sa);
                assert_eq!(budget, sa - 1);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }
}
