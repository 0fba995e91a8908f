//! Experiment orchestration: configure, replicate, couple, and aggregate.
//!
//! For every sweep cell the harness resolves `q_bar`, validates the
//! stability assumption, grid-searches the optimal constant order `q*`
//! (common random numbers), and then runs per-seed pairs of replications:
//! one learner run and one constant-`q*` run consuming identical
//! shock/demand streams. Stream identity is enforced with checksums, not
//! assumed. Replications run concurrently; aggregation is a deterministic
//! sequential reduce over sorted rows.

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use lostsales_core::dist::DemandModel;
use lostsales_core::eval::{
    check_stability, default_burn_in, optimal_constant_order, Stability,
};
use lostsales_core::inventory::{run, ConstantOrder, CostParams, SimOptions};
use lostsales_core::learner::{run_learner, LearnerConfig};
use lostsales_core::regret::{absolute_regret, relative_regret_pct};
use lostsales_core::rng::{derive_seed, SeededRng, STREAM_VERSION};
use lostsales_core::stats;
use lostsales_core::supply::SupplyModel;

use crate::config::{apply_sweep, ExperimentConfig, SweepParam};

const PURPOSE_Q_BAR: u64 = 0x5142_4152; // "QBAR"
const PURPOSE_Q_STAR: u64 = 0x5153_5452; // "QSTR"
const PURPOSE_RUN: u64 = 0x0052_554e; // "RUN"

/// Base for the instance-level auxiliary streams (stability checks, q_bar
/// resolution, grid search). Fixed rather than seed-derived: the benchmark
/// is a property of the instance, and reports must be invariant under
/// permuting the replication seeds.
const AUX_BASE: u64 = 0x4c4f_5354_5341_4c45;

/// One `(cell, seed, horizon)` replication pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: u64,
    pub param: f64,
    pub learner_cost: f64,
    pub benchmark_cost: f64,
    pub rel_regret_pct: f64,
}

/// Per `(cell, horizon)` aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub param: f64,
    #[serde(rename = "T")]
    pub t: u64,
    pub n_seeds: usize,
    pub mean_rel_regret_pct: f64,
    pub ci95_half_width: f64,
    /// Mean of `learner_cost - T * C_inf(q*)` over seeds.
    pub mean_abs_regret: f64,
    pub mean_abs_regret_per_period: f64,
    pub q_bar: f64,
    pub q_star: f64,
    pub long_run_cost: f64,
}

/// Frozen per-cell facts recorded in the metadata output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMeta {
    pub param: f64,
    pub holding: f64,
    pub penalty: f64,
    pub lead_time: usize,
    pub q_bar: f64,
    pub q_star: f64,
    pub long_run_cost: f64,
    pub long_run_se: f64,
}

/// Everything an experiment produces, before serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub stream_version: String,
    pub seeds: Vec<u64>,
    pub grid_points: u32,
    pub cells: Vec<CellMeta>,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

struct Cell {
    param: f64,
    supply: SupplyModel,
    demand: DemandModel,
    holding: f64,
    penalty: f64,
    lead_time: usize,
    q_bar: f64,
    q_star: f64,
    long_run_cost: f64,
    long_run_se: f64,
}

fn build_cell(cfg: &ExperimentConfig, index: usize, value: Option<f64>) -> Result<Cell> {
    let (supply_spec, demand_spec, holding, penalty, lead_time) = match value {
        Some(v) => apply_sweep(cfg, v)?,
        None => (
            cfg.supply.clone(),
            cfg.demand.clone(),
            cfg.holding,
            cfg.penalty,
            cfg.lead_time,
        ),
    };
    let supply = supply_spec.build()?;
    let demand = DemandModel::new(demand_spec.build()?).map_err(|e| anyhow!("{e}"))?;
    let q_bar = cfg
        .q_bar
        .resolve(&supply, &demand, derive_seed(AUX_BASE, PURPOSE_Q_BAR, index as u64))
        .with_context(|| format!("resolving q_bar for cell {index}"))?;

    // Assumption check: the configured upper bound must be stable.
    let stability = check_stability(
        q_bar,
        &supply,
        &demand,
        0.0,
        &mut SeededRng::new(derive_seed(AUX_BASE, PURPOSE_Q_BAR, 1000 + index as u64)),
    )
    .map_err(|e| anyhow!("{e}"))?;
    if stability != Stability::Stable {
        bail!(
            "cell {index} (param {:?}): q_bar = {q_bar} fails the stability condition E[s(q,Z)] < E[D]",
            value
        );
    }

    let grid: Vec<f64> = (0..cfg.benchmark.grid_points)
        .map(|k| k as f64 / (cfg.benchmark.grid_points - 1) as f64 * q_bar)
        .collect();
    let burn_in = cfg
        .benchmark
        .burn_in
        .unwrap_or_else(|| default_burn_in(cfg.benchmark.eval_periods, lead_time));
    let search = optimal_constant_order(
        &grid,
        holding,
        penalty,
        &supply,
        &demand,
        burn_in,
        cfg.benchmark.eval_periods,
        derive_seed(AUX_BASE, PURPOSE_Q_STAR, index as u64),
    )
    .map_err(|e| anyhow!("grid search failed for cell {index}: {e}"))?;

    Ok(Cell {
        param: value.unwrap_or(0.0),
        supply,
        demand,
        holding,
        penalty,
        lead_time,
        q_bar,
        q_star: search.q_star,
        long_run_cost: search.cost.estimate,
        long_run_se: search.cost.std_error,
    })
}

/// Runs one coupled learner/benchmark pair and returns the result row.
fn run_replication(
    cfg: &ExperimentConfig,
    cell: &Cell,
    seed: u64,
    horizon: u64,
) -> Result<ResultRow> {
    let params = CostParams::new(cell.holding, cell.penalty, cell.lead_time, horizon)
        .map_err(|e| anyhow!("{e}"))?;
    let learner_cfg = LearnerConfig {
        q_bar: cell.q_bar,
        grid_k: cfg.k.grid_k()?,
        kappa2: cfg.kappa2.rule()?,
    };
    let run_seed = derive_seed(seed, PURPOSE_RUN, 0);

    let learner = run_learner(
        &params,
        &cell.supply,
        &cell.demand,
        &learner_cfg,
        &mut SeededRng::new(run_seed),
    )
    .map_err(|e| anyhow!("learner replication failed (seed {seed}, T {horizon}): {e}"))?;
    let benchmark = run(
        &mut ConstantOrder(cell.q_star),
        &params,
        &cell.supply,
        &cell.demand,
        &mut SeededRng::new(run_seed),
        SimOptions::default(),
    )
    .map_err(|e| anyhow!("benchmark replication failed (seed {seed}, T {horizon}): {e}"))?;

    if learner.run.stream_checksum != benchmark.stream_checksum {
        bail!(
            "stream decoupling detected at seed {seed}, T {horizon}: {:#x} vs {:#x}",
            learner.run.stream_checksum,
            benchmark.stream_checksum
        );
    }

    let rel = relative_regret_pct(learner.run.total_cost, benchmark.total_cost)
        .map_err(|e| anyhow!("seed {seed}: {e}"))?;
    Ok(ResultRow {
        experiment: cfg.name.clone(),
        seed,
        t: horizon,
        param: cell.param,
        learner_cost: learner.run.total_cost,
        benchmark_cost: benchmark.total_cost,
        rel_regret_pct: rel,
    })
}

/// Runs the full experiment with `jobs` worker threads.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentReport> {
    let seeds = cfg.seeds.resolve()?;
    let values: Vec<Option<f64>> = match cfg.sweep.param {
        SweepParam::None => vec![None],
        _ => cfg.sweep.values.iter().copied().map(Some).collect(),
    };

    let cells: Vec<Cell> = values
        .iter()
        .enumerate()
        .map(|(i, v)| build_cell(cfg, i, *v))
        .collect::<Result<_>>()?;

    let mut tasks = Vec::new();
    for (ci, _) in cells.iter().enumerate() {
        for &seed in &seeds {
            for &t in &cfg.horizons {
                tasks.push((ci, seed, t));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;
    let mut rows: Vec<ResultRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(ci, seed, t)| run_replication(cfg, &cells[ci], seed, t))
            .collect::<Result<Vec<_>>>()
    })?;

    // Deterministic order regardless of scheduling; aggregation below is a
    // sequential reduce over this order and therefore permutation-invariant
    // in the seeds.
    rows.sort_by(|a, b| {
        (a.param, a.t, a.seed)
            .partial_cmp(&(b.param, b.t, b.seed))
            .expect("finite keys")
    });

    let summary = summarize(cfg, &cells, &rows);
    Ok(ExperimentReport {
        name: cfg.name.clone(),
        stream_version: STREAM_VERSION.to_string(),
        seeds,
        grid_points: cfg.benchmark.grid_points,
        cells: cells
            .iter()
            .map(|c| CellMeta {
                param: c.param,
                holding: c.holding,
                penalty: c.penalty,
                lead_time: c.lead_time,
                q_bar: c.q_bar,
                q_star: c.q_star,
                long_run_cost: c.long_run_cost,
                long_run_se: c.long_run_se,
            })
            .collect(),
        rows,
        summary,
    })
}

fn summarize(cfg: &ExperimentConfig, cells: &[Cell], rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for cell in cells {
        for &t in &cfg.horizons {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.param == cell.param && r.t == t)
                .collect();
            if group.is_empty() {
                continue;
            }
            let rel: Vec<f64> = group.iter().map(|r| r.rel_regret_pct).collect();
            let abs: Vec<f64> = group
                .iter()
                .map(|r| absolute_regret(r.learner_cost, t, cell.long_run_cost))
                .collect();
            out.push(SummaryRow {
                experiment: cfg.name.clone(),
                param: cell.param,
                t,
                n_seeds: group.len(),
                mean_rel_regret_pct: stats::mean(&rel),
                ci95_half_width: stats::ci95_half_width(&rel),
                mean_abs_regret: stats::mean(&abs),
                mean_abs_regret_per_period: stats::mean(&abs) / t as f64,
                q_bar: cell.q_bar,
                q_star: cell.q_star,
                long_run_cost: cell.long_run_cost,
            });
        }
    }
    out
}
