//! Subcommand implementations. Each takes a validated config plus the
//! execution context (output directory, overrides) and writes its artifacts
//! under the output directory only.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use lostsales_core::dist::DemandModel;
use lostsales_core::dp::{discretize, evaluate_policy, solve_dp, DpBounds, DpPolicy};
use lostsales_core::eval::{
    check_stability, default_burn_in, optimal_constant_order, Stability,
};
use lostsales_core::inventory::{run, ConstantOrder, CostParams, SimOptions};
use lostsales_core::learner::{run_learner, LearnerConfig};
use lostsales_core::regret::relative_regret_pct;
use lostsales_core::rng::{derive_seed, SeededRng};

use crate::config::{
    BenchmarkConfig, Config, DpConfig, ExperimentConfig, LearnConfig, PolicySpec, SimulateConfig,
};
use crate::csvio;
use crate::harness::{self, ResultRow};
use crate::plotgen;

/// Execution context shared by all subcommands.
#[derive(Debug, Clone)]
pub struct ExecCtx {
    pub out_dir: PathBuf,
    pub seed_override: Option<u64>,
    pub jobs: usize,
    pub verbose: bool,
}

impl ExecCtx {
    fn ensure_out_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating output directory {}", self.out_dir.display()))
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }
}

/// Dispatches a validated config.
pub fn execute(cfg: Config, ctx: &ExecCtx) -> Result<()> {
    match cfg {
        Config::Simulate(c) => simulate(c, ctx),
        Config::Benchmark(c) => benchmark(c, ctx),
        Config::Learn(c) => learn(c, ctx),
        Config::Dp(c) => dp(c, ctx),
        Config::Experiment(c) => experiment(c, ctx),
    }
}

fn simulate(cfg: SimulateConfig, ctx: &ExecCtx) -> Result<()> {
    ctx.ensure_out_dir()?;
    let supply = cfg.supply.build()?;
    let demand = DemandModel::new(cfg.demand.build()?).map_err(|e| anyhow!("{e}"))?;
    let params = CostParams::new(cfg.holding, cfg.penalty, cfg.lead_time, cfg.horizon)
        .map_err(|e| anyhow!("{e}"))?;
    let seed = ctx.seed_override.unwrap_or(cfg.seed);
    let PolicySpec::Constant { q } = cfg.policy;
    let out = run(
        &mut ConstantOrder(q),
        &params,
        &supply,
        &demand,
        &mut SeededRng::new(seed),
        SimOptions {
            compensated_sums: cfg.compensated_sums,
        },
    )
    .map_err(|e| anyhow!("{e}"))?;
    let trace_path = ctx.out("trace.csv");
    csvio::write_trace_csv(&trace_path, &out.trace, cfg.export_ground_truth)?;
    ctx.log(&format!("wrote {}", trace_path.display()));
    println!(
        "simulate: T={} q={} total_cost={} checksum={:#018x}",
        cfg.horizon, q, out.total_cost, out.stream_checksum
    );
    Ok(())
}

fn benchmark_grid(q_bar: f64, points: u32) -> Vec<f64> {
    (0..points)
        .map(|k| k as f64 / (points - 1) as f64 * q_bar)
        .collect()
}

fn benchmark(cfg: BenchmarkConfig, ctx: &ExecCtx) -> Result<()> {
    ctx.ensure_out_dir()?;
    let supply = cfg.supply.build()?;
    let demand = DemandModel::new(cfg.demand.build()?).map_err(|e| anyhow!("{e}"))?;
    let seed = ctx.seed_override.unwrap_or(cfg.seed);
    let q_bar = cfg.q_bar.resolve(&supply, &demand, derive_seed(seed, 0x5142, 0))?;
    require_stable(q_bar, &supply, &demand, seed)?;
    let burn_in = cfg
        .benchmark
        .burn_in
        .unwrap_or_else(|| default_burn_in(cfg.benchmark.eval_periods, cfg.lead_time));
    let search = optimal_constant_order(
        &benchmark_grid(q_bar, cfg.benchmark.grid_points),
        cfg.holding,
        cfg.penalty,
        &supply,
        &demand,
        burn_in,
        cfg.benchmark.eval_periods,
        derive_seed(seed, 0x5153, 0),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let path = ctx.out("benchmark.csv");
    csvio::write_benchmark_csv(&path, &search.rows)?;
    ctx.log(&format!("wrote {}", path.display()));
    println!(
        "benchmark: q_bar={} q_star={} long_run_cost={} (se {})",
        q_bar, search.q_star, search.cost.estimate, search.cost.std_error
    );
    Ok(())
}

fn require_stable(
    q_bar: f64,
    supply: &lostsales_core::supply::SupplyModel,
    demand: &DemandModel,
    seed: u64,
) -> Result<()> {
    let s = check_stability(
        q_bar,
        supply,
        demand,
        0.0,
        &mut SeededRng::new(derive_seed(seed, 0x5354, 0)),
    )
    .map_err(|e| anyhow!("{e}"))?;
    if s != Stability::Stable {
        bail!("q_bar = {q_bar} fails the stability condition E[s(q,Z)] < E[D]");
    }
    Ok(())
}

fn learn(cfg: LearnConfig, ctx: &ExecCtx) -> Result<()> {
    ctx.ensure_out_dir()?;
    let supply = cfg.supply.build()?;
    let demand = DemandModel::new(cfg.demand.build()?).map_err(|e| anyhow!("{e}"))?;
    let seed = ctx.seed_override.unwrap_or(cfg.seed);
    let q_bar = cfg.q_bar.resolve(&supply, &demand, derive_seed(seed, 0x5142, 0))?;
    require_stable(q_bar, &supply, &demand, seed)?;

    let params = CostParams::new(cfg.holding, cfg.penalty, cfg.lead_time, cfg.horizon)
        .map_err(|e| anyhow!("{e}"))?;
    let learner_cfg = LearnerConfig {
        q_bar,
        grid_k: cfg.k.grid_k()?,
        kappa2: cfg.kappa2.rule()?,
    };
    let run_seed = derive_seed(seed, 0x52554e, 0);
    let learner = run_learner(
        &params,
        &supply,
        &demand,
        &learner_cfg,
        &mut SeededRng::new(run_seed),
    )
    .map_err(|e| anyhow!("{e}"))?;

    // Coupled benchmark at the grid-searched optimal constant order.
    let burn_in = cfg
        .benchmark
        .burn_in
        .unwrap_or_else(|| default_burn_in(cfg.benchmark.eval_periods, cfg.lead_time));
    let search = optimal_constant_order(
        &benchmark_grid(q_bar, cfg.benchmark.grid_points),
        cfg.holding,
        cfg.penalty,
        &supply,
        &demand,
        burn_in,
        cfg.benchmark.eval_periods,
        derive_seed(seed, 0x5153, 0),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let benchmark = run(
        &mut ConstantOrder(search.q_star),
        &params,
        &supply,
        &demand,
        &mut SeededRng::new(run_seed),
        SimOptions::default(),
    )
    .map_err(|e| anyhow!("{e}"))?;
    if benchmark.stream_checksum != learner.run.stream_checksum {
        bail!("coupled runs consumed different streams (seed {seed})");
    }

    let rel = relative_regret_pct(learner.run.total_cost, benchmark.total_cost)
        .map_err(|e| anyhow!("{e}"))?;
    let rows = vec![ResultRow {
        experiment: "learn".into(),
        seed,
        t: cfg.horizon,
        param: 0.0,
        learner_cost: learner.run.total_cost,
        benchmark_cost: benchmark.total_cost,
        rel_regret_pct: rel,
    }];
    csvio::write_results_csv(&ctx.out("results.csv"), &rows)?;
    csvio::write_epochs_csv(&ctx.out("epochs.csv"), &learner.epochs)?;
    ctx.log("wrote results.csv, epochs.csv");
    println!(
        "learn: T={} q_bar={} q_star={} learner_cost={} benchmark_cost={} rel_regret={:.3}% final_a_star={}",
        cfg.horizon,
        q_bar,
        search.q_star,
        learner.run.total_cost,
        benchmark.total_cost,
        rel,
        learner.final_a_star
    );
    Ok(())
}

/// Builds the discretized instance a dp config describes.
pub fn build_dp_instance(
    cfg: &DpConfig,
    seed: u64,
) -> Result<lostsales_core::dp::DiscreteInstance> {
    let supply = cfg.supply.build()?;
    let demand = DemandModel::new(cfg.demand.build()?).map_err(|e| anyhow!("{e}"))?;
    let q_bar = cfg.q_bar.resolve(&supply, &demand, derive_seed(seed, 0x5142, 0))?;
    let on_hand_cap = match cfg.on_hand_cap {
        Some(v) => v,
        None => 4.0 * demand.mean(1_000_000, &mut SeededRng::new(derive_seed(seed, 0x4544, 0))),
    };
    discretize(
        &demand,
        &supply,
        cfg.delta,
        DpBounds {
            on_hand_cap,
            q_bar,
            demand_cap: None,
        },
        cfg.holding,
        cfg.penalty,
        cfg.lead_time,
        cfg.horizon,
    )
    .map_err(|e| anyhow!("{e}"))
}

/// Exact best-constant-order comparison against the DP optimum.
pub fn dp_constant_gap(
    instance: &lostsales_core::dp::DiscreteInstance,
    dp_value: f64,
) -> Result<csvio::DpSummaryRow> {
    let mut best = (f64::INFINITY, 0usize);
    for a in 0..instance.action_levels() {
        let v = evaluate_policy(instance, DpPolicy::Constant(a)).map_err(|e| anyhow!("{e}"))?;
        if v < best.0 {
            best = (v, a);
        }
    }
    Ok(csvio::DpSummaryRow {
        dp_value,
        best_constant_q: best.1 as f64 * instance.delta,
        best_constant_value: best.0,
        gap_pct: (best.0 - dp_value) / dp_value * 100.0,
    })
}

fn dp(cfg: DpConfig, ctx: &ExecCtx) -> Result<()> {
    ctx.ensure_out_dir()?;
    let seed = ctx.seed_override.unwrap_or(cfg.seed);
    let instance = build_dp_instance(&cfg, seed)?;
    ctx.log(&format!(
        "dp instance: states={:?} state-action={:?}",
        instance.state_count(),
        instance.state_action_count()
    ));
    let solution = solve_dp(&instance, cfg.budget).map_err(|e| anyhow!("{e}"))?;
    csvio::write_dp_policy_csv(&ctx.out("dp_policy.csv"), &instance, solution.policy.first_stage())?;

    if cfg.compare_constant {
        let row = dp_constant_gap(&instance, solution.value)?;
        csvio::write_dp_summary_csv(&ctx.out("dp_summary.csv"), &row)?;
        println!(
            "dp: value={} best_constant_q={} best_constant_value={} gap={:.3}%",
            solution.value, row.best_constant_q, row.best_constant_value, row.gap_pct
        );
    } else {
        println!("dp: value={}", solution.value);
    }
    Ok(())
}

fn experiment(cfg: ExperimentConfig, ctx: &ExecCtx) -> Result<()> {
    ctx.ensure_out_dir()?;
    let mut cfg = cfg;
    if let Some(seed) = ctx.seed_override {
        let count = cfg.seeds.resolve()?.len() as u32;
        cfg.seeds = crate::config::SeedsSpec::Count { count, base: seed };
    }
    let report = harness::run_experiment(&cfg, ctx.jobs)?;
    csvio::write_results_csv(&ctx.out("results.csv"), &report.rows)?;
    csvio::write_summary_csv(&ctx.out("summary.csv"), &report.summary)?;
    plotgen::write_plot_script(&ctx.out("plot_regret.py"), &report.name)?;
    write_metadata(&ctx.out("metadata.json"), &cfg, &report)?;
    ctx.log("wrote results.csv, summary.csv, plot_regret.py, metadata.json");
    for s in &report.summary {
        println!(
            "experiment {} param={} T={} mean_rel_regret={:.3}% (+/-{:.3}) q_star={}",
            s.experiment, s.param, s.t, s.mean_rel_regret_pct, s.ci95_half_width, s.q_star
        );
    }
    Ok(())
}

fn write_metadata(path: &Path, cfg: &ExperimentConfig, report: &harness::ExperimentReport) -> Result<()> {
    #[derive(Serialize)]
    struct Metadata<'a> {
        experiment: &'a str,
        stream_version: &'a str,
        seeds: &'a [u64],
        horizons: &'a [u64],
        k: &'a crate::config::KSpec,
        kappa2: &'a crate::config::Kappa2Spec,
        benchmark_grid_points: u32,
        benchmark_eval_periods: u64,
        cells: &'a [harness::CellMeta],
    }
    let meta = Metadata {
        experiment: &report.name,
        stream_version: &report.stream_version,
        seeds: &report.seeds,
        horizons: &cfg.horizons,
        k: &cfg.k,
        kappa2: &cfg.kappa2,
        benchmark_grid_points: report.grid_points,
        benchmark_eval_periods: cfg.benchmark.eval_periods,
        cells: &report.cells,
    };
    fs::write(path, serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}
