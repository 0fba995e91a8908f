//! JSON configuration schema and conversion into core models.
//!
//! Every config file carries a `"mode"` field naming the subcommand it is
//! for; the full field reference lives in `configs/schema.json`. Parsing is
//! strict: unknown fields are rejected so typos surface as config errors.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use lostsales_core::dist::{DemandModel, Distribution};
use lostsales_core::eval::q_bar_auto;
use lostsales_core::learner::Kappa2Rule;
use lostsales_core::supply::{Formulation, SupplyModel};

/// Demand / shock distribution spec, e.g. `{"kind":"uniform","lo":5,"hi":15}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform { lo: f64, hi: f64 },
    TruncatedNormal { mean: f64, sd: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<Distribution> {
        let dist = match self {
            DistributionSpec::Uniform { lo, hi } => Distribution::Uniform { lo: *lo, hi: *hi },
            DistributionSpec::TruncatedNormal { mean, sd } => Distribution::TruncatedNormal {
                mean: *mean,
                sd: *sd,
            },
            DistributionSpec::Discrete { atoms } => Distribution::Discrete {
                atoms: atoms.clone(),
            },
        };
        dist.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(dist)
    }
}

/// Supply spec, e.g. `{"kind":"capacity","z":{"kind":"uniform","lo":5,"hi":15}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SupplySpec {
    Yield { z: DistributionSpec },
    Capacity { z: DistributionSpec },
    Saturating { z: DistributionSpec, alpha: f64, rho: f64 },
    Allocation { z: DistributionSpec, k: f64 },
}

impl SupplySpec {
    pub fn build(&self) -> Result<SupplyModel> {
        let (form, z) = match self {
            SupplySpec::Yield { z } => (Formulation::Yield, z),
            SupplySpec::Capacity { z } => (Formulation::Capacity, z),
            SupplySpec::Saturating { z, alpha, rho } => (
                Formulation::Saturating {
                    alpha: *alpha,
                    rho: *rho,
                },
                z,
            ),
            SupplySpec::Allocation { z, k } => (Formulation::Allocation { k: *k }, z),
        };
        SupplyModel::new(form, z.build()?).map_err(|e| anyhow!("{e}"))
    }
}

/// `"auto"` (stability-margin rule) or an explicit value.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum QBarSpec {
    Value(f64),
    Rule(String),
}

impl Default for QBarSpec {
    fn default() -> Self {
        QBarSpec::Rule("auto".into())
    }
}

impl QBarSpec {
    /// Resolves the bound; `auto` solves `E[s(q,Z)] = 0.95 E[D]`.
    pub fn resolve(&self, supply: &SupplyModel, demand: &DemandModel, seed: u64) -> Result<f64> {
        match self {
            QBarSpec::Value(v) if *v > 0.0 && v.is_finite() => Ok(*v),
            QBarSpec::Value(v) => bail!("q_bar must be positive, got {v}"),
            QBarSpec::Rule(r) if r == "auto" => {
                q_bar_auto(supply, demand, 0.05, seed).map_err(|e| anyhow!("{e}"))
            }
            QBarSpec::Rule(r) => bail!("unknown q_bar rule {r:?}; use \"auto\" or a number"),
        }
    }
}

/// `"sqrt-t"` or a fixed grid parameter K.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum KSpec {
    Fixed(u32),
    Rule(String),
}

impl Default for KSpec {
    fn default() -> Self {
        KSpec::Rule("sqrt-t".into())
    }
}

impl KSpec {
    pub fn grid_k(&self) -> Result<Option<u32>> {
        match self {
            KSpec::Fixed(k) if *k >= 1 => Ok(Some(*k)),
            KSpec::Fixed(k) => bail!("k must be >= 1, got {k}"),
            KSpec::Rule(r) if r == "sqrt-t" => Ok(None),
            KSpec::Rule(r) => bail!("unknown k rule {r:?}; use \"sqrt-t\" or an integer"),
        }
    }
}

/// `"log-t"` or a fixed constant.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Kappa2Spec {
    Fixed(f64),
    Rule(String),
}

impl Default for Kappa2Spec {
    fn default() -> Self {
        Kappa2Spec::Rule("log-t".into())
    }
}

impl Kappa2Spec {
    pub fn rule(&self) -> Result<Kappa2Rule> {
        match self {
            Kappa2Spec::Fixed(v) if *v > 0.0 && v.is_finite() => Ok(Kappa2Rule::Fixed(*v)),
            Kappa2Spec::Fixed(v) => bail!("kappa2 must be positive, got {v}"),
            Kappa2Spec::Rule(r) if r == "log-t" => Ok(Kappa2Rule::LogHorizon),
            Kappa2Spec::Rule(r) => bail!("unknown kappa2 rule {r:?}; use \"log-t\" or a number"),
        }
    }
}

/// Grid search / coupled-benchmark settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkSection {
    /// Evenly spaced candidate orders on `[0, q_bar]`.
    pub grid_points: u32,
    pub eval_periods: u64,
    /// `null` selects the `ceil(10 max(ln eval, 2L))` rule.
    pub burn_in: Option<u64>,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self {
            grid_points: 200,
            eval_periods: 100_000,
            burn_in: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Constant { q: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub mode: String,
    pub supply: SupplySpec,
    pub demand: DistributionSpec,
    pub holding: f64,
    pub penalty: f64,
    pub lead_time: usize,
    pub horizon: u64,
    pub policy: PolicySpec,
    pub seed: u64,
    /// Adds the oracle-only demand and shock columns to the trace export.
    #[serde(default)]
    pub export_ground_truth: bool,
    #[serde(default)]
    pub compensated_sums: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub mode: String,
    pub supply: SupplySpec,
    pub demand: DistributionSpec,
    pub holding: f64,
    pub penalty: f64,
    pub lead_time: usize,
    #[serde(default)]
    pub q_bar: QBarSpec,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    pub mode: String,
    pub supply: SupplySpec,
    pub demand: DistributionSpec,
    pub holding: f64,
    pub penalty: f64,
    pub lead_time: usize,
    pub horizon: u64,
    #[serde(default)]
    pub q_bar: QBarSpec,
    #[serde(default)]
    pub k: KSpec,
    #[serde(default)]
    pub kappa2: Kappa2Spec,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DpConfig {
    pub mode: String,
    pub supply: SupplySpec,
    pub demand: DistributionSpec,
    pub holding: f64,
    pub penalty: f64,
    pub lead_time: usize,
    pub horizon: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// `null` selects `4 E[D]`.
    #[serde(default)]
    pub on_hand_cap: Option<f64>,
    #[serde(default)]
    pub q_bar: QBarSpec,
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Also evaluate every constant order exactly and report the best.
    #[serde(default = "default_true")]
    pub compare_constant: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_delta() -> f64 {
    1.0
}

fn default_budget() -> u64 {
    200_000_000
}

fn default_true() -> bool {
    true
}

/// Which parameter an experiment sweeps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    Penalty,
    LeadTime,
    DemandSd,
    /// Replaces a uniform shock with `U[center - w, center + w]`.
    SupplyHalfWidth,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            param: SweepParam::None,
            values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SeedsSpec {
    List(Vec<u64>),
    Count { count: u32, base: u64 },
}

impl SeedsSpec {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        let seeds = match self {
            SeedsSpec::List(v) => v.clone(),
            SeedsSpec::Count { count, base } => (0..*count as u64).map(|i| base + i).collect(),
        };
        if seeds.is_empty() {
            bail!("seeds must not be empty");
        }
        Ok(seeds)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: String,
    pub name: String,
    pub supply: SupplySpec,
    pub demand: DistributionSpec,
    pub holding: f64,
    pub penalty: f64,
    pub lead_time: usize,
    pub horizons: Vec<u64>,
    #[serde(default)]
    pub sweep: SweepSpec,
    pub seeds: SeedsSpec,
    #[serde(default)]
    pub k: KSpec,
    #[serde(default)]
    pub kappa2: Kappa2Spec,
    #[serde(default)]
    pub q_bar: QBarSpec,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
}

/// A parsed configuration of any mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Simulate(SimulateConfig),
    Benchmark(BenchmarkConfig),
    Learn(LearnConfig),
    Dp(DpConfig),
    Experiment(ExperimentConfig),
}

impl Config {
    pub fn mode(&self) -> &'static str {
        match self {
            Config::Simulate(_) => "simulate",
            Config::Benchmark(_) => "benchmark",
            Config::Learn(_) => "learn",
            Config::Dp(_) => "dp",
            Config::Experiment(_) => "experiment",
        }
    }
}

#[derive(Deserialize)]
struct ModeProbe {
    mode: String,
}

/// Loads and structurally validates a config file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config(&text)
}

/// Parses a config document; the `mode` field selects the schema.
pub fn parse_config(text: &str) -> Result<Config> {
    let probe: ModeProbe =
        serde_json::from_str(text).context("config must be a JSON object with a \"mode\" field")?;
    let cfg = match probe.mode.as_str() {
        "simulate" => Config::Simulate(serde_json::from_str(text)?),
        "benchmark" => Config::Benchmark(serde_json::from_str(text)?),
        "learn" => Config::Learn(serde_json::from_str(text)?),
        "dp" => Config::Dp(serde_json::from_str(text)?),
        "experiment" => Config::Experiment(serde_json::from_str(text)?),
        other => bail!("unknown mode {other:?}; expected simulate|benchmark|learn|dp|experiment"),
    };
    semantic_validate(&cfg)?;
    Ok(cfg)
}

/// Cross-field validation beyond what serde can express.
fn semantic_validate(cfg: &Config) -> Result<()> {
    let positive = |name: &str, v: f64| -> Result<()> {
        if !(v > 0.0) || !v.is_finite() {
            bail!("{name} must be strictly positive, got {v}");
        }
        Ok(())
    };
    match cfg {
        Config::Simulate(c) => {
            c.supply.build()?;
            DemandModel::new(c.demand.build()?).map_err(|e| anyhow!("{e}"))?;
            positive("holding", c.holding)?;
            positive("penalty", c.penalty)?;
            ensure_dims(c.lead_time, c.horizon)?;
            let PolicySpec::Constant { q } = &c.policy;
            if !(*q >= 0.0) {
                bail!("policy q must be non-negative");
            }
        }
        Config::Benchmark(c) => {
            c.supply.build()?;
            DemandModel::new(c.demand.build()?).map_err(|e| anyhow!("{e}"))?;
            positive("holding", c.holding)?;
            positive("penalty", c.penalty)?;
            ensure_dims(c.lead_time, 1)?;
            if c.benchmark.grid_points < 2 {
                bail!("benchmark.grid_points must be >= 2");
            }
        }
        Config::Learn(c) => {
            c.supply.build()?;
            DemandModel::new(c.demand.build()?).map_err(|e| anyhow!("{e}"))?;
            positive("holding", c.holding)?;
            positive("penalty", c.penalty)?;
            ensure_dims(c.lead_time, c.horizon)?;
            c.k.grid_k()?;
            c.kappa2.rule()?;
        }
        Config::Dp(c) => {
            c.supply.build()?;
            DemandModel::new(c.demand.build()?).map_err(|e| anyhow!("{e}"))?;
            positive("holding", c.holding)?;
            positive("penalty", c.penalty)?;
            positive("delta", c.delta)?;
            ensure_dims(c.lead_time, c.horizon)?;
        }
        Config::Experiment(c) => {
            c.supply.build()?;
            DemandModel::new(c.demand.build()?).map_err(|e| anyhow!("{e}"))?;
            positive("holding", c.holding)?;
            positive("penalty", c.penalty)?;
            if c.name.is_empty() {
                bail!("experiment name must not be empty");
            }
            if c.horizons.is_empty() {
                bail!("horizons must not be empty");
            }
            for &t in &c.horizons {
                ensure_dims(c.lead_time, t)?;
            }
            c.seeds.resolve()?;
            c.k.grid_k()?;
            c.kappa2.rule()?;
            match c.sweep.param {
                SweepParam::None => {
                    if !c.sweep.values.is_empty() {
                        bail!("sweep.values must be empty when sweep.param is \"none\"");
                    }
                }
                _ => {
                    if c.sweep.values.is_empty() {
                        bail!("sweep.values must not be empty");
                    }
                    if c.sweep.param == SweepParam::DemandSd
                        && !matches!(c.demand, DistributionSpec::TruncatedNormal { .. })
                    {
                        bail!("demand-sd sweeps require a truncated-normal demand");
                    }
                    if c.sweep.param == SweepParam::SupplyHalfWidth {
                        let z = match &c.supply {
                            SupplySpec::Yield { z }
                            | SupplySpec::Capacity { z }
                            | SupplySpec::Saturating { z, .. }
                            | SupplySpec::Allocation { z, .. } => z,
                        };
                        if !matches!(z, DistributionSpec::Uniform { .. }) {
                            bail!("supply-half-width sweeps require a uniform shock");
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn ensure_dims(lead_time: usize, horizon: u64) -> Result<()> {
    if lead_time < 1 {
        bail!("lead_time must be >= 1");
    }
    if horizon < 1 {
        bail!("horizon must be >= 1");
    }
    Ok(())
}

/// Applies one sweep value to the base experiment parameters, returning the
/// adjusted `(supply, demand, holding, penalty, lead_time)`.
pub fn apply_sweep(
    cfg: &ExperimentConfig,
    value: f64,
) -> Result<(SupplySpec, DistributionSpec, f64, f64, usize)> {
    let mut supply = cfg.supply.clone();
    let mut demand = cfg.demand.clone();
    let mut penalty = cfg.penalty;
    let mut lead_time = cfg.lead_time;
    match cfg.sweep.param {
        SweepParam::None => {}
        SweepParam::Penalty => penalty = value,
        SweepParam::LeadTime => {
            if value < 1.0 || value.fract() != 0.0 {
                bail!("lead-time sweep values must be positive integers, got {value}");
            }
            lead_time = value as usize;
        }
        SweepParam::DemandSd => match &mut demand {
            DistributionSpec::TruncatedNormal { sd, .. } => *sd = value,
            _ => bail!("demand-sd sweeps require a truncated-normal demand"),
        },
        SweepParam::SupplyHalfWidth => {
            let z = match &mut supply {
                SupplySpec::Yield { z }
                | SupplySpec::Capacity { z }
                | SupplySpec::Saturating { z, .. }
                | SupplySpec::Allocation { z, .. } => z,
            };
            match z {
                DistributionSpec::Uniform { lo, hi } => {
                    let center = 0.5 * (*lo + *hi);
                    *lo = center - value;
                    *hi = center + value;
                }
                _ => bail!("supply-half-width sweeps require a uniform shock"),
            }
        }
    }
    Ok((supply, demand, cfg.holding, penalty, lead_time))
}
