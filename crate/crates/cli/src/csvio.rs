//! CSV writers and readers for the column contracts of each subcommand.
//!
//! Floats are written in shortest round-trip form, so parse -> serialize is
//! the identity on our own files.

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use lostsales_core::dp::DiscreteInstance;
use lostsales_core::eval::BenchRow;
use lostsales_core::inventory::PeriodRecord;
use lostsales_core::learner::EpochLog;

use crate::harness::{ResultRow, SummaryRow};

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Trace export: `t, order, realized_supply, sales, on_hand_end, cost` and,
/// with `ground_truth`, the oracle-only `demand` and `z` columns.
pub fn write_trace_csv(path: &Path, trace: &[PeriodRecord], ground_truth: bool) -> Result<()> {
    let file = File::create(path)?;
    let mut w = csv::Writer::from_writer(file);
    if ground_truth {
        w.write_record([
            "t",
            "order",
            "realized_supply",
            "sales",
            "on_hand_end",
            "cost",
            "demand",
            "z",
        ])?;
    } else {
        w.write_record(["t", "order", "realized_supply", "sales", "on_hand_end", "cost"])?;
    }
    let fmt = |v: f64| -> String { format!("{v}") };
    for rec in trace {
        let o = &rec.observation;
        let mut fields = vec![
            rec.t.to_string(),
            fmt(rec.order),
            fmt(o.realized_supply),
            fmt(o.sales),
            fmt(o.end_on_hand),
            fmt(rec.cost.reveal()),
        ];
        if ground_truth {
            fields.push(fmt(rec.demand.reveal()));
            fields.push(fmt(rec.shock.reveal()));
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-epoch learner log: `n, tau, a_star, active_size, c_tilde_star,
/// eliminated` (semicolon-joined arm values).
pub fn write_epochs_csv(path: &Path, logs: &[EpochLog]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "tau", "a_star", "active_size", "c_tilde_star", "eliminated"])?;
    for log in logs {
        let c = log
            .c_tilde_star
            .map(|v| format!("{v}"))
            .unwrap_or_default();
        let eliminated = log
            .eliminated
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            log.n.to_string(),
            log.tau.to_string(),
            format!("{}", log.a_star),
            log.active_count.to_string(),
            c,
            eliminated,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Benchmark grid export: `q, cost_mean, cost_se, pseudo_cost, stable`.
pub fn write_benchmark_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        q: f64,
        cost_mean: f64,
        cost_se: f64,
        pseudo_cost: f64,
        stable: bool,
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(Row {
            q: r.q,
            cost_mean: r.cost_mean,
            cost_se: r.cost_se,
            pseudo_cost: r.pseudo_cost,
            stable: r.stable,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Stage-1 DP policy: one row per state, decoded for portability.
pub fn write_dp_policy_csv(
    path: &Path,
    instance: &DiscreteInstance,
    first_stage: &[u16],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["state_index".to_string(), "on_hand".to_string()];
    for i in 1..=instance.lead_time {
        header.push(format!("pipeline_{i}"));
    }
    header.push("order".to_string());
    w.write_record(&header)?;
    for (state, &action) in first_stage.iter().enumerate() {
        let (on_hand, pipe) = instance.decode_state(state);
        let mut fields = vec![
            state.to_string(),
            format!("{}", on_hand as f64 * instance.delta),
        ];
        for level in pipe {
            fields.push(format!("{}", level as f64 * instance.delta));
        }
        fields.push(format!("{}", action as f64 * instance.delta));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// DP vs constant-order comparison line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpSummaryRow {
    pub dp_value: f64,
    pub best_constant_q: f64,
    pub best_constant_value: f64,
    pub gap_pct: f64,
}

pub fn write_dp_summary_csv(path: &Path, row: &DpSummaryRow) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_round_trip_losslessly() {
        let rows = vec![
            ResultRow {
                experiment: "x".into(),
                seed: 3,
                t: 1000,
                param: 28.33,
                learner_cost: 1.0 / 3.0,
                benchmark_cost: 2.0_f64.sqrt(),
                rel_regret_pct: -0.1234567890123456,
            },
            ResultRow {
                experiment: "x".into(),
                seed: 4,
                t: 200,
                param: 15.0,
                learner_cost: 1e-17,
                benchmark_cost: 98765.4321,
                rel_regret_pct: 55.5,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results_csv(&path, &rows).unwrap();
        let back = read_results_csv(&path).unwrap();
        assert_eq!(rows, back);
        // Serialize again: byte-identical files.
        let path2 = dir.path().join("results2.csv");
        write_results_csv(&path2, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }
}
