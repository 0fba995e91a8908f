//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see them
//! on success).
//!
//! Criteria covered:
//! 1. downshift consistency across all four supply formulations;
//! 2. censored counterfactual reconstruction equals the uncensored replay;
//! 3. the pseudo-cost / average-cost identity on random stable configs;
//! 4. simulation agrees with the exact stationary balance equations;
//! 5. capacity critical-ratio suite: <=5% mean relative regret at T=1000,
//!    ordered decreasing in the critical ratio (paired one-sided test);
//! 6. the yield mirror of criterion 5;
//! 7. monotone regret trends in lead time and demand variance;
//! 8. optimal constant order within 5% of the dynamic program;
//! 9. per-period regret strictly decreasing across horizons.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use lostsales_cli::config::{load_config, Config, ExperimentConfig};
use lostsales_cli::harness::{run_experiment, ExperimentReport};
use lostsales_core::dist::{DemandModel, Distribution};
use lostsales_core::eval::{
    check_stability, estimate_pseudo_cost, exact_stationary_chain, long_run_average_cost,
    q_bar_auto, Stability,
};
use lostsales_core::inventory::{run, ConstantOrder, CostParams, SimOptions};
use lostsales_core::learner::replay_arm;
use lostsales_core::regret::absolute_regret;
use lostsales_core::rng::SeededRng;
use lostsales_core::stats::{mean, paired_t_greater, spearman_trend_greater};
use lostsales_core::supply::{Formulation, SupplyModel};

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn experiment_config(name: &str) -> ExperimentConfig {
    match load_config(&config_path(name)).expect("shipped config parses") {
        Config::Experiment(c) => c,
        other => panic!("{name} is a {} config", other.mode()),
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn fig1a_report() -> &'static ExperimentReport {
    static REPORT: OnceLock<ExperimentReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        run_experiment(&experiment_config("fig1a.json"), jobs())
            .expect("capacity critical-ratio experiment runs")
    })
}

/// Mean relative regret at `t` for each swept parameter value, plus the
/// per-seed values (seed-ascending) for paired tests.
fn rel_regret_by_param(report: &ExperimentReport, t: u64) -> Vec<(f64, Vec<f64>)> {
    let mut params: Vec<f64> = report.cells.iter().map(|c| c.param).collect();
    params.dedup();
    params
        .iter()
        .map(|&p| {
            let mut rows: Vec<_> = report
                .rows
                .iter()
                .filter(|r| r.param == p && r.t == t)
                .collect();
            rows.sort_by_key(|r| r.seed);
            (p, rows.iter().map(|r| r.rel_regret_pct).collect())
        })
        .collect()
}

#[test]
fn criterion_1_downshift_consistency() {
    let start = Instant::now();
    let forms: Vec<(&str, SupplyModel, f64)> = vec![
        (
            "yield",
            SupplyModel::new(Formulation::Yield, Distribution::Uniform { lo: 0.0, hi: 1.0 })
                .unwrap(),
            20.0,
        ),
        (
            "capacity",
            SupplyModel::new(
                Formulation::Capacity,
                Distribution::Uniform { lo: 5.0, hi: 15.0 },
            )
            .unwrap(),
            20.0,
        ),
        (
            "saturating",
            SupplyModel::new(
                Formulation::Saturating { alpha: 2.0, rho: 0.7 },
                Distribution::Uniform { lo: 0.5, hi: 4.0 },
            )
            .unwrap(),
            20.0,
        ),
        (
            "allocation",
            SupplyModel::new(
                Formulation::Allocation { k: 12.0 },
                Distribution::Uniform { lo: 5.0, hi: 15.0 },
            )
            .unwrap(),
            20.0,
        ),
    ];
    let mut rng = SeededRng::new(0xD0_5417);
    for (name, model, q_hi) in &forms {
        let mut worst = 0.0f64;
        for _ in 0..100_000 {
            let z = model.sample_z(&mut rng);
            let q = rng.next_f64() * q_hi;
            let q_prime = rng.next_f64() * q;
            let observed = model.realize(q, z).unwrap();
            let shifted = model.downshift(q, observed, q_prime).unwrap();
            let direct = model.realize(q_prime, z).unwrap();
            let rel = (shifted - direct).abs() / direct.abs().max(1.0);
            worst = worst.max(rel);
        }
        assert!(
            worst <= 1e-12,
            "criterion 1: FAIL — {name} worst relative error {worst:e}"
        );
        println!("criterion 1 [{name}]: worst relative error {worst:.3e} over 1e5 triples");
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 10.0, "criterion 1: FAIL — took {secs:.1}s (budget 10s)");
    println!("criterion 1: PASS — downshift == direct realization within 1e-12 ({secs:.2}s)");
}

#[test]
fn criterion_2_reconstruction_matches_uncensored_replay() {
    let start = Instant::now();
    let forms: Vec<(SupplyModel, f64)> = vec![
        (
            SupplyModel::new(Formulation::Yield, Distribution::Uniform { lo: 0.0, hi: 1.0 })
                .unwrap(),
            14.0,
        ),
        (
            SupplyModel::new(
                Formulation::Capacity,
                Distribution::Uniform { lo: 5.0, hi: 15.0 },
            )
            .unwrap(),
            11.0,
        ),
        (
            SupplyModel::new(
                Formulation::Saturating { alpha: 2.0, rho: 0.7 },
                Distribution::Uniform { lo: 0.5, hi: 4.0 },
            )
            .unwrap(),
            20.0,
        ),
        (
            SupplyModel::new(
                Formulation::Allocation { k: 12.0 },
                Distribution::Uniform { lo: 5.0, hi: 15.0 },
            )
            .unwrap(),
            9.0,
        ),
    ];
    let demand = DemandModel::new(Distribution::Uniform { lo: 0.0, hi: 12.0 }).unwrap();
    let leads = [1usize, 5, 10];
    let mut pick = SeededRng::new(0xEC0);
    let mut worst = 0.0f64;
    for epoch in 0..1000u64 {
        let (model, a_star_max) = &forms[(pick.next_u64() % 4) as usize];
        let lead = leads[(pick.next_u64() % 3) as usize];
        let a_star = (0.3 + 0.7 * pick.next_f64()) * a_star_max;
        let a = pick.next_f64() * a_star;
        let params = CostParams::new(1.0, 2.0, lead, 200).unwrap();
        let out = run(
            &mut ConstantOrder(a_star),
            &params,
            model,
            &demand,
            &mut SeededRng::new(0x5EED + epoch),
            SimOptions::default(),
        )
        .unwrap();

        // Censored inputs from period L+1 on (all arrivals sized a_star).
        let mut on_hand = vec![out.trace[lead - 1].observation.end_on_hand];
        for rec in &out.trace[lead..] {
            on_hand.push(rec.observation.end_on_hand);
        }
        let arrivals: Vec<f64> = out.trace[lead..]
            .iter()
            .map(|r| r.observation.realized_supply)
            .collect();
        let replay = replay_arm(model.function(), a, a_star, &on_hand, &arrivals).unwrap();

        // Oracle: the uncensored chain with revealed shocks and demands.
        let mut oracle = on_hand[0];
        for (i, rec) in out.trace[lead..].iter().enumerate() {
            let s_a = model.realize(a, rec.shock.reveal()).unwrap();
            oracle = (oracle + s_a - rec.demand.reveal()).max(0.0);
            worst = worst.max((replay.inventory[i + 1] - oracle).abs());
        }
    }
    assert!(
        worst <= 1e-9,
        "criterion 2: FAIL — worst reconstruction drift {worst:e}"
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 2: FAIL — took {secs:.1}s (budget 60s)");
    println!(
        "criterion 2: PASS — 1000 epochs x 200 periods, worst drift {worst:.3e} ({secs:.2}s)"
    );
}

#[test]
fn criterion_3_pseudo_cost_identity() {
    let start = Instant::now();
    let mut pick = SeededRng::new(0x1DE57);
    let mut checked = 0;
    while checked < 5 {
        let form = match pick.next_u64() % 4 {
            0 => Formulation::Yield,
            1 => Formulation::Capacity,
            2 => Formulation::Saturating {
                alpha: 1.0 + pick.next_f64(),
                rho: 0.4 + 0.5 * pick.next_f64(),
            },
            _ => Formulation::Allocation {
                k: 8.0 + 8.0 * pick.next_f64(),
            },
        };
        let z = match form {
            Formulation::Yield => Distribution::Uniform { lo: 0.0, hi: 1.0 },
            _ => Distribution::Uniform {
                lo: 4.0 + 2.0 * pick.next_f64(),
                hi: 12.0 + 4.0 * pick.next_f64(),
            },
        };
        let supply = SupplyModel::new(form, z).unwrap();
        // Uniform demand keeps E[D] exact, so the identity check is clean.
        let lo = 6.0 + 4.0 * pick.next_f64();
        let hi = lo + 6.0 + 4.0 * pick.next_f64();
        let demand = DemandModel::new(Distribution::Uniform { lo, hi }).unwrap();
        let ed = 0.5 * (lo + hi);
        let (h, b) = (1.0 + 4.0 * pick.next_f64(), 5.0 + 15.0 * pick.next_f64());

        let Ok(q_bar) = q_bar_auto(&supply, &demand, 0.05, pick.next_u64()) else {
            continue;
        };
        let q = (0.4 + 0.5 * pick.next_f64()) * q_bar;
        let stable = check_stability(q, &supply, &demand, 0.0, &mut SeededRng::new(7)).unwrap();
        if stable != Stability::Stable {
            continue;
        }

        let pseudo = estimate_pseudo_cost(
            q,
            h,
            b,
            &supply,
            &demand,
            500,
            100_000,
            &mut SeededRng::new(0xA0 + checked),
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
            &mut SeededRng::new(0xB0 + checked),
        )
        .unwrap();
        let gap = (avg.estimate - pseudo.estimate - b * ed).abs();
        let combined =
            (avg.std_error.powi(2) + pseudo.std_error.powi(2)).sqrt();
        assert!(
            gap <= 3.0 * combined,
            "criterion 3: FAIL — config {checked}: |C - C_hat - b E[D]| = {gap:.4} > 3 x {combined:.4}"
        );
        println!(
            "criterion 3 [config {checked}]: gap {gap:.4} <= 3 x combined se {combined:.4}"
        );
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 3: FAIL — took {secs:.1}s (budget 60s)");
    println!("criterion 3: PASS — identity holds on 5 random stable configs ({secs:.2}s)");
}

#[test]
fn criterion_4_exact_chain_oracle() {
    let start = Instant::now();
    let atoms = |v: &[(f64, f64)]| Distribution::Discrete { atoms: v.to_vec() };
    // Three integer-lattice instances, one per invertible-supply family plus
    // capacity censoring.
    let cases: Vec<(&str, SupplyModel, DemandModel, f64, f64, f64)> = vec![
        (
            "capacity",
            SupplyModel::new(Formulation::Capacity, atoms(&[(1.0, 1.0)])).unwrap(),
            DemandModel::new(atoms(&[(0.0, 0.4), (2.0, 0.6)])).unwrap(),
            1.0,
            1.0,
            1.0,
        ),
        (
            "yield",
            SupplyModel::new(
                Formulation::Yield,
                atoms(&[(0.0, 0.25), (0.5, 0.25), (1.0, 0.5)]),
            )
            .unwrap(),
            DemandModel::new(atoms(&[(0.0, 0.3), (2.0, 0.7)])).unwrap(),
            2.0,
            1.0,
            2.0,
        ),
        (
            "allocation",
            SupplyModel::new(Formulation::Allocation { k: 6.0 }, atoms(&[(0.0, 0.5), (3.0, 0.5)]))
                .unwrap(),
            DemandModel::new(atoms(&[(5.0, 0.5), (6.0, 0.5)])).unwrap(),
            3.0,
            2.0,
            3.0,
        ),
    ];
    for (name, supply, demand, q, h, b) in &cases {
        let exact = exact_stationary_chain(*q, *h, *b, supply, demand, 400.0).unwrap();
        let sim = estimate_pseudo_cost(
            *q,
            *h,
            *b,
            supply,
            demand,
            1000,
            100_000,
            &mut SeededRng::new(0xC4A1),
        )
        .unwrap();
        let gap = (sim.estimate - exact.pseudo_cost).abs();
        assert!(
            gap <= 3.0 * sim.std_error,
            "criterion 4: FAIL — {name}: |sim - exact| = {gap:.5} > 3 x {:.5}",
            sim.std_error
        );
        println!(
            "criterion 4 [{name}]: exact {:.6} vs sim {:.6} (gap {gap:.5} <= 3 x {:.5}; {} states)",
            exact.pseudo_cost, sim.estimate, sim.std_error, exact.states
        );
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 4: FAIL — took {secs:.1}s (budget 60s)");
    println!("criterion 4: PASS — balance equations match simulation on 3 discrete instances ({secs:.2}s)");
}

#[test]
fn criterion_5_capacity_critical_ratio_headline() {
    let report = fig1a_report();
    let groups = rel_regret_by_param(report, 1000);
    assert_eq!(groups.len(), 3, "expected the three penalty cells");

    // Means at T=1000 must all clear the 5% bar.
    for (param, vals) in &groups {
        let m = mean(vals);
        assert!(
            m <= 5.0,
            "criterion 5: FAIL — b={param}: mean relative regret {m:.3}% > 5%"
        );
        println!("criterion 5 [b={param}]: mean relative regret {m:.3}% <= 5%");
    }

    // Ordered decreasing in the critical ratio b/(h+b): larger b => smaller
    // regret. Cells are in config order b = 28.33, 20, 15.
    let means: Vec<f64> = groups.iter().map(|(_, v)| mean(v)).collect();
    assert!(
        means[0] < means[1] && means[1] < means[2],
        "criterion 5: FAIL — means not ordered in critical ratio: {means:?}"
    );

    // One-sided paired test on the extreme pair (same seeds => same streams).
    let (t, p) = paired_t_greater(&groups[2].1, &groups[0].1);
    assert!(
        p < 0.05,
        "criterion 5: FAIL — paired test not significant: t={t:.3}, p={p:.4}"
    );
    println!(
        "criterion 5: PASS — means {:.3}/{:.3}/{:.3}% ordered in critical ratio (paired t={t:.2}, p={p:.2e})",
        means[0], means[1], means[2]
    );
}

#[test]
fn criterion_6_yield_mirror() {
    let report = run_experiment(&experiment_config("fig2a.json"), jobs())
        .expect("yield critical-ratio experiment runs");
    let groups = rel_regret_by_param(&report, 1000);
    for (param, vals) in &groups {
        let m = mean(vals);
        assert!(
            m <= 5.0,
            "criterion 6: FAIL — b={param}: mean relative regret {m:.3}% > 5%"
        );
        println!("criterion 6 [b={param}]: mean relative regret {m:.3}% <= 5%");
    }
    println!("criterion 6: PASS — yield suite within 5% at T=1000");
}

/// Absolute regret (cumulative cost minus T times the benchmark's long-run
/// average) per seed at T=1000, grouped by the swept parameter.
fn abs_regret_by_param(report: &ExperimentReport) -> Vec<(f64, Vec<f64>)> {
    report
        .cells
        .iter()
        .map(|cell| {
            let mut rows: Vec<_> = report
                .rows
                .iter()
                .filter(|r| r.param == cell.param && r.t == 1000)
                .collect();
            rows.sort_by_key(|r| r.seed);
            let vals = rows
                .iter()
                .map(|r| absolute_regret(r.learner_cost, 1000, cell.long_run_cost))
                .collect();
            (cell.param, vals)
        })
        .collect()
}

#[test]
fn criterion_7_monotone_trends() {
    for (file, label) in [("fig1c.json", "lead time"), ("fig1d.json", "demand sd")] {
        let report = run_experiment(&experiment_config(file), jobs())
            .unwrap_or_else(|e| panic!("{label} sweep runs: {e}"));
        let groups = abs_regret_by_param(&report);
        let means: Vec<f64> = groups.iter().map(|(_, v)| mean(v)).collect();
        assert!(
            means.windows(2).all(|w| w[0] <= w[1]),
            "criterion 7: FAIL — {label}: means not nondecreasing: {means:?}"
        );
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (param, vals) in &groups {
            for v in vals {
                xs.push(*param);
                ys.push(*v);
            }
        }
        let (rho, p) = spearman_trend_greater(&xs, &ys);
        assert!(
            p < 0.05,
            "criterion 7: FAIL — {label}: trend not significant (rho={rho:.3}, p={p:.4})"
        );
        println!(
            "criterion 7 [{label}]: means {means:?} nondecreasing; pooled Spearman rho={rho:.3}, p={p:.2e}"
        );
    }
    println!("criterion 7: PASS — regret increases with lead time and demand variance");
}

#[test]
fn criterion_8_dp_comparison() {
    let start = Instant::now();
    let cfg = match load_config(&config_path("dp_l2.json")).expect("dp config parses") {
        Config::Dp(c) => c,
        other => panic!("dp_l2.json is a {} config", other.mode()),
    };
    let instance = lostsales_cli::commands::build_dp_instance(&cfg, cfg.seed)
        .expect("instance builds");
    let solution = lostsales_core::dp::solve_dp(&instance, cfg.budget).expect("dp solves");
    let row = lostsales_cli::commands::dp_constant_gap(&instance, solution.value)
        .expect("constant comparison runs");
    assert!(
        row.gap_pct >= -1e-9,
        "criterion 8: FAIL — constant order beat the DP ({}%)",
        row.gap_pct
    );
    assert!(
        row.gap_pct <= 5.0,
        "criterion 8: FAIL — constant-order gap {:.3}% > 5%",
        row.gap_pct
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 600.0, "criterion 8: FAIL — took {secs:.1}s (budget 600s)");
    println!(
        "criterion 8: PASS — best constant order {} vs DP {}: gap {:.3}% <= 5% \
         (reference reports ~2% on its own discretization) ({secs:.2}s)",
        row.best_constant_value, row.dp_value, row.gap_pct
    );
}

#[test]
fn criterion_9_sublinearity() {
    let report = fig1a_report();
    for cell in &report.cells {
        let mut per_period: Vec<(u64, f64)> = report
            .summary
            .iter()
            .filter(|s| s.param == cell.param)
            .map(|s| (s.t, s.mean_abs_regret_per_period))
            .collect();
        per_period.sort_by_key(|&(t, _)| t);
        assert_eq!(per_period.len(), 3);
        assert!(
            per_period.windows(2).all(|w| w[0].1 > w[1].1),
            "criterion 9: FAIL — b={}: Regret_T/T not strictly decreasing: {per_period:?}",
            cell.param
        );
        println!(
            "criterion 9 [b={}]: Regret_T/T = {:?} strictly decreasing",
            cell.param, per_period
        );
    }
    println!("criterion 9: PASS — per-period regret decreases across T in every cell");
}
