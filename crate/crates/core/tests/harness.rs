use std::fs;

use convex_bandit::harness::{
    doubling_wrapper, read_trace_csv, run_experiment, run_seed, write_trace_csv, Algorithm, ExperimentConfig,
    Granularity,
};

fn config_1d(horizon: u64, sigma: f64) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
        algorithm = "1d"
        T = {horizon}
        sigma = {sigma}
        seeds = [3, 1, 2]
        [function]
        kind = "quadratic-1d"
        minimizer = 0.3
        curvature = 1.0
        "#
    ))
    .unwrap()
}

fn config_nd(horizon: u64) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
        algorithm = "nd"
        d = 2
        T = {horizon}
        sigma = 0.05
        mode = "practical"
        seeds = [7]
        [function]
        kind = "quadratic-nd"
        minimizer = [0.2, -0.1]
        curvature = 1.0
        "#
    ))
    .unwrap()
}

#[test]
fn csv_round_trip_is_exact() {
    let cfg = config_1d(20_000, 0.1);
    let trace = run_seed(&cfg, 5).unwrap();
    assert_eq!(trace.records.len() as u64, trace.queries);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_trace_csv(&path, trace.dim, &trace.records).unwrap();
    assert_eq!(read_trace_csv(&path).unwrap(), trace.records);
}

#[test]
fn trace_regret_matches_resummation() {
    for cfg in [config_1d(50_000, 0.1), config_nd(20_000)] {
        let trace = run_seed(&cfg, 11).unwrap();
        let f = cfg.test_function().unwrap();
        let mut total = 0.0;
        for (i, r) in trace.records.iter().enumerate() {
            assert_eq!(r.t, i as u64 + 1);
            total += f.value_raw(&r.x).max(0.0);
            assert!((r.regret - total).abs() <= 1e-9 * total.max(1.0));
        }
        assert!((trace.regret - total).abs() <= 1e-9 * total.max(1.0));
    }
}

#[test]
fn noiseless_rerun_writes_identical_files() {
    let mut cfg = config_1d(10_000, 0.0);
    cfg.seeds = vec![0];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        cfg.out = Some(dir.path().to_path_buf());
        run_experiment(&cfg).unwrap();
    }
    for name in ["trace_seed0.csv", "events_seed0.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn seeds_are_isolated_from_each_other() {
    let cfg = config_1d(20_000, 0.1);
    let (_, traces) = run_experiment(&cfg).unwrap();
    let mut permuted = cfg.clone();
    permuted.seeds = vec![2, 3, 1];
    let (_, again) = run_experiment(&permuted).unwrap();
    for t in &traces {
        let u = again.iter().find(|u| u.seed == t.seed).unwrap();
        assert_eq!(t.records, u.records);
        assert_eq!(t.regret, u.regret);
    }
    let alone = run_seed(&cfg, 1).unwrap();
    assert_eq!(alone.records, traces.iter().find(|t| t.seed == 1).unwrap().records);
}

#[test]
fn output_directory_holds_traces_and_summary() {
    let mut cfg = config_nd(5_000);
    let dir = tempfile::tempdir().unwrap();
    cfg.out = Some(dir.path().to_path_buf());
    let (summary, traces) = run_experiment(&cfg).unwrap();
    assert_eq!(summary.seeds.len(), 1);
    assert!(summary.regret_bound.is_some() && summary.epoch_bound.is_some());
    let csv = read_trace_csv(&dir.path().join("trace_seed7.csv")).unwrap();
    assert_eq!(csv, traces[0].records);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["seeds"][0]["queries"].as_u64(), Some(traces[0].queries));
}

#[test]
fn doubling_with_full_initial_guess_equals_single_run() {
    let mut cfg = config_1d(30_000, 0.1);
    cfg.seeds = vec![4];
    let (_, single) = run_experiment(&cfg).unwrap();
    cfg.initial_horizon = Some(cfg.horizon);
    let (_, doubled) = doubling_wrapper(&cfg).unwrap();
    assert_eq!(single[0].records, doubled[0].records);
    assert_eq!(single[0].epochs, doubled[0].epochs);
}

#[test]
fn doubling_restarts_share_one_ledger() {
    let mut cfg = config_1d(60_000, 0.1);
    cfg.seeds = vec![9];
    cfg.initial_horizon = Some(1_000);
    let (_, traces) = doubling_wrapper(&cfg).unwrap();
    let trace = &traces[0];
    assert!(trace.queries <= cfg.horizon);
    let restarts = trace.events.iter().map(|e| e.restart).max().unwrap();
    assert!(restarts >= 2, "only {restarts} restarts");
    let epochs: Vec<_> = trace.events.iter().filter(|e| e.kind == "epoch").collect();
    for w in epochs.windows(2) {
        assert!(w[1].t_start >= w[0].t_end, "epochs overlap");
        assert!(w[1].restart >= w[0].restart);
    }
    for e in &epochs {
        let want = if e.t_end == 0 { 0.0 } else { trace.records[e.t_end as usize - 1].regret };
        assert_eq!(e.regret_end, Some(want));
    }
    assert!(trace.records.windows(2).all(|w| w[1].regret >= w[0].regret));
}

#[test]
fn coarse_logging_keeps_totals() {
    let mut cfg = config_1d(20_000, 0.1);
    cfg.logging = Some(Granularity::PerRound);
    let coarse = run_seed(&cfg, 1).unwrap();
    cfg.logging = Some(Granularity::PerQuery);
    let fine = run_seed(&cfg, 1).unwrap();
    assert!(coarse.records.is_empty());
    assert_eq!(coarse.queries, fine.queries);
    assert_eq!(coarse.regret, fine.regret);
    assert!(coarse.events.iter().any(|e| e.kind == "round"));
}

#[test]
fn invalid_configs_are_rejected() {
    let bad_theory = {
        let mut c = config_nd(1_000);
        c.mode = convex_bandit::harness::Mode::Theory;
        c.c1 = Some(2.0);
        c
    };
    let bad_dim = {
        let mut c = config_1d(1_000, 0.1);
        c.algorithm = Algorithm::Nd;
        c
    };
    let no_seeds = {
        let mut c = config_1d(1_000, 0.1);
        c.seeds.clear();
        c
    };
    for cfg in [bad_theory, bad_dim, no_seeds] {
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{err}");
    }
    assert!(ExperimentConfig::from_toml("algorithm = \"1d\"\nT = 10\nsigma = 0.1\nbogus = 1\n").is_err());
}
