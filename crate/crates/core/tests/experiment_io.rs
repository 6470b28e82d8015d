use std::fs;
use std::path::Path;

use aquampc::cost::ControllerKind;
use aquampc::experiment::{
    horizon_sweep, noise_comparison, read_rows, run_experiment, trajectory_file, ComparisonRow,
    ExperimentConfig, ExperimentReport, NoiseRow, ReferenceSource, Source, SweepRow, TrajectoryRow,
    COMPARISON_FILE, NOISE_FILE, REPORT_FILE, SWEEP_FILE,
};
use aquampc::growth::GrowthParams;
use aquampc::{Error, ErrorClass};

fn short(dir: &Path, days: u32) -> ExperimentConfig {
    ExperimentConfig::from_json_str(&format!(
        r#"{{"duration": {days}, "output_dir": {:?}, "report_wall_time": false}}"#,
        dir.to_str().unwrap()
    ))
    .unwrap()
}

fn names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn golden_default_config() {
    let golden = include_str!("data/default_config.json");
    assert_eq!(
        ExperimentConfig::default().to_json_pretty().unwrap(),
        golden.trim_end()
    );
    assert_eq!(
        ExperimentConfig::from_json_str(golden).unwrap(),
        ExperimentConfig::default()
    );
}

#[test]
fn default_config_carries_the_model_constants() {
    let v: serde_json::Value =
        serde_json::from_str(include_str!("data/default_config.json")).unwrap();
    let g = &v["growth"];
    for (k, want) in [
        ("m_exp", 0.67),
        ("n_exp", 0.81),
        ("b_assim", 0.62),
        ("a_frac", 0.53),
        ("h_coef", 0.8),
        ("k_min", 0.00133),
        ("j_coef", 0.0132),
        ("T_opt", 33.0),
        ("T_min", 24.0),
        ("T_max", 40.0),
        ("UIA_crit", 0.06),
        ("UIA_max", 1.4),
        ("R_frac", 0.1),
    ] {
        assert_eq!(g[k].as_f64(), Some(want), "growth.{k}");
    }
    let c = &v["costs"];
    for (k, want) in [
        ("lambda", 0.1),
        ("alpha", 100.0),
        ("P_s", 1.2),
        ("P_f", 0.4),
        ("beta1", 0.1),
        ("beta2", 0.1),
        ("P_e", 0.14),
        ("c_p", 4.2),
        ("L", 454.0),
        ("m_w", 1.0),
        ("P_max", 0.102),
    ] {
        assert_eq!(c[k].as_f64(), Some(want), "costs.{k}");
    }
    assert_eq!(v["farm"]["n_fish"].as_u64(), Some(1000));
}

#[test]
fn run_writes_one_row_and_trajectory_per_controller() {
    let dir = tempfile::tempdir().unwrap();
    let exp = short(dir.path(), 8).resolve().unwrap();
    let out = run_experiment(&exp).unwrap();
    assert_eq!(out.rows.len(), 3);
    let mut want = vec![COMPARISON_FILE.to_string(), REPORT_FILE.to_string()];
    want.extend(ControllerKind::ALL.map(trajectory_file));
    want.sort();
    assert_eq!(names(dir.path()), want);

    let header = fs::read_to_string(dir.path().join(COMPARISON_FILE)).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "controller,noise_db,horizon,mse,n_fish,final_weight_g,feed_g,elapsed_s,revenue,feed_cost,heating_cost,oxygenation_cost,profit,profit_pct,fcr"
    );
    let traj = fs::read_to_string(dir.path().join("trajectory_mpc2.csv")).unwrap();
    assert_eq!(
        traj.lines().next().unwrap(),
        "t_days,w_g,w_ref_g,f,T,DO,feed_g_day"
    );
    assert_eq!(traj.lines().count(), 1 + 9);
}

#[test]
fn csv_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let exp = short(dir.path(), 6).resolve().unwrap();
    let out = run_experiment(&exp).unwrap();
    let back: Vec<ComparisonRow> = read_rows(dir.path().join(COMPARISON_FILE)).unwrap();
    assert_eq!(back, out.rows);
    for rec in &out.records {
        let rows: Vec<TrajectoryRow> =
            read_rows(dir.path().join(trajectory_file(rec.controller))).unwrap();
        assert_eq!(
            rows,
            aquampc::experiment::trajectory_rows(&rec.result, &exp.reference, 1.0)
        );
    }
    let report: ExperimentReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(report.runs.len(), 3);
    assert!(report
        .runs
        .iter()
        .all(|r| r.descent_violations == 0 && r.steps == 6));

    let sweep = horizon_sweep(&exp, &[1, 2]).unwrap();
    let back: Vec<SweepRow> = read_rows(dir.path().join(SWEEP_FILE)).unwrap();
    assert_eq!(back, sweep.rows);

    let noise = noise_comparison(&exp, 50.0, &[4]).unwrap();
    let back: Vec<NoiseRow> = read_rows(dir.path().join(NOISE_FILE)).unwrap();
    assert_eq!(back, noise.rows);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short(dir.path(), 6);
    cfg.noise.enabled = true;
    cfg.seed = 9;
    let exp = cfg.resolve().unwrap();
    let snapshot = || -> Vec<Vec<u8>> {
        names(dir.path())
            .iter()
            .map(|n| fs::read(dir.path().join(n)).unwrap())
            .collect()
    };
    run_experiment(&exp).unwrap();
    let first = snapshot();
    let mut again = exp.clone();
    again.config.workers = 1;
    run_experiment(&again).unwrap();
    let second = snapshot();
    // report.json records the worker count; every CSV must match.
    assert_eq!(first.len(), second.len());
    for (n, (a, b)) in names(dir.path()).iter().zip(first.iter().zip(&second)) {
        if n.ends_with(".csv") {
            assert_eq!(a, b, "{n}");
        }
    }
}

#[test]
fn sweep_of_one_horizon_has_one_row_per_controller() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short(dir.path(), 5);
    cfg.sweep.repeats = 2;
    let out = horizon_sweep(&cfg.resolve().unwrap(), &[1]).unwrap();
    assert_eq!(out.rows.len(), 3);
    assert!(out.rows.iter().all(|r| r.n == 1));
    assert!(out.repeat_times.iter().all(|t| t.len() == 2));
    assert_eq!(
        out.rows.iter().map(|r| r.controller).collect::<Vec<_>>(),
        ControllerKind::ALL.to_vec()
    );
}

#[test]
fn sweep_ties_terminal_horizon_to_prediction_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short(dir.path(), 5);
    cfg.costs = Source::Inline(aquampc::cost::CostConfig {
        n_o: Some(0),
        ..Default::default()
    });
    cfg.controllers = vec![ControllerKind::Mpc2];
    let exp = cfg.resolve().unwrap();
    // With N_o forced to 0 MPC2 has no tracking incentive; the sweep overrides it.
    let swept = horizon_sweep(&exp, &[3]).unwrap().rows[0].clone();
    let mut tied = cfg.clone();
    tied.costs = Source::Inline(aquampc::cost::CostConfig {
        n_o: Some(3),
        ..Default::default()
    });
    let run = run_experiment(&tied.resolve().unwrap()).unwrap();
    assert_eq!(swept.mse, run.rows[0].mse);
}

#[test]
fn noise_study_pairs_rows_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let exp = short(dir.path(), 5).resolve().unwrap();
    let out = noise_comparison(&exp, 50.0, &[3]).unwrap();
    assert_eq!(out.rows.len(), 6);
    for pair in out.rows.chunks(2) {
        let (off, on) = (&pair[0], &pair[1]);
        assert_eq!(off.controller, on.controller);
        assert_eq!((off.noise_db, on.noise_db), (None, Some(50.0)));
        assert!(off.delta_mse.is_none() && on.delta_mse.is_some());
        assert_eq!(
            on.delta_final_weight_g.unwrap(),
            on.final_weight_g - off.final_weight_g
        );
    }
    for (base, noisy) in out.baselines.iter().zip(&out.noisy) {
        assert_ne!(base.result.applied_controls, noisy.result.applied_controls);
        assert!(noisy
            .result
            .states
            .iter()
            .all(|s| s.w.is_finite() && s.w > 0.0));
    }
}

#[test]
fn failed_run_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let ref_path = dir.path().join("ref.csv");
    let rows: String = (0..20).map(|t| format!("{t},{}\n", 20 + t)).collect();
    fs::write(&ref_path, rows).unwrap();
    let mut cfg = short(&out_dir, 5);
    cfg.reference.source = ReferenceSource::File(ref_path);
    // Catabolism overflows at any temperature above a degree over T_min.
    cfg.growth = Source::Inline(GrowthParams {
        j_coef: 1000.0,
        ..Default::default()
    });
    let err = run_experiment(&cfg.resolve().unwrap()).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Solver, "{err}");
    assert!(!out_dir.exists() || names(&out_dir).is_empty());
}

#[test]
fn file_sources_resolve_and_errors_are_classified() {
    let dir = tempfile::tempdir().unwrap();
    let growth_path = dir.path().join("growth.json");
    fs::write(&growth_path, r#"{"h_coef": 0.7}"#).unwrap();
    let doc = format!(
        r#"{{"growth": {{"file": {:?}}}, "duration": 4}}"#,
        growth_path.to_str().unwrap()
    );
    let exp = ExperimentConfig::from_json_str(&doc)
        .unwrap()
        .resolve()
        .unwrap();
    assert_eq!(exp.growth.h_coef, 0.7);

    let missing = r#"{"growth": {"file": "/definitely/not/here.json"}}"#;
    let err = ExperimentConfig::from_json_str(missing)
        .unwrap()
        .resolve()
        .unwrap_err();
    assert!(matches!(err, Error::Io(_)));
    assert_eq!(err.class(), ErrorClass::Io);

    fs::write(&growth_path, r#"{"h_coef": -1}"#).unwrap();
    let err = ExperimentConfig::from_json_str(&doc)
        .unwrap()
        .resolve()
        .unwrap_err();
    assert_eq!(err.class(), ErrorClass::Config);

    let short_ref = dir.path().join("short.csv");
    fs::write(&short_ref, "t_days,w_d_g\n0,20\n3,25\n").unwrap();
    let doc = format!(
        r#"{{"reference": {{"source": {{"file": {:?}}}}}, "duration": 10}}"#,
        short_ref.to_str().unwrap()
    );
    let err = ExperimentConfig::from_json_str(&doc)
        .unwrap()
        .resolve()
        .unwrap_err();
    assert_eq!(err.class(), ErrorClass::Config);
}
