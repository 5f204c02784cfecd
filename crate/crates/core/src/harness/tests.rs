use std::f64::consts::FRAC_PI_2;

use super::*;
use crate::noise::{McmNoiseSpec, NoiseModel, QubitNoiseParams};
use crate::optimizer::SpsaConfig;
use crate::sequences::DDKind;

fn quick_spsa() -> SpsaConfig {
    SpsaConfig {
        max_iterations: 4,
        calibration_samples: 2,
        ..SpsaConfig::default()
    }
}

fn device() -> QubitNoiseParams {
    QubitNoiseParams {
        t1: 245_000.0,
        t2: 175_000.0,
        static_z_rate: 0.0,
        static_x_rate: 0.0,
    }
}

fn mcm_config(noise: NoiseModel) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Mcm, noise);
    cfg.r_values = vec![1, 2];
    cfg.replicas = 3;
    cfg.spsa = quick_spsa();
    cfg
}

#[test]
fn zero_noise_gives_unit_fidelity() {
    let mut cfg = mcm_config(NoiseModel::ideal(1));
    cfg.exact = true;
    let res = run_experiment(&cfg).unwrap();
    for row in res.rows.iter().filter(|r| !r.sequence.ends_with("_reference")) {
        assert!(
            (row.median - 1.0).abs() < 1e-9,
            "{} at r={}: {}",
            row.sequence,
            row.sweep_value,
            row.median
        );
    }
}

#[test]
fn sampled_zero_noise_is_exact() {
    // every correlator is deterministic on a perfect Bell pair
    let cfg = mcm_config(NoiseModel::ideal(1));
    let res = run_experiment(&cfg).unwrap();
    assert!(res.row("xy4", 2.0).unwrap().median == 1.0);
}

#[test]
fn results_are_a_function_of_config_and_seed() {
    let cfg = mcm_config(NoiseModel::uniform(1, device()));
    let a = results_csv(&run_experiment(&cfg).unwrap()).unwrap();
    let b = results_csv(&run_experiment(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed = 7;
    assert_ne!(a, results_csv(&run_experiment(&other).unwrap()).unwrap());
}

#[test]
fn quartiles_are_ordered() {
    let cfg = mcm_config(NoiseModel::uniform(1, device()));
    let res = run_experiment(&cfg).unwrap();
    assert!(res.rows.iter().all(|r| r.lower <= r.median && r.median <= r.upper));
}

#[test]
fn empty_result_gives_header_only_csv() {
    let res = ExperimentResult {
        experiment: ExperimentKind::Mcm,
        sweep_label: "r".into(),
        rows: vec![],
        learned: vec![],
        traces: vec![],
        ranking: vec![],
        skipped_windows: 0,
    };
    assert_eq!(results_csv(&res).unwrap().lines().count(), 1);
    assert_eq!(
        params_csv(&res).unwrap(),
        "sweep_value,theta_over_pi,phi_over_pi,lambda_over_pi,qubit,final_cost\n"
    );
}

#[test]
fn quiet_mcm_matches_delay() {
    let mut noise = NoiseModel::uniform(1, device());
    noise.mcm = McmNoiseSpec::quiet(5600);
    let mut cfg = mcm_config(noise);
    cfg.exact = true;
    cfg.sequences = vec![DDKind::None, DDKind::Delay];
    let res = run_experiment(&cfg).unwrap();
    for r in [1.0, 2.0] {
        let a = res.row("none", r).unwrap().median;
        let b = res.row("delay", r).unwrap().median;
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn reference_rows_follow_the_decay_law() {
    let mut cfg = mcm_config(NoiseModel::uniform(1, device()));
    cfg.sequences = vec![DDKind::None];
    let res = run_experiment(&cfg).unwrap();
    let t = 5600.0 * 0.22;
    let expected = 0.987 * (-t / 245_000.0f64).exp();
    assert!((res.row("t1_reference", 1.0).unwrap().median - expected).abs() < 1e-12);
    assert_eq!(res.row("spam_reference", 2.0).unwrap().median, 0.987);
}

#[test]
fn bare_pair_sequences_coincide() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Deep, NoiseModel::uniform(1, device()));
    cfg.chain_lengths = vec![0];
    cfg.exact = true;
    cfg.spsa = quick_spsa();
    let res = run_experiment(&cfg).unwrap();
    assert!(res.row("delay", 0.0).is_none());
    let base = res.row("none", 0.0).unwrap().median;
    for k in ["cpmg", "xy4", "ur6", "ldd"] {
        assert!((res.row(k, 0.0).unwrap().median - base).abs() < 1e-12, "{k}");
    }
}

fn candidate(label: &str, kick: f64) -> ScanCandidate {
    let mut noise = NoiseModel::uniform(1, device());
    noise.mcm.neighbor_z_kick = kick;
    noise.mcm.neighbor_extra_dephasing = 0.0;
    ScanCandidate {
        label: label.into(),
        noise,
    }
}

#[test]
fn scan_flags_the_noisiest_triple() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Scan, NoiseModel::uniform(1, device()));
    cfg.scan_candidates = vec![candidate("calm", 0.0), candidate("loud", FRAC_PI_2)];
    cfg.exact = true;
    cfg.propagate_dt();
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.ranking.len(), 2);
    assert_eq!(res.ranking[0].label, "loud");
    assert!(res.ranking[0].flagged && !res.ranking[1].flagged);
    assert!(res.ranking[1].gap.abs() < 1e-12);
    assert!(ranking_csv(&res).unwrap().lines().count() == 3);
}

#[test]
fn robustness_starts_at_the_optimum() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Robustness, NoiseModel::uniform(1, device()));
    cfg.spsa = quick_spsa();
    cfg.epsilons = vec![0.0, 0.5];
    cfg.samples_per_epsilon = 4;
    let res = run_experiment(&cfg).unwrap();
    let first = res.row("ldd", 0.0).unwrap();
    let reference = res.row("ldd_optimum", 0.0).unwrap().median;
    assert_eq!(
        (first.lower, first.median, first.upper),
        (reference, reference, reference)
    );
    assert_eq!(res.learned.len(), 1);
}

#[test]
fn emits_every_file() {
    let cfg = mcm_config(NoiseModel::uniform(1, device()));
    let res = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_results(&res, &cfg, dir.path(), Some(1.5)).unwrap();
    for f in ["results.csv", "params.csv", "meta.json", "plot.svg", "traces.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config_sha256"], cfg.hash().unwrap());
    assert_eq!(meta["seed"], 0);
    let params = std::fs::read_to_string(dir.path().join("params.csv")).unwrap();
    assert_eq!(params.lines().count(), 3);
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("xy4"));
}

#[test]
fn unwritable_directory_is_an_io_error() {
    let cfg = mcm_config(NoiseModel::ideal(1));
    let res = ExperimentResult {
        experiment: ExperimentKind::Mcm,
        sweep_label: "r".into(),
        rows: vec![],
        learned: vec![],
        traces: vec![],
        ranking: vec![],
        skipped_windows: 0,
    };
    let file = tempfile::NamedTempFile::new().unwrap();
    let err = emit_results(&res, &cfg, file.path().join("sub"), None).unwrap_err();
    assert!(matches!(err, crate::Error::Io(_)));
}

#[test]
fn config_round_trips_through_json() {
    let cfg = mcm_config(NoiseModel::uniform(1, device()));
    let text = serde_json::to_string(&cfg).unwrap();
    let back = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
}

#[test]
fn minimal_config_fills_defaults() {
    let cfg =
        ExperimentConfig::from_json(r#"{"experiment":"mcm","dt_ns":0.5,"noise":{"qubits":[{"t1":null,"t2":null}]}}"#)
            .unwrap();
    assert_eq!(cfg.r_values, vec![1, 3, 5, 7, 9, 11, 13, 15]);
    assert_eq!(cfg.durations.dt_ns, 0.5);
    assert_eq!(cfg.noise.dt_ns, 0.5);
    assert_eq!(cfg.replicas, 10);
    assert!(ExperimentConfig::from_json(r#"{"experiment":"scan","noise":{"qubits":[]}}"#).is_err());
}
