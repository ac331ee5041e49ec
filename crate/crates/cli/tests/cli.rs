use std::fs;
use std::path::Path;
use std::process::{Command as Process, Output};

use zampling::TrainMode;
use zampling_cli::commands::{analyze, compress_sweep, federated, gap, sensitivity, train_local, zhou};
use zampling_cli::config::{ArchChoice, DataSource, ExperimentConfig};
use zampling_cli::error::ExitKind;
use zampling_cli::Context;

fn tiny() -> ExperimentConfig {
    let mut c = ExperimentConfig::desk();
    c.data.source = DataSource::Synthetic;
    c.data.synthetic.train_per_class = 10;
    c.data.synthetic.test_per_class = 5;
    let arch = ArchChoice::Layers(vec![8, 6, 3]);
    c.compress_sweep.arch = arch.clone();
    c.compress_sweep.train.max_epochs = 2;
    c.compress_sweep.eval_samples = 3;
    c.federated.arch = arch.clone();
    c.federated.clients = 3;
    c.federated.degree = 2;
    c.federated.rounds = 2;
    c.federated.eval_samples = 2;
    c.sensitivity.arch = arch.clone();
    c.sensitivity.degree = 2;
    c.sensitivity.train.max_epochs = 2;
    c.sensitivity.trials = 2;
    c.sensitivity.sampled_networks = 2;
    c.zhou_compare.arch = arch.clone();
    c.zhou_compare.masks = 4;
    c.zhou_compare.train.max_epochs = 2;
    c.integrality_gap.arch = arch.clone();
    c.integrality_gap.degree = 2;
    c.integrality_gap.samples = 3;
    c.integrality_gap.train.max_epochs = 2;
    c.train_local.arch = arch;
    c.train_local.degree = 2;
    c.train_local.train.max_epochs = 3;
    c.train_local.train.eval_samples = 3;
    c.train_local.train.history_samples = 2;
    c
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn zample(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_zample")).args(args).output().unwrap()
}

#[test]
fn sweep_skips_cells_whose_degree_exceeds_n() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    // m = 9*6 + 7*3 = 75 with biases; m/n = 33 leaves n = 2
    c.compress_sweep.degrees = vec![1, 5];
    c.compress_sweep.compressions = vec![1.0, 33.0];
    c.compress_sweep.seeds = 1;
    let out = compress_sweep::run(&Context::new(c, dir.path())).unwrap();
    let statuses: Vec<(usize, f64, &str)> = out
        .rows
        .cells
        .iter()
        .map(|r| (r.degree, r.compression, r.status))
        .collect();
    assert_eq!(
        statuses,
        vec![(1, 1.0, "ok"), (1, 33.0, "ok"), (5, 1.0, "ok"), (5, 33.0, "skipped")]
    );
    assert_eq!(out.rows.mean_accuracy(5, 33.0), None);
    let lines = data_lines(&dir.path().join("compress_sweep.csv"));
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("5,33.0,2,1,skipped,,"));
}

#[test]
fn sweep_rejects_compressions_below_one_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.compress_sweep.compressions = vec![1.0, 1000.0];
    let err = compress_sweep::run(&Context::new(c, dir.path())).unwrap_err();
    assert_eq!(err.kind, ExitKind::Config);
}

#[test]
fn zero_rounds_give_a_header_only_round_stream() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.federated.rounds = 0;
    let out = federated::run(&Context::new(c, dir.path())).unwrap();
    let stream = fs::read_to_string(dir.path().join("federated_rounds.jsonl")).unwrap();
    assert_eq!(stream.lines().count(), 1, "only the provenance line");
    assert!(out
        .rows
        .summary
        .iter()
        .all(|s| s.uplink_bits == 0 && s.measured_client_savings.is_none()));
}

#[test]
fn federated_rounds_stream_every_round_of_every_level() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.federated.compressions = vec![1.0, 8.0];
    let out = federated::run(&Context::new(c, dir.path())).unwrap();
    let stream = fs::read_to_string(dir.path().join("federated_rounds.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = stream.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert_eq!(lines[0]["command"], "federated");
    assert_eq!(lines[3]["compression"], 8.0);
    assert_eq!(lines[3]["round"], 0);
    let s = &out.rows.summary[1];
    // round(75 / 8)
    assert_eq!(s.params, 9);
    assert_eq!(s.uplink_bits, 2 * 3 * 9);
    assert_eq!(s.downlink_bits, 2 * 3 * 9 * 32);
    assert_eq!((s.client_savings, s.server_savings), (256.0, 8.0));
}

#[test]
fn sensitivity_has_two_modes_per_tau() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.sensitivity.taus = vec![0.1, 0.5];
    let out = sensitivity::run(&Context::new(c, dir.path())).unwrap();
    assert_eq!(out.rows.rows.len(), 4);
    assert_eq!(out.rows.all_coordinates.len(), 2);
    assert_eq!(out.rows.find(TrainMode::Continuous, 0.5).unwrap().dimension, Some(0));
    assert_eq!(data_lines(&dir.path().join("sensitivity.csv")).len(), 5);
}

#[test]
fn empty_tau_list_writes_one_warning_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.sensitivity.taus.clear();
    let out = sensitivity::run(&Context::new(c, dir.path())).unwrap();
    assert_eq!(out.rows.rows.len(), 1);
    let lines = data_lines(&dir.path().join("sensitivity.csv"));
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with(",none,"));
    assert!(lines[1].ends_with("empty tau list: nothing to perturb"));
}

#[test]
fn single_seed_leaves_std_empty() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.zhou_compare.seeds = 1;
    c.zhou_compare.degrees = vec![1, 2];
    let out = zhou::run(&Context::new(c, dir.path())).unwrap();
    assert!(out.rows.summary.iter().all(|s| s.std_best.is_none()));
    let lines = data_lines(&dir.path().join("zhou_summary.csv"));
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        assert_eq!(line.split(',').nth(3), Some(""));
    }
    let r = &out.rows.runs[0];
    assert!(r.best_acc >= r.mean_acc);
}

#[test]
fn one_grid_point_is_one_stanza() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.integrality_gap.betas = vec![[0.5, 0.5]];
    c.integrality_gap.seeds = 2;
    let out = gap::run(&Context::new(c, dir.path())).unwrap();
    assert_eq!(out.rows.rows.len(), 2);
    assert!(out
        .rows
        .rows
        .iter()
        .all(|r| r.alpha == 0.5 && r.mode == TrainMode::Continuous));
    assert_eq!(out.rows.gaps(0.5, 0.5, TrainMode::Continuous).len(), 2);
}

#[test]
fn analyze_reports_the_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.analyze.weights = 100;
    c.analyze.params = 100;
    c.analyze.zonotope_trials = 2000;
    let out = analyze::run(&Context::new(c.clone(), dir.path())).unwrap().rows;
    assert_eq!(out.get("nonzero_weights").unwrap().formula, 50.0);
    assert!((out.get("zonotope_area").unwrap().formula - 1.5).abs() < 1e-12);

    c.analyze.weights = 2000;
    c.analyze.params = 2000;
    let out = analyze::run(&Context::new(c, dir.path())).unwrap().rows;
    let empty = out.get("empty_column_fraction").unwrap();
    // (1 - 1/2000)^2000 sits just below e^-1
    assert!((empty.formula - 0.3679).abs() < 5e-4);
    assert!((empty.monte_carlo - 0.3679).abs() < 0.01);
}

#[test]
fn stored_matrix_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("q.zqmx");
    let ctx = Context::new(tiny(), dir.path().join("a"));
    let first = train_local::run(&ctx, Some(&matrix)).unwrap();
    assert!(matrix.is_file());
    assert_eq!(first.rows.history.len(), 3);
    let second = train_local::run(&Context::new(tiny(), dir.path().join("b")), Some(&matrix)).unwrap();
    assert_eq!(first.rows.summary.expected_acc, second.rows.summary.expected_acc);
    assert_eq!(first.rows.summary.final_loss, second.rows.summary.final_loss);

    let mut other = tiny();
    other.train_local.degree = 3;
    let err = train_local::run(&Context::new(other, dir.path().join("c")), Some(&matrix)).unwrap_err();
    assert_eq!(err.kind, ExitKind::Config);
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny();
    c.compress_sweep.degrees = vec![1, 2];
    c.compress_sweep.compressions = vec![1.0, 4.0];
    let par = compress_sweep::run(&Context::new(c.clone(), dir.path().join("p"))).unwrap();
    c.jobs = Some(1);
    let seq = compress_sweep::run(&Context::new(c, dir.path().join("s"))).unwrap();
    let key = |o: &compress_sweep::Outcome| -> Vec<Option<f64>> { o.cells.iter().map(|r| r.sampled_mean).collect() };
    assert_eq!(key(&par.rows), key(&seq.rows));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();

    assert_eq!(zample(&["--help"]).status.code(), Some(0));
    assert_eq!(zample(&["--no-such-flag", "analyze"]).status.code(), Some(1));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[federated]\nrounds = -1\n").unwrap();
    let r = zample(&["--config", &bad.to_string_lossy(), "--out", &out, "federated"]);
    assert_eq!(r.status.code(), Some(1), "{}", String::from_utf8_lossy(&r.stderr));

    let missing = dir.path().join("nowhere");
    let r = Process::new(env!("CARGO_BIN_EXE_zample"))
        .args(["--data-dir", &missing.to_string_lossy(), "--out", &out, "train-local"])
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));

    let r = Process::new(env!("CARGO_BIN_EXE_zample"))
        .env_remove(zampling::data::DATA_DIR_ENV)
        .args(["--out", &out, "train-local"])
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));

    let r = zample(&["--out", &out, "--seed", "3", "analyze"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(dir.path().join("analyze.csv")).unwrap();
    assert!(csv.contains("# seed: 3\n"));
}

#[test]
fn flags_override_the_config_file() {
    use clap::Parser;
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.toml");
    fs::write(&file, "seed = 4\njobs = 2\n[federated]\nrounds = 7\n").unwrap();
    let path = file.to_string_lossy().into_owned();
    let cli = zampling_cli::args::Cli::parse_from(["zample", "--config", &path, "--seed", "9", "federated"]);
    let c = zampling_cli::resolve_config(&cli).unwrap();
    assert_eq!((c.seed, c.jobs, c.federated.rounds), (9, Some(2), 7));

    let cli = zampling_cli::args::Cli::parse_from(["zample", "--paper-scale", "--config", &path, "federated"]);
    let c = zampling_cli::resolve_config(&cli).unwrap();
    assert_eq!((c.federated.rounds, c.federated.eval_every), (7, 1));
}
