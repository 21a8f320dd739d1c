use risalign_sim::config::Overrides;
use risalign_sim::metrics::summarize;
use risalign_sim::output::{rows_csv, summary_csv, write_result};
use risalign_sim::{run_experiment, ExperimentSpec, Method, Preset, Task};

fn small_gain() -> ExperimentSpec {
    let mut spec = ExperimentSpec::preset(Preset::Custom, 1.0);
    spec.task = Task::Gain;
    spec.n_ris = vec![64, 144];
    spec.n_t = 4;
    spec.n_r = 4;
    spec.k_db = vec![(0.0, 0.0), (10.0, -5.0)];
    spec.trials = 6;
    spec.seed = 42;
    spec
}

fn small_capacity() -> ExperimentSpec {
    let mut spec = small_gain();
    spec.task = Task::Capacity;
    spec.methods = vec![Method::Wsa, Method::Rmo, Method::RmoSurrogate, Method::Lb];
    spec.rmo.max_iters = 40;
    spec
}

#[test]
fn csv_identical_across_worker_counts_and_runs() {
    for spec in [small_gain(), small_capacity()] {
        let one = rows_csv(&run_experiment(&spec, 1).unwrap()).unwrap();
        let four = rows_csv(&run_experiment(&spec, 4).unwrap()).unwrap();
        let again = rows_csv(&run_experiment(&spec, 1).unwrap()).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, again);
    }
}

#[test]
fn different_seeds_differ() {
    let a = small_gain();
    let mut b = small_gain();
    b.seed += 1;
    assert_ne!(
        rows_csv(&run_experiment(&a, 1).unwrap()).unwrap(),
        rows_csv(&run_experiment(&b, 1).unwrap()).unwrap()
    );
}

#[test]
fn aggregates_recompute_from_rows() {
    let result = run_experiment(&small_capacity(), 2).unwrap();
    assert_eq!(result.metadata.failed_trials, 0);
    for agg in &result.aggregates {
        let values = result.values(agg.point, &agg.metric);
        let s = summarize(values).unwrap();
        assert_eq!(s.count, agg.count);
        assert!((s.mean - agg.mean).abs() <= 1e-12 * s.mean.abs().max(1.0), "{}", agg.metric);
        assert!((s.std - agg.std).abs() <= 1e-12 * s.std.abs().max(1.0), "{}", agg.metric);
    }
}

#[test]
fn eigen_profile_rows_carry_index() {
    let mut spec = ExperimentSpec::preset(Preset::Fig1a, 0.1);
    spec.n_t = 5;
    let result = run_experiment(&spec, 1).unwrap();
    let csv = String::from_utf8(rows_csv(&result).unwrap()).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("point,trial,index,"));
    assert_eq!(csv.lines().count(), 1 + 5 * spec.trials);
    let summary = String::from_utf8(summary_csv(&result).unwrap()).unwrap();
    assert!(summary.lines().count() > 1);
}

#[test]
fn written_files_echo_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let overrides = Overrides::from_toml("seed = 5\ntrials = 2\n[dims]\nn_ris = [64]\nn_t = 2\nn_r = 2").unwrap();
    let spec = overrides.build(Preset::Custom).unwrap();
    let result = run_experiment(&spec, 1).unwrap();
    let files = write_result(&result, dir.path(), "custom", &overrides).unwrap();
    assert!(files.rows.exists() && files.summary.exists());
    let sidecar: serde_json::Value = serde_json::from_slice(&std::fs::read(&files.sidecar).unwrap()).unwrap();
    assert_eq!(sidecar["effective_config"]["seed"], 5);
    assert_eq!(sidecar["effective_config"]["dims"]["n_ris"][0], 64);
    assert_eq!(sidecar["metadata"]["seed"], 5);
    assert!(sidecar["metadata"]["elapsed_secs"].as_f64().unwrap() >= 0.0);
    let rows = std::fs::read_to_string(&files.rows).unwrap();
    assert!(!rows.contains("elapsed"));
}
