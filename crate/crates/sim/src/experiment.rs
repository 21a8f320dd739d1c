//! Seeded, order-independent Monte Carlo execution.
//!
//! Every trial owns a ChaCha8 generator seeded with the experiment seed and
//! positioned on stream `(point << 32) | trial`, so a trial's draws depend
//! only on its coordinates. Rows are assembled by index, which makes the
//! output identical for any worker count.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::metrics::summarize;
use crate::spec::{ExperimentSpec, GridPoint};
use crate::trials::{has_index, metric_columns, run_trial};
use crate::HarnessError;

pub fn trial_rng(seed: u64, point: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub point: usize,
    pub trial: usize,
    pub index: Option<usize>,
    pub n_ris: usize,
    pub k_t_db: f64,
    pub k_r_db: f64,
    pub k_regime: bool,
    pub size_regime: bool,
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub point: usize,
    pub index: Option<usize>,
    pub n_ris: usize,
    pub k_t_db: f64,
    pub k_r_db: f64,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub seed: u64,
    pub code_version: &'static str,
    pub workers: usize,
    pub failed_trials: usize,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub aggregates: Vec<AggregateRow>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Aggregate of `metric` at `point` (rows without an index).
    pub fn aggregate(&self, point: usize, metric: &str) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.point == point && a.index.is_none() && a.metric == metric)
    }

    /// Finite values of `metric` at `point`.
    pub fn values(&self, point: usize, metric: &str) -> Vec<f64> {
        let Some(col) = self.column(metric) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| r.point == point)
            .filter_map(|r| r.values[col])
            .filter(|v| v.is_finite())
            .collect()
    }
}

/// Number of workers from `RISALIGN_THREADS`, falling back to the core count.
pub fn default_workers() -> usize {
    std::env::var("RISALIGN_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentResult, HarnessError> {
    spec.validate()?;
    let started = Instant::now();
    let grid = spec.grid();
    let jobs: Vec<(GridPoint, usize)> = grid
        .iter()
        .flat_map(|p| (0..spec.trials).map(move |t| (*p, t)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Spec(format!("cannot start worker pool: {e}")))?;
    let n_metrics = metric_columns(spec.task).len();
    let per_job: Vec<Vec<Row>> = pool.install(|| {
        jobs.par_iter()
            .map(|(point, trial)| {
                let mut rng = trial_rng(spec.seed, point.index, *trial);
                let base = Row {
                    point: point.index,
                    trial: *trial,
                    index: None,
                    n_ris: point.n_ris,
                    k_t_db: point.k_t_db,
                    k_r_db: point.k_r_db,
                    k_regime: spec.k_regime(point),
                    size_regime: spec.size_regime(point),
                    values: vec![None; n_metrics],
                    error: None,
                };
                match run_trial(spec, point, &mut rng) {
                    Ok(sub) => sub
                        .into_iter()
                        .map(|s| Row {
                            index: s.index,
                            values: s.values,
                            ..base.clone()
                        })
                        .collect(),
                    Err(msg) => vec![Row {
                        error: Some(msg),
                        ..base
                    }],
                }
            })
            .collect()
    });
    let rows: Vec<Row> = per_job.into_iter().flatten().collect();
    let columns = metric_columns(spec.task).to_vec();
    let aggregates = aggregate_rows(&rows, &columns, has_index(spec.task));
    let failed_trials = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(ExperimentResult {
        spec: spec.clone(),
        columns,
        rows,
        aggregates,
        metadata: Metadata {
            seed: spec.seed,
            code_version: env!("CARGO_PKG_VERSION"),
            workers,
            failed_trials,
            elapsed_secs: started.elapsed().as_secs_f64(),
        },
    })
}

/// Mean and standard deviation of every metric per point (and per index
/// for indexed tasks), over rows without errors.
pub fn aggregate_rows(rows: &[Row], columns: &[&str], indexed: bool) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(usize, Option<usize>), Vec<&Row>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        let key = (r.point, if indexed { r.index } else { None });
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((point, index), members) in groups {
        let first = members[0];
        for (c, name) in columns.iter().enumerate() {
            if let Some(s) = summarize(members.iter().filter_map(|r| r.values[c])) {
                out.push(AggregateRow {
                    point,
                    index,
                    n_ris: first.n_ris,
                    k_t_db: first.k_t_db,
                    k_r_db: first.k_r_db,
                    metric: name.to_string(),
                    count: s.count,
                    mean: s.mean,
                    std: s.std,
                });
            }
        }
    }
    out
}
