//! CSV tables and the JSON sidecar.
//!
//! Per-trial columns, in order: `point, trial, [index,] n_ris, n_t, n_r,
//! k_t_db, k_r_db, snr_db, k_regime, size_regime`, the task's metric
//! columns, then `error`. Missing metrics are empty cells. Floats use the
//! shortest representation that round-trips.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiment::ExperimentResult;
use crate::spec::ExperimentSpec;
use crate::trials::has_index;
use crate::HarnessError;

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e))
}

pub fn rows_csv(result: &ExperimentResult) -> Result<Vec<u8>, HarnessError> {
    let spec = &result.spec;
    let indexed = has_index(spec.task);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = vec!["point", "trial"];
    if indexed {
        header.push("index");
    }
    header.extend(["n_ris", "n_t", "n_r", "k_t_db", "k_r_db", "snr_db", "k_regime", "size_regime"]);
    header.extend(result.columns.iter().copied());
    header.push("error");
    w.write_record(&header).map_err(csv_err)?;
    for r in &result.rows {
        let mut rec = vec![r.point.to_string(), r.trial.to_string()];
        if indexed {
            rec.push(r.index.map(|i| i.to_string()).unwrap_or_default());
        }
        rec.extend([
            r.n_ris.to_string(),
            spec.n_t.to_string(),
            spec.n_r.to_string(),
            r.k_t_db.to_string(),
            r.k_r_db.to_string(),
            spec.snr_db.to_string(),
            r.k_regime.to_string(),
            r.size_regime.to_string(),
        ]);
        rec.extend(r.values.iter().map(|v| cell(*v)));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

pub fn summary_csv(result: &ExperimentResult) -> Result<Vec<u8>, HarnessError> {
    let indexed = has_index(result.spec.task);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["point"];
    if indexed {
        header.push("index");
    }
    header.extend(["n_ris", "k_t_db", "k_r_db", "metric", "count", "mean", "std"]);
    w.write_record(&header).map_err(csv_err)?;
    for a in &result.aggregates {
        let mut rec = vec![a.point.to_string()];
        if indexed {
            rec.push(a.index.map(|i| i.to_string()).unwrap_or_default());
        }
        rec.extend([
            a.n_ris.to_string(),
            a.k_t_db.to_string(),
            a.k_r_db.to_string(),
            a.metric.clone(),
            a.count.to_string(),
            a.mean.to_string(),
            a.std.to_string(),
        ]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

#[derive(Serialize)]
struct Environment {
    os: &'static str,
    arch: &'static str,
    crate_version: &'static str,
}

#[derive(Serialize)]
struct Sidecar<'a, C: Serialize> {
    spec: &'a ExperimentSpec,
    effective_config: &'a C,
    columns: &'a [&'static str],
    metadata: &'a crate::experiment::Metadata,
    environment: Environment,
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| HarnessError::Io(e.error))?;
    Ok(())
}

pub struct WrittenFiles {
    pub rows: PathBuf,
    pub summary: PathBuf,
    pub sidecar: PathBuf,
}

/// `<dir>/<name>.csv`, `<dir>/<name>_summary.csv` and `<dir>/<name>.json`.
pub fn write_result<C: Serialize>(
    result: &ExperimentResult,
    dir: &Path,
    name: &str,
    effective_config: &C,
) -> Result<WrittenFiles, HarnessError> {
    let files = WrittenFiles {
        rows: dir.join(format!("{name}.csv")),
        summary: dir.join(format!("{name}_summary.csv")),
        sidecar: dir.join(format!("{name}.json")),
    };
    write_atomic(&files.rows, &rows_csv(result)?)?;
    write_atomic(&files.summary, &summary_csv(result)?)?;
    let sidecar = Sidecar {
        spec: &result.spec,
        effective_config,
        columns: &result.columns,
        metadata: &result.metadata,
        environment: Environment {
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            crate_version: env!("CARGO_PKG_VERSION"),
        },
    };
    let json = serde_json::to_vec_pretty(&sidecar).map_err(|e| HarnessError::Io(e.into()))?;
    write_atomic(&files.sidecar, &json)?;
    Ok(files)
}
