//! Wall-clock comparison of the closed-form designs against RMO.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::time::Instant;

use risalign::capacity::{design_wsa, ScaSettings, WsaSettings};
use risalign::channel::{sample_ricean, LosSpec};
use risalign::gain::configure_gain_los;
use risalign::geometry::UpaGeometry;
use risalign::rmo::{rmo_optimize, Landscape, Objective};
use risalign::CMatrix;
use serde::Serialize;

use crate::experiment::trial_rng;
use crate::metrics::median;
use crate::spec::{ExperimentSpec, Method, Task};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchSettings {
    pub warmups: usize,
    pub samples: usize,
    /// Calls are batched until one sample lasts at least this long.
    pub min_sample_secs: f64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            warmups: 3,
            samples: 5,
            min_sample_secs: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    /// Seconds per call.
    pub median: f64,
    pub mean: f64,
    pub calls_per_sample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuntimeRow {
    pub n_ris: usize,
    pub timings: BTreeMap<Method, Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuntimeTable {
    pub task: Task,
    pub rows: Vec<RuntimeRow>,
}

impl RuntimeTable {
    /// Median time of `slow` over median time of `fast` at `n_ris`.
    pub fn ratio(&self, n_ris: usize, slow: Method, fast: Method) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.n_ris == n_ris)?;
        Some(row.timings.get(&slow)?.median / row.timings.get(&fast)?.median)
    }

    pub fn median(&self, n_ris: usize, method: Method) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.n_ris == n_ris)?;
        Some(row.timings.get(&method)?.median)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let methods: Vec<Method> = self
            .rows
            .iter()
            .flat_map(|r| r.timings.keys().copied())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let label = |m: Method| match m {
            Method::Sa => "sa",
            Method::Wsa => "wsa",
            Method::Rmo => "rmo",
            Method::RmoSurrogate => "rmo_surrogate",
            Method::Lb => "lb",
        };
        let ratios: Vec<(Method, Method)> = [
            (Method::Rmo, Method::Sa),
            (Method::Rmo, Method::Wsa),
            (Method::Rmo, Method::RmoSurrogate),
        ]
        .into_iter()
        .filter(|(a, b)| methods.contains(a) && methods.contains(b))
        .collect();

        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["n_ris".to_string()];
        for &m in &methods {
            header.push(format!("{}_median_s", label(m)));
            header.push(format!("{}_mean_s", label(m)));
        }
        for &(a, b) in &ratios {
            header.push(format!("{}_over_{}", label(a), label(b)));
        }
        w.write_record(&header).map_err(|e| HarnessError::Io(std::io::Error::other(e)))?;
        for row in &self.rows {
            let mut rec = vec![row.n_ris.to_string()];
            for m in &methods {
                let t = row.timings.get(m);
                rec.push(t.map(|t| t.median.to_string()).unwrap_or_default());
                rec.push(t.map(|t| t.mean.to_string()).unwrap_or_default());
            }
            for &(a, b) in &ratios {
                rec.push(self.ratio(row.n_ris, a, b).map(|r| r.to_string()).unwrap_or_default());
            }
            w.write_record(&rec).map_err(|e| HarnessError::Io(std::io::Error::other(e)))?;
        }
        w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
    }
}

/// Median-of-`samples` seconds per call of `f`, after `warmups` calls.
pub fn time_call<T>(settings: &BenchSettings, mut f: impl FnMut() -> T) -> Timing {
    let mut single = f64::INFINITY;
    for _ in 0..settings.warmups.max(1) {
        let t0 = Instant::now();
        black_box(f());
        single = single.min(t0.elapsed().as_secs_f64());
    }
    let calls = if single > 0.0 {
        ((settings.min_sample_secs / single).ceil() as usize).max(1)
    } else {
        1000
    };
    let mut per_call: Vec<f64> = (0..settings.samples.max(1))
        .map(|_| {
            let t0 = Instant::now();
            for _ in 0..calls {
                black_box(f());
            }
            t0.elapsed().as_secs_f64() / calls as f64
        })
        .collect();
    let mean = per_call.iter().sum::<f64>() / per_call.len() as f64;
    Timing {
        median: median(&mut per_call),
        mean,
        calls_per_sample: calls,
    }
}

struct Instance {
    ht: CMatrix,
    hrh: CMatrix,
    los_t: LosSpec,
    los_r: LosSpec,
}

fn instance(spec: &ExperimentSpec, point: usize, n_ris: usize, k_t: f64, k_r: f64) -> Result<Instance, HarnessError> {
    let mut rng = trial_rng(spec.seed, point, 0);
    let ris = UpaGeometry::near_square(n_ris)?;
    let los_t = LosSpec::random(UpaGeometry::near_square(spec.n_t)?, ris, &mut rng);
    let ht = sample_ricean(n_ris, spec.n_t, k_t, &los_t, &mut rng)?.matrix;
    let los_r = LosSpec::random(UpaGeometry::near_square(spec.n_r)?, ris, &mut rng);
    let hrh = sample_ricean(n_ris, spec.n_r, k_r, &los_r, &mut rng)?.rx_matrix();
    Ok(Instance { ht, hrh, los_t, los_r })
}

/// Times every selected method on one seeded instance per RIS size, using
/// the first K-factor pair of the experiment.
pub fn bench_runtime(spec: &ExperimentSpec, settings: &BenchSettings) -> Result<RuntimeTable, HarnessError> {
    spec.validate()?;
    let task = match spec.task {
        Task::Gain | Task::Capacity => spec.task,
        other => return Err(HarnessError::Spec(format!("no runtime benchmark for {other:?}"))),
    };
    let point0 = spec.grid()[0];
    let (k_t, k_r) = (point0.k_t(), point0.k_r());
    let snr = spec.snr();
    let mut rows = Vec::new();
    for (p, &n_ris) in spec.n_ris.iter().enumerate() {
        let inst = instance(spec, p, n_ris, k_t, k_r)?;
        let mut timings = BTreeMap::new();
        match task {
            Task::Gain => {
                if spec.has(Method::Sa) {
                    // validate once so the timed closure can unwrap
                    configure_gain_los(&inst.los_t, &inst.los_r)?;
                    let t = time_call(settings, || configure_gain_los(&inst.los_t, &inst.los_r).unwrap());
                    timings.insert(Method::Sa, t);
                }
                if spec.has(Method::Rmo) {
                    let rmo = spec.rmo.settings(Objective::Gain);
                    Landscape::new(Objective::Gain, &inst.hrh, &inst.ht, 1.0)?;
                    let t = time_call(settings, || {
                        let land = Landscape::new(Objective::Gain, &inst.hrh, &inst.ht, 1.0).unwrap();
                        rmo_optimize(&land, &rmo, None).unwrap().quantized()
                    });
                    timings.insert(Method::Rmo, t);
                }
            }
            _ => {
                if spec.has(Method::Wsa) {
                    let wsa = WsaSettings {
                        snr,
                        k_r,
                        k_t,
                        mode: spec.csi.into(),
                        arrangement: spec.arrangement.resolve(spec.seed),
                        sca: ScaSettings::default(),
                    };
                    design_wsa(&inst.hrh, &inst.ht, &wsa)?;
                    let t = time_call(settings, || design_wsa(&inst.hrh, &inst.ht, &wsa).unwrap().phi);
                    timings.insert(Method::Wsa, t);
                }
                for (method, objective) in [
                    (Method::Rmo, Objective::CapacityExact),
                    (Method::RmoSurrogate, Objective::CapacitySurrogate),
                ] {
                    if !spec.has(method) {
                        continue;
                    }
                    let rmo = spec.rmo.settings(objective);
                    Landscape::new(objective, &inst.hrh, &inst.ht, snr)?;
                    let t = time_call(settings, || {
                        let land = Landscape::new(objective, &inst.hrh, &inst.ht, snr).unwrap();
                        rmo_optimize(&land, &rmo, None).unwrap().quantized()
                    });
                    timings.insert(method, t);
                }
            }
        }
        rows.push(RuntimeRow { n_ris, timings });
    }
    Ok(RuntimeTable { task, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Preset;

    #[test]
    fn timing_batches_fast_calls() {
        let settings = BenchSettings {
            warmups: 3,
            samples: 5,
            min_sample_secs: 1e-4,
        };
        let t = time_call(&settings, || black_box(1 + 1));
        assert!(t.calls_per_sample > 1);
        assert!(t.median >= 0.0 && t.mean >= 0.0);
    }

    #[test]
    fn small_table_has_ratios() {
        let mut spec = ExperimentSpec::preset(Preset::RuntimeGain, 1.0);
        spec.n_ris = vec![64];
        spec.n_t = 2;
        spec.n_r = 2;
        let settings = BenchSettings {
            warmups: 1,
            samples: 1,
            min_sample_secs: 0.0,
        };
        let table = bench_runtime(&spec, &settings).unwrap();
        assert!(table.ratio(64, Method::Rmo, Method::Sa).unwrap() > 0.0);
        let csv = String::from_utf8(table.to_csv().unwrap()).unwrap();
        assert!(csv.starts_with("n_ris,sa_median_s,sa_mean_s,rmo_median_s,rmo_mean_s,rmo_over_sa"));
    }
}
