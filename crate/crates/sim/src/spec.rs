//! Experiment descriptions and the figure presets.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use risalign::capacity::{Arrangement, CsiMode};
use risalign::rmo::{Objective, RmoSettings, StepRule};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig2a,
    Fig2b,
    Fig2c,
    RuntimeGain,
    RuntimeCapacity,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Fig1a,
        Preset::Fig1b,
        Preset::Fig1c,
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::RuntimeGain,
        Preset::RuntimeCapacity,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::RuntimeGain => "runtime-gain",
            Preset::RuntimeCapacity => "runtime-capacity",
            Preset::Custom => "custom",
        }
    }

    pub fn is_runtime(self) -> bool {
        matches!(self, Preset::RuntimeGain | Preset::RuntimeCapacity)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HarnessError::Spec(format!("unknown preset `{s}`")))
    }
}

/// What a single trial computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Empirical vs predicted eigenvalues of one channel, per index.
    EigenProfile,
    /// Mean per-index NMSE of the predicted spectrum.
    SpectrumNmse,
    /// NMSE of the principal eigenvalue against `K/(K+1)·N_S·N_x`.
    PrincipalNmse,
    /// Exact vs diagonal capacity under a random element split.
    CapacityApprox,
    Gain,
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sa,
    Wsa,
    Rmo,
    RmoSurrogate,
    Lb,
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sa" => Ok(Method::Sa),
            "wsa" => Ok(Method::Wsa),
            "rmo" => Ok(Method::Rmo),
            "rmo-surrogate" => Ok(Method::RmoSurrogate),
            "lb" => Ok(Method::Lb),
            _ => Err(HarnessError::Spec(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrangementPolicy {
    Contiguous,
    Interleaved,
    /// Seeded per trial from the trial stream.
    Random,
}

impl FromStr for ArrangementPolicy {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contiguous" => Ok(Self::Contiguous),
            "interleaved" => Ok(Self::Interleaved),
            "random" => Ok(Self::Random),
            _ => Err(HarnessError::Spec(format!("unknown arrangement `{s}`"))),
        }
    }
}

impl ArrangementPolicy {
    pub fn resolve(self, seed: u64) -> Arrangement {
        match self {
            Self::Contiguous => Arrangement::Contiguous,
            Self::Interleaved => Arrangement::Interleaved,
            Self::Random => Arrangement::Random { seed },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Csi {
    Statistical,
    Instantaneous,
}

impl From<Csi> for CsiMode {
    fn from(c: Csi) -> Self {
        match c {
            Csi::Statistical => CsiMode::Statistical,
            Csi::Instantaneous => CsiMode::Instantaneous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmoConfig {
    pub max_iters: usize,
    pub initial_step: f64,
    pub gradient_tolerance: f64,
}

impl Default for RmoConfig {
    fn default() -> Self {
        let d = RmoSettings::new(Objective::Gain);
        Self {
            max_iters: d.max_iters,
            initial_step: d.initial_step,
            gradient_tolerance: d.gradient_tolerance,
        }
    }
}

impl RmoConfig {
    pub fn settings(&self, objective: Objective) -> RmoSettings {
        RmoSettings {
            max_iters: self.max_iters,
            step_rule: StepRule::Backtracking,
            initial_step: self.initial_step,
            gradient_tolerance: self.gradient_tolerance,
            objective,
        }
    }
}

/// Full description of a Monte Carlo run. K and SNR are in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub task: Task,
    pub n_ris: Vec<usize>,
    pub n_t: usize,
    pub n_r: usize,
    /// Sweep of `(K_T, K_R)` pairs in dB; `-inf` is Rayleigh, `inf` pure LoS.
    pub k_db: Vec<(f64, f64)>,
    pub snr_db: f64,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub arrangement: ArrangementPolicy,
    pub csi: Csi,
    pub rmo: RmoConfig,
    pub out: Option<PathBuf>,
}

/// One point of the `k_db × n_ris` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub n_ris: usize,
    pub k_t_db: f64,
    pub k_r_db: f64,
}

impl GridPoint {
    pub fn k_t(&self) -> f64 {
        db_to_linear(self.k_t_db)
    }

    pub fn k_r(&self) -> f64 {
        db_to_linear(self.k_r_db)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl ExperimentSpec {
    /// Desk-scale defaults of a preset; `scale` multiplies every RIS size.
    pub fn preset(preset: Preset, scale: f64) -> Self {
        let base = Self::preset_grid(preset, false);
        base.scaled(scale)
    }

    /// The grid of the original figure or table (slow).
    pub fn paper_scale(preset: Preset) -> Self {
        Self::preset_grid(preset, true)
    }

    fn preset_grid(preset: Preset, paper: bool) -> Self {
        let mut spec = Self {
            preset,
            task: Task::Gain,
            n_ris: vec![1024],
            n_t: 16,
            n_r: 16,
            k_db: vec![(0.0, 0.0)],
            snr_db: 10.0,
            trials: 50,
            seed: 1,
            methods: vec![Method::Sa, Method::Rmo, Method::Lb],
            arrangement: ArrangementPolicy::Contiguous,
            csi: Csi::Statistical,
            rmo: RmoConfig::default(),
            out: None,
        };
        let p = |desk: f64, full: f64| if paper { full } else { desk };
        match preset {
            Preset::Fig1a => {
                spec.task = Task::EigenProfile;
                spec.n_ris = vec![p(2000.0, 1e4) as usize];
                spec.n_t = p(20.0, 100.0) as usize;
                spec.k_db = vec![(10.0, 10.0)];
                spec.trials = 1;
            }
            Preset::Fig1b => {
                spec.task = Task::SpectrumNmse;
                spec.n_ris = if paper { vec![1000, 2500, 5000, 10_000] } else { vec![500, 1000, 2000] };
                spec.n_t = p(20.0, 100.0) as usize;
                spec.k_db = vec![(10.0, 10.0)];
                spec.trials = p(50.0, 200.0) as usize;
            }
            Preset::Fig1c => {
                spec.task = Task::PrincipalNmse;
                spec.n_ris = vec![p(2000.0, 1e4) as usize];
                spec.n_t = p(20.0, 100.0) as usize;
                // from K = 1/N_T upwards in 5 dB steps
                let start = linear_to_db(1.0 / spec.n_t as f64);
                spec.k_db = (0..9).map(|i| start + 5.0 * i as f64).map(|k| (k, k)).collect();
                spec.trials = p(50.0, 200.0) as usize;
            }
            Preset::Fig2a => {
                spec.task = Task::CapacityApprox;
                let n = p(8.0, 16.0) as usize;
                spec.n_t = n;
                spec.n_r = n;
                let cube = n * n * n;
                spec.n_ris = if paper {
                    (0..10).map(|i| (1 + 10 * i) * cube).collect()
                } else {
                    [1, 4, 16].iter().map(|m| m * cube).collect()
                };
                spec.methods = vec![];
                spec.trials = p(50.0, 200.0) as usize;
            }
            Preset::Fig2b => {
                spec.task = Task::Gain;
                let n = p(16.0, 100.0) as usize;
                spec.n_t = n;
                spec.n_r = n;
                spec.n_ris = if paper { vec![1000, 2500, 5000, 7500, 10_000] } else { vec![1024, 4096] };
                spec.k_db = vec![(-10.0, -10.0), (0.0, 0.0), (10.0, 10.0)];
                spec.trials = p(50.0, 200.0) as usize;
            }
            Preset::Fig2c => {
                spec.task = Task::Capacity;
                spec.n_t = 10;
                spec.n_r = 10;
                spec.n_ris = if paper { vec![1000, 5000, 10_000, 20_000, 30_000] } else { vec![1000, 5000, 20_000] };
                spec.methods = vec![Method::Wsa, Method::Rmo, Method::RmoSurrogate, Method::Lb];
                spec.trials = p(10.0, 200.0) as usize;
            }
            Preset::RuntimeGain => {
                spec.task = Task::Gain;
                let n = p(16.0, 100.0) as usize;
                spec.n_t = n;
                spec.n_r = n;
                spec.n_ris = if paper { vec![2000, 4000, 6000, 8000, 10_000] } else { vec![2000, 4000, 8000] };
                spec.methods = vec![Method::Sa, Method::Rmo];
                spec.trials = 1;
            }
            Preset::RuntimeCapacity => {
                spec.task = Task::Capacity;
                spec.n_t = 10;
                spec.n_r = 10;
                spec.n_ris = if paper { vec![1000, 2000, 5000, 10_000, 20_000] } else { vec![1000, 2000, 5000] };
                spec.methods = vec![Method::Wsa, Method::Rmo, Method::RmoSurrogate];
                spec.trials = 1;
            }
            Preset::Custom => {}
        }
        spec
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        if scale != 1.0 {
            for n in &mut self.n_ris {
                *n = ((*n as f64 * scale).round() as usize).max(1);
            }
        }
        self
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Spec(m));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.n_ris.is_empty() || self.k_db.is_empty() {
            return fail("dimension and K-factor lists must be nonempty".into());
        }
        if self.n_ris.contains(&0) || self.n_t == 0 || self.n_r == 0 {
            return fail("array and surface sizes must be positive".into());
        }
        if self.k_db.iter().any(|(a, b)| a.is_nan() || b.is_nan()) {
            return fail("K-factors must not be NaN".into());
        }
        if !self.snr_db.is_finite() {
            return fail("SNR must be finite".into());
        }
        let needs_tall = matches!(self.task, Task::EigenProfile | Task::SpectrumNmse | Task::PrincipalNmse);
        if needs_tall && self.n_ris.iter().any(|&n| n < self.n_t) {
            return fail("spectral presets need N_S >= N_T".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.k_db.len() * self.n_ris.len());
        for &(k_t_db, k_r_db) in &self.k_db {
            for &n_ris in &self.n_ris {
                out.push(GridPoint {
                    index: out.len(),
                    n_ris,
                    k_t_db,
                    k_r_db,
                });
            }
        }
        out
    }

    pub fn has(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    pub fn snr(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    /// `K ≥ 10/N_x` on every link the task uses.
    pub fn k_regime(&self, point: &GridPoint) -> bool {
        let ok_t = point.k_t() >= 10.0 / self.n_t as f64;
        let ok_r = point.k_r() >= 10.0 / self.n_r as f64;
        match self.task {
            Task::EigenProfile | Task::SpectrumNmse | Task::PrincipalNmse => ok_t,
            _ => ok_t && ok_r,
        }
    }

    /// `√N_S ≥ 10·N_min·√N_max`.
    pub fn size_regime(&self, point: &GridPoint) -> bool {
        let (lo, hi) = (self.n_t.min(self.n_r) as f64, self.n_t.max(self.n_r) as f64);
        (point.n_ris as f64).sqrt() >= 10.0 * lo * hi.sqrt()
    }
}
