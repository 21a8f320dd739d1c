//! TOML configuration files and flag overrides.
//!
//! ```toml
//! preset = "fig2b"
//! seed = 7
//! trials = 20
//! snr_db = 10.0
//! methods = ["sa", "rmo", "lb"]
//!
//! [dims]
//! n_ris = [1024, 4096]
//! n_t = 16
//! n_r = 16
//!
//! [k]
//! k_db = [0.0]          # one value for both links, or [K_T, K_R]
//!
//! [rmo]
//! max_iters = 500
//! ```
//!
//! Values are layered: preset defaults, then the file, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::spec::{ArrangementPolicy, Csi, ExperimentSpec, Method, Preset};
use crate::HarnessError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsSection {
    pub n_ris: Option<Vec<usize>>,
    pub n_t: Option<usize>,
    pub n_r: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSection {
    /// One value (both links) or two (`K_T`, `K_R`), in dB.
    pub k_db: Option<Vec<f64>>,
    /// Symmetric sweep, in dB.
    pub sweep_db: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmoSection {
    pub max_iters: Option<usize>,
    pub initial_step: Option<f64>,
    pub gradient_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub scale: Option<f64>,
    pub paper: Option<bool>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub snr_db: Option<f64>,
    pub methods: Option<Vec<Method>>,
    pub arrangement: Option<ArrangementPolicy>,
    pub csi: Option<Csi>,
    #[serde(default)]
    pub dims: DimsSection,
    #[serde(default)]
    pub k: KSection,
    #[serde(default)]
    pub rmo: RmoSection,
}

macro_rules! take {
    ($hi:expr, $lo:expr, $($f:ident).+) => {
        $hi.$($f).+.clone().or_else(|| $lo.$($f).+.clone())
    };
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Field-wise layering; values in `self` win over `lower`.
    pub fn over(&self, lower: &Overrides) -> Overrides {
        Overrides {
            preset: take!(self, lower, preset),
            seed: take!(self, lower, seed),
            trials: take!(self, lower, trials),
            scale: take!(self, lower, scale),
            paper: take!(self, lower, paper),
            threads: take!(self, lower, threads),
            out: take!(self, lower, out),
            snr_db: take!(self, lower, snr_db),
            methods: take!(self, lower, methods),
            arrangement: take!(self, lower, arrangement),
            csi: take!(self, lower, csi),
            dims: DimsSection {
                n_ris: take!(self, lower, dims.n_ris),
                n_t: take!(self, lower, dims.n_t),
                n_r: take!(self, lower, dims.n_r),
            },
            k: KSection {
                // a flag-level K choice replaces both file-level forms
                k_db: if self.k.sweep_db.is_some() { self.k.k_db.clone() } else { take!(self, lower, k.k_db) },
                sweep_db: if self.k.k_db.is_some() { self.k.sweep_db.clone() } else { take!(self, lower, k.sweep_db) },
            },
            rmo: RmoSection {
                max_iters: take!(self, lower, rmo.max_iters),
                initial_step: take!(self, lower, rmo.initial_step),
                gradient_tolerance: take!(self, lower, rmo.gradient_tolerance),
            },
        }
    }

    /// Builds the experiment for `preset` (or the configured preset) and applies
    /// every set field.
    pub fn build(&self, default_preset: Preset) -> Result<ExperimentSpec, HarnessError> {
        let preset = self.preset.unwrap_or(default_preset);
        if self.paper == Some(true) && self.scale.is_some() {
            return Err(HarnessError::Spec("`paper` and `scale` are mutually exclusive".into()));
        }
        let mut spec = if self.paper == Some(true) {
            ExperimentSpec::paper_scale(preset)
        } else {
            let scale = self.scale.unwrap_or(1.0);
            if !(scale.is_finite() && scale > 0.0) {
                return Err(HarnessError::Spec(format!("scale must be positive, got {scale}")));
            }
            ExperimentSpec::preset(preset, scale)
        };
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if let Some(v) = self.snr_db {
            spec.snr_db = v;
        }
        if let Some(v) = &self.methods {
            spec.methods = v.clone();
        }
        if let Some(v) = self.arrangement {
            spec.arrangement = v;
        }
        if let Some(v) = self.csi {
            spec.csi = v;
        }
        if let Some(v) = &self.out {
            spec.out = Some(v.clone());
        }
        if let Some(v) = &self.dims.n_ris {
            spec.n_ris = v.clone();
        }
        if let Some(v) = self.dims.n_t {
            spec.n_t = v;
        }
        if let Some(v) = self.dims.n_r {
            spec.n_r = v;
        }
        match (&self.k.k_db, &self.k.sweep_db) {
            (Some(_), Some(_)) => return Err(HarnessError::Spec("give either k_db or sweep_db, not both".into())),
            (Some(k), None) => {
                spec.k_db = match k.as_slice() {
                    [k] => vec![(*k, *k)],
                    [kt, kr] => vec![(*kt, *kr)],
                    _ => return Err(HarnessError::Spec(format!("k_db takes one or two values, got {}", k.len()))),
                };
            }
            (None, Some(sweep)) => spec.k_db = sweep.iter().map(|&k| (k, k)).collect(),
            (None, None) => {}
        }
        if let Some(v) = self.rmo.max_iters {
            spec.rmo.max_iters = v;
        }
        if let Some(v) = self.rmo.initial_step {
            spec.rmo.initial_step = v;
        }
        if let Some(v) = self.rmo.gradient_tolerance {
            spec.rmo.gradient_tolerance = v;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let o = Overrides::from_toml(
            r#"
            preset = "fig2b"
            seed = 7
            trials = 20
            snr_db = 10.0
            methods = ["sa", "rmo", "lb"]
            [dims]
            n_ris = [1024, 4096]
            n_t = 16
            n_r = 16
            [k]
            k_db = [0.0]
            [rmo]
            max_iters = 500
            "#,
        )
        .unwrap();
        let spec = o.build(Preset::Custom).unwrap();
        assert_eq!(spec.preset, Preset::Fig2b);
        assert_eq!(spec.k_db, vec![(0.0, 0.0)]);
        assert_eq!(spec.trials, 20);
        assert_eq!(spec.methods, vec![Method::Sa, Method::Rmo, Method::Lb]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(Overrides::from_toml("seeed = 3"), Err(HarnessError::Config(_))));
        assert!(Overrides::from_toml("[dims]\nn_s = [3]").is_err());
        assert!(Overrides::from_toml("methods = [\"magic\"]").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = Overrides::from_toml("seed = 3\ntrials = 9\n[k]\nsweep_db = [0.0, 10.0]").unwrap();
        let flags = Overrides {
            seed: Some(11),
            k: KSection {
                k_db: Some(vec![3.0, 6.0]),
                sweep_db: None,
            },
            ..Default::default()
        };
        let spec = flags.over(&file).build(Preset::Custom).unwrap();
        assert_eq!(spec.seed, 11);
        assert_eq!(spec.trials, 9);
        assert_eq!(spec.k_db, vec![(3.0, 6.0)]);
    }

    #[test]
    fn conflicting_values_rejected() {
        let o = Overrides {
            paper: Some(true),
            scale: Some(0.5),
            ..Default::default()
        };
        assert!(o.build(Preset::Fig1c).is_err());
        let o = Overrides {
            k: KSection {
                k_db: Some(vec![1.0, 2.0, 3.0]),
                sweep_db: None,
            },
            ..Default::default()
        };
        assert!(o.build(Preset::Custom).is_err());
    }
}
