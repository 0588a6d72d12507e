//! Job configuration (JSON).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use switchsynth_core::{HarmonicPair, LogBase, Mat2, Partition, Plant, SearchParams};

use crate::Error;

/// Environment variable that overrides `output_dir`.
pub const OUT_ENV: &str = "SWITCHSYNTH_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub plant: PlantSpec,
    #[serde(default = "default_sensor")]
    pub c: [f64; 2],
    pub n: Sweep,
    /// Gain used in synthesis; defaults to the computed bound.
    #[serde(default)]
    pub gamma0: Option<f64>,
    #[serde(default)]
    pub log_base: Base,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default)]
    pub simulation: SimSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_sensor() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantSpec {
    /// Mode 0 is the unit oscillator, mode 1 is `x'' = k0 x`.
    Harmonic {
        k0: f64,
        #[serde(default)]
        sampling: Sampling,
    },
    /// Explicit sampled mode matrices, row-major.
    Matrices { a0: [[f64; 2]; 2], a1: [[f64; 2]; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `T = pi / n`.
    #[default]
    PiOverN,
    Period(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    One(usize),
    Many(Vec<usize>),
}

impl Sweep {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Sweep::One(n) => vec![*n],
            Sweep::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Base {
    #[default]
    #[serde(rename = "e")]
    E,
    #[serde(rename = "10")]
    Ten,
}

impl From<Base> for LogBase {
    fn from(b: Base) -> Self {
        match b {
            Base::E => LogBase::E,
            Base::Ten => LogBase::Ten,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpec {
    pub tau_exp_min: f64,
    pub tau_exp_max: f64,
    pub tau_exp_step: f64,
    pub r_tol: f64,
    pub vi_tol: f64,
    pub max_iter: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        let p = SearchParams::default();
        SearchSpec {
            tau_exp_min: p.tau_exp_min,
            tau_exp_max: p.tau_exp_max,
            tau_exp_step: p.tau_exp_step,
            r_tol: p.r_tol,
            vi_tol: p.vi_tol,
            max_iter: p.max_iter,
        }
    }
}

impl SearchSpec {
    pub fn params(&self) -> SearchParams {
        SearchParams {
            tau_exp_min: self.tau_exp_min,
            tau_exp_max: self.tau_exp_max,
            tau_exp_step: self.tau_exp_step,
            r_tol: self.r_tol,
            vi_tol: self.vi_tol,
            max_iter: self.max_iter,
            ..SearchParams::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    /// Explicit initial states.
    pub x0: Vec<[f64; 2]>,
    /// Additional random unit-norm initial states.
    pub random_x0: usize,
    pub seed: u64,
    pub horizon: usize,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec { x0: vec![[1.0, 0.0]], random_x0: 0, seed: 0, horizon: 2000 }
    }
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let cfg: JobConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let ns = self.n.values();
        if ns.is_empty() || ns.contains(&0) {
            return bad("n must be a positive integer or a nonempty list of them");
        }
        if self.c.iter().any(|v| !v.is_finite()) || self.c == [0.0, 0.0] {
            return bad("c must be a finite nonzero 2-vector");
        }
        match &self.plant {
            PlantSpec::Harmonic { k0, sampling } => {
                if !k0.is_finite() || *k0 == -1.0 {
                    return bad("k0 must be finite and differ from -1");
                }
                if let Sampling::Period(t) = sampling {
                    if !(t.is_finite() && *t > 0.0) {
                        return bad("sampling period must be positive");
                    }
                }
            }
            PlantSpec::Matrices { a0, a1 } => {
                if a0.iter().chain(a1).flatten().any(|v| !v.is_finite()) {
                    return bad("mode matrices must be finite");
                }
            }
        }
        if let Some(g) = self.gamma0 {
            if !(0.0..=1.0).contains(&g) {
                return bad("gamma0 must lie in [0, 1]");
            }
        }
        let s = &self.search;
        if !(s.tau_exp_step > 0.0 && s.tau_exp_min <= s.tau_exp_max && s.r_tol > 0.0 && s.vi_tol > 0.0 && s.max_iter > 0) {
            return bad("search parameters out of range");
        }
        if self.simulation.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if self.simulation.x0.iter().any(|x| x == &[0.0, 0.0] || x.iter().any(|v| !v.is_finite())) {
            return bad("initial states must be finite and nonzero");
        }
        Ok(())
    }

    /// Sampling period for partition size `n`, when defined.
    pub fn period(&self, n: usize) -> Option<f64> {
        match &self.plant {
            PlantSpec::Harmonic { sampling: Sampling::PiOverN, .. } => Some(PI / n as f64),
            PlantSpec::Harmonic { sampling: Sampling::Period(t), .. } => Some(*t),
            PlantSpec::Matrices { .. } => None,
        }
    }

    pub fn plant(&self, n: usize) -> Result<Plant, Error> {
        let plant = match &self.plant {
            PlantSpec::Harmonic { k0, .. } => {
                let period = self.period(n).unwrap_or(PI / n as f64);
                HarmonicPair::new(*k0, period)?.plant(self.c)?
            }
            PlantSpec::Matrices { a0, a1 } => Plant::linear(Mat2(*a0), Mat2(*a1), self.c)?,
        };
        Ok(plant.with_log_base(self.log_base.into()))
    }

    pub fn partition(&self, n: usize) -> Result<Partition, Error> {
        Ok(Partition::uniform(self.c, n)?)
    }

    /// `SWITCHSYNTH_OUT`, then `output_dir`, then `switchsynth-out`.
    pub fn resolve_output_dir(&self) -> PathBuf {
        output_dir_override().or_else(|| self.output_dir.clone()).unwrap_or_else(|| PathBuf::from("switchsynth-out"))
    }
}

pub fn output_dir_override() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_defaults() {
        let cfg: JobConfig = serde_json::from_str(r#"{"plant":{"kind":"harmonic","k0":-3},"n":[5,10]}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.n.values(), vec![5, 10]);
        assert_eq!(cfg.c, [1.0, 0.0]);
        assert_eq!(cfg.period(5), Some(PI / 5.0));
        assert_eq!(cfg.simulation.horizon, 2000);
        assert_eq!(cfg.search.params(), SearchParams::default());
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"plant":{"kind":"harmonic","k0":-1},"n":5}"#,
            r#"{"plant":{"kind":"harmonic","k0":2},"n":0}"#,
            r#"{"plant":{"kind":"harmonic","k0":2},"n":[]}"#,
            r#"{"plant":{"kind":"harmonic","k0":2},"n":5,"gamma0":1.5}"#,
            r#"{"plant":{"kind":"harmonic","k0":2,"sampling":{"period":-1}},"n":5}"#,
            r#"{"plant":{"kind":"harmonic","k0":2},"n":5,"simulation":{"horizon":0}}"#,
            r#"{"plant":{"kind":"harmonic","k0":2},"n":5,"c":[0,0]}"#,
        ] {
            let cfg: JobConfig = serde_json::from_str(text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
        assert!(serde_json::from_str::<JobConfig>(r#"{"plant":{"kind":"harmonic","k0":2},"n":5,"bogus":1}"#).is_err());
    }

    #[test]
    fn explicit_matrices() {
        let cfg: JobConfig = serde_json::from_str(
            r#"{"plant":{"kind":"matrices","a0":[[0,1],[-1,0]],"a1":[[1,0.5],[0,0.5]]},"n":4,"log_base":"10"}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.period(4), None);
        assert_eq!(cfg.plant(4).unwrap().log_base(), LogBase::Ten);
    }
}
