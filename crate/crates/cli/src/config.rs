//! Experiment configuration (TOML).
//!
//! ```toml
//! [prior]
//! kind = "lrgmm"          # lrgmm | sparse | box | file
//! d = 64
//! r = 5
//! k = 8
//! pi = "uniform"          # or an explicit list of k weights
//! # seed = 7              # fixed prior for all trials; per-trial when absent
//!
//! [sensing]
//! m = 20
//! mu = "auto"             # 1.9 / ‖A‖², or a number
//! # seed = 3              # fixed A for all trials; per-trial when absent
//! # matrix = "a.txt"      # A from a model file instead
//!
//! [[schedule]]
//! kind = "geometric"      # geometric | linear | cosine | infinite_geometric
//! sigma_max = 0.5
//! sigma_min = 1e-4
//! horizon = 150
//! # ratio = 0.97          # infinite_geometric only
//!
//! [run]
//! n_iters = 150
//! trials = 20
//! base_seed = 1
//! # seeds = [1, 2, 3]     # explicit; overrides trials/base_seed
//! output = "out"
//! denoiser = "mmse"       # mmse | projection
//! ```
//!
//! `sparse` takes `d` and `s`; `box` takes `d`, `s` and `half_width`;
//! `file` takes `path` (a prior, union or box model file).

use std::path::{Path, PathBuf};

use projdiff::schedule::ScheduleKind;
use projdiff::NoiseSchedule;
use serde::{Deserialize, Serialize};

/// Ratio of the infinite geometric schedule when none is given.
pub const DEFAULT_INFINITE_RATIO: f64 = 0.97;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorConfig {
    Lrgmm {
        d: usize,
        r: usize,
        k: usize,
        #[serde(default)]
        pi: PiMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Sparse {
        d: usize,
        s: usize,
    },
    Box {
        d: usize,
        s: usize,
        #[serde(default = "one")]
        half_width: f64,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum PiMode {
    #[default]
    #[serde(with = "uniform_tag")]
    Uniform,
    Explicit(Vec<f64>),
}

mod uniform_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("uniform")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "uniform" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("pi must be \"uniform\" or a list of weights, got \"{s}\"")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum MuMode {
    #[default]
    #[serde(with = "auto_tag")]
    Auto,
    Explicit(f64),
}

mod auto_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("mu must be \"auto\" or a number, got \"{s}\"")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub mu: MuMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub sigma_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DenoiserMode {
    #[default]
    Mmse,
    /// The limiting metric projection (unions of subspaces only).
    Projection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub denoiser: DenoiserMode,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub prior: PriorConfig,
    pub sensing: SensingConfig,
    #[serde(rename = "schedule")]
    pub schedules: Vec<ScheduleConfig>,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl ScheduleConfig {
    pub fn build(&self) -> Result<NoiseSchedule<f64>, ConfigError> {
        let missing = |f: &str| ConfigError(format!("schedule '{}': missing field `{f}`", self.kind));
        let s = match self.kind {
            ScheduleKind::InfiniteGeometric => {
                NoiseSchedule::infinite_geometric(self.sigma_max, self.ratio.ok_or_else(|| missing("ratio"))?)
            }
            kind => NoiseSchedule::from_kind(
                kind,
                self.sigma_max,
                self.sigma_min.ok_or_else(|| missing("sigma_min"))?,
                self.horizon.ok_or_else(|| missing("horizon"))?,
                f64::NAN,
            ),
        };
        s.map_err(|e| ConfigError(format!("schedule '{}': {e}", self.kind)))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Fills defaults and makes every seed explicit, then validates.
    /// Relative model paths are resolved against `base_dir`.
    pub fn resolve(mut self, base_dir: Option<&Path>, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        if let Some(base) = seed_override {
            self.run.base_seed = Some(base);
            self.run.seeds = None;
        }
        let seeds = match (&self.run.seeds, self.run.trials) {
            (Some(s), _) if seed_override.is_none() => s.clone(),
            (_, trials) => {
                let base = self.run.base_seed.unwrap_or(0);
                (0..trials.unwrap_or(1) as u64).map(|i| base + i).collect()
            }
        };
        if seeds.is_empty() {
            return err("run: at least one trial is required");
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return err("run.seeds: trial seeds must be distinct");
        }
        self.run.trials = Some(seeds.len());
        self.run.base_seed = None;
        self.run.seeds = Some(seeds);

        for s in &mut self.schedules {
            if s.kind == ScheduleKind::InfiniteGeometric && s.ratio.is_none() {
                s.ratio = Some(DEFAULT_INFINITE_RATIO);
            }
        }
        if let Some(base) = base_dir {
            if let PriorConfig::File { path } = &mut self.prior {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            if let Some(path) = &mut self.sensing.matrix {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.prior {
            PriorConfig::Lrgmm { d, r, k, pi, .. } => {
                if *d == 0 || *r == 0 || r > d || *k == 0 {
                    return err(format!("prior: need 1 <= r <= d and k >= 1, got d={d} r={r} k={k}"));
                }
                if let PiMode::Explicit(w) = pi {
                    if w.len() != *k {
                        return err(format!("prior.pi: expected {k} weights, got {}", w.len()));
                    }
                }
            }
            PriorConfig::Sparse { d, s } => {
                if *s == 0 || s > d {
                    return err(format!("prior: need 1 <= s <= d, got d={d} s={s}"));
                }
            }
            PriorConfig::Box { d, s, half_width } => {
                if *s == 0 || s > d || !(*half_width > 0.0) {
                    return err(format!("prior: need 1 <= s <= d and half_width > 0, got d={d} s={s}"));
                }
                if self.run.denoiser == DenoiserMode::Projection {
                    return err("run.denoiser = \"projection\" needs a union-of-subspaces prior");
                }
            }
            PriorConfig::File { .. } => {}
        }
        if self.sensing.m.is_none() && self.sensing.matrix.is_none() {
            return err("sensing: one of `m` or `matrix` is required");
        }
        if self.sensing.m == Some(0) {
            return err("sensing.m must be positive");
        }
        if let MuMode::Explicit(mu) = self.sensing.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return err(format!("sensing.mu must be positive, got {mu}"));
            }
        }
        if self.schedules.is_empty() {
            return err("at least one [[schedule]] is required");
        }
        for s in &self.schedules {
            let built = s.build()?;
            if let Some(h) = built.horizon() {
                if self.run.n_iters > h {
                    return err(format!(
                        "run.n_iters = {} exceeds the horizon N = {h} of schedule '{}'",
                        self.run.n_iters, s.kind
                    ));
                }
            }
        }
        if self.run.n_iters == 0 {
            return err("run.n_iters must be positive");
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.run.seeds.clone().unwrap_or_default()
    }

    /// The four-schedule setup of the reference experiment: `d = 64`,
    /// `r = 5`, `K = 8`, `m = 20`, `σ ∈ [1e-4, 0.5]`, `N = 150`.
    pub fn reference(trials: usize, base_seed: u64, output: PathBuf) -> Self {
        let finite = |kind| ScheduleConfig {
            kind,
            sigma_max: 0.5,
            sigma_min: Some(1e-4),
            horizon: Some(150),
            ratio: None,
        };
        Self {
            prior: PriorConfig::Lrgmm {
                d: 64,
                r: 5,
                k: 8,
                pi: PiMode::Uniform,
                seed: None,
            },
            sensing: SensingConfig {
                m: Some(20),
                mu: MuMode::Auto,
                seed: None,
                matrix: None,
            },
            schedules: vec![
                finite(ScheduleKind::Geometric),
                finite(ScheduleKind::Linear),
                finite(ScheduleKind::Cosine),
                ScheduleConfig {
                    kind: ScheduleKind::InfiniteGeometric,
                    sigma_max: 0.5,
                    sigma_min: None,
                    horizon: None,
                    ratio: Some(DEFAULT_INFINITE_RATIO),
                },
            ],
            run: RunConfig {
                n_iters: 150,
                trials: Some(trials),
                base_seed: Some(base_seed),
                seeds: None,
                output,
                denoiser: DenoiserMode::Mmse,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[prior]
kind = "lrgmm"
d = 64
r = 5
k = 8

[sensing]
m = 20
mu = "auto"

[[schedule]]
kind = "geometric"
sigma_max = 0.5
sigma_min = 1e-4
horizon = 150

[[schedule]]
kind = "infinite_geometric"
sigma_max = 0.5

[run]
n_iters = 150
trials = 3
base_seed = 10
"#;

    #[test]
    fn resolve_writes_back_seeds_and_ratio() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap().resolve(None, None).unwrap();
        assert_eq!(c.seeds(), vec![10, 11, 12]);
        assert_eq!(c.schedules[1].ratio, Some(DEFAULT_INFINITE_RATIO));
        let o = ExperimentConfig::parse(SAMPLE).unwrap().resolve(None, Some(100)).unwrap();
        assert_eq!(o.seeds(), vec![100, 101, 102]);
    }

    #[test]
    fn round_trip_is_fixed_point() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap().resolve(None, None).unwrap();
        let text = c.to_toml();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.clone().resolve(None, None).unwrap(), c);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn explicit_modes_round_trip() {
        let text = SAMPLE
            .replace("k = 8", "k = 2\npi = [0.25, 0.75]\nseed = 4")
            .replace("mu = \"auto\"", "mu = 0.01");
        let c = ExperimentConfig::parse(&text).unwrap().resolve(None, None).unwrap();
        assert!(matches!(&c.prior, PriorConfig::Lrgmm { pi: PiMode::Explicit(w), seed: Some(4), .. } if w.len() == 2));
        assert_eq!(c.sensing.mu, MuMode::Explicit(0.01));
        assert_eq!(ExperimentConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_iters = SAMPLE.replace("n_iters = 150", "n_iters = 151");
        assert!(ExperimentConfig::parse(&bad_iters).unwrap().resolve(None, None).is_err());
        let unknown = SAMPLE.replace("m = 20", "m = 20\nbogus = 1");
        assert!(ExperimentConfig::parse(&unknown).is_err());
        let bad_pi = SAMPLE.replace("k = 8", "k = 8\npi = \"skewed\"");
        assert!(ExperimentConfig::parse(&bad_pi).is_err());
        let bad_mu = SAMPLE.replace("mu = \"auto\"", "mu = -1.0");
        assert!(ExperimentConfig::parse(&bad_mu).unwrap().resolve(None, None).is_err());
    }

    #[test]
    fn reference_config_is_valid() {
        let c = ExperimentConfig::reference(20, 1, "o".into()).resolve(None, None).unwrap();
        assert_eq!(c.seeds().len(), 20);
        assert_eq!(c.schedules.len(), 4);
    }
}
