//! Experiment description, assembled from an optional TOML config file and
//! command-line flags (flags win).
//!
//! Config file keys (all optional):
//!
//! ```toml
//! scenario = "overlapping"        # or: data = "sample.csv"
//! n = 300
//! seeds = [1, 2, 3]               # `seed = 7` is accepted too
//! algorithms = ["em", "cemm", "sage"]
//! init = "explicit"               # or "moment"
//! components = 3                  # moment init only
//! init_p = [0.3333, 0.3333, 0.3334]
//! init_mu = [0.0, 0.1, 0.2]
//! init_var = [1.0, 1.0, 1.0]
//! tol = 1e-8
//! max_cycles = 1000
//! variance_floor = 1e-6           # absent: 1e-6 · trace(S)/d
//! out = "results"
//! ```

use std::path::{Path, PathBuf};

use cemm::{Algorithm, MixtureParams, RunConfig, ScenarioName};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub data: Option<PathBuf>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub algorithm: Option<String>,
    pub algorithms: Option<Vec<String>>,
    pub init: Option<String>,
    pub components: Option<usize>,
    pub init_p: Option<Vec<f64>>,
    pub init_mu: Option<Vec<f64>>,
    pub init_var: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub max_cycles: Option<usize>,
    pub variance_floor: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
    }

    /// Values of `overrides` replace those of `self` field by field.
    pub fn merged_with(self, overrides: FileConfig) -> FileConfig {
        FileConfig {
            scenario: overrides.scenario.or(self.scenario),
            data: overrides.data.or(self.data),
            n: overrides.n.or(self.n),
            seed: overrides.seed.or(self.seed),
            seeds: overrides.seeds.or(self.seeds),
            algorithm: overrides.algorithm.or(self.algorithm),
            algorithms: overrides.algorithms.or(self.algorithms),
            init: overrides.init.or(self.init),
            components: overrides.components.or(self.components),
            init_p: overrides.init_p.or(self.init_p),
            init_mu: overrides.init_mu.or(self.init_mu),
            init_var: overrides.init_var.or(self.init_var),
            tol: overrides.tol.or(self.tol),
            max_cycles: overrides.max_cycles.or(self.max_cycles),
            variance_floor: overrides.variance_floor.or(self.variance_floor),
            out: overrides.out.or(self.out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Scenario {
        name: ScenarioName,
        n: usize,
        seeds: Vec<u64>,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Moment { components: usize },
    Explicit(MixtureParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub algorithms: Vec<Algorithm>,
    pub init: InitSpec,
    pub tol: f64,
    pub max_cycles: usize,
    pub variance_floor: Option<f64>,
    pub out: PathBuf,
}

impl ExperimentSpec {
    pub fn run_config(&self, algorithm: Algorithm) -> RunConfig {
        RunConfig {
            algorithm,
            tol: self.tol,
            max_cycles: self.max_cycles,
            variance_floor: self.variance_floor,
            record_params: false,
        }
    }

    /// Builds and validates an experiment from merged settings.
    pub fn from_config(cfg: &FileConfig) -> Result<Self, HarnessError> {
        let source = match (&cfg.scenario, &cfg.data) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Usage(
                    "give either a scenario or a data file, not both".into(),
                ))
            }
            (None, Some(path)) => DataSource::File(path.clone()),
            (Some(name), None) => {
                let name: ScenarioName = name.parse()?;
                let seeds = match (&cfg.seeds, cfg.seed) {
                    (Some(seeds), _) => seeds.clone(),
                    (None, Some(seed)) => vec![seed],
                    (None, None) => vec![1],
                };
                if seeds.is_empty() {
                    return Err(HarnessError::Usage("seed list is empty".into()));
                }
                let n = cfg.n.unwrap_or(300);
                if n == 0 {
                    return Err(HarnessError::Usage("n must be >= 1".into()));
                }
                DataSource::Scenario { name, n, seeds }
            }
            (None, None) => {
                return Err(HarnessError::Usage(
                    "a scenario (--scenario) or a data file (--data) is required".into(),
                ))
            }
        };

        let names: Vec<String> = match (&cfg.algorithms, &cfg.algorithm) {
            (Some(list), _) => list.clone(),
            (None, Some(one)) => vec![one.clone()],
            (None, None) => vec!["em".into()],
        };
        let mut algorithms = Vec::with_capacity(names.len());
        for name in &names {
            let algorithm: Algorithm = name.parse()?;
            if !algorithms.contains(&algorithm) {
                algorithms.push(algorithm);
            }
        }
        if algorithms.is_empty() {
            return Err(HarnessError::Usage(
                "at least one algorithm is required".into(),
            ));
        }

        let init = match cfg.init.as_deref().unwrap_or("moment") {
            "moment" => InitSpec::Moment {
                components: cfg.components.unwrap_or(3),
            },
            "explicit" => {
                let mu = cfg.init_mu.clone().ok_or_else(|| {
                    HarnessError::Usage("explicit init requires init_mu (--init-mu)".into())
                })?;
                let k = mu.len();
                let var = cfg.init_var.clone().unwrap_or_else(|| vec![1.0; k]);
                let p = cfg.init_p.clone().unwrap_or_else(|| uniform_proportions(k));
                InitSpec::Explicit(MixtureParams::univariate(&p, &mu, &var)?)
            }
            other => {
                return Err(HarnessError::Usage(format!(
                    "unknown init `{other}` (expected moment or explicit)"
                )))
            }
        };
        if let InitSpec::Moment { components: 0 } = init {
            return Err(HarnessError::Usage("components must be >= 1".into()));
        }

        let spec = ExperimentSpec {
            source,
            algorithms,
            init,
            tol: cfg.tol.unwrap_or(1e-8),
            max_cycles: cfg.max_cycles.unwrap_or(1000),
            variance_floor: cfg.variance_floor,
            out: cfg.out.clone().unwrap_or_else(|| PathBuf::from("results")),
        };
        spec.run_config(Algorithm::Em).validate()?;
        Ok(spec)
    }
}

/// `1/J` each, with the last entry absorbing rounding so the sum is exactly 1.
pub fn uniform_proportions(k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let mut p = vec![1.0 / k as f64; k];
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

/// Parses `1,2,5-8` into `[1, 2, 5, 6, 7, 8]`.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>, HarnessError> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || HarnessError::Usage(format!("invalid seed entry `{part}`"));
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
                if hi < lo {
                    return Err(bad());
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(HarnessError::Usage("seed list is empty".into()));
    }
    Ok(seeds)
}
