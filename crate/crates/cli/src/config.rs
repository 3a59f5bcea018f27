//! Run configuration: TOML file, then command-line flags on top.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bvpain_core::features::FeatureConfig;
use bvpain_core::synth::SynthConfig;
use bvpain_eval::{StudyConfig, Task};
use bvpain_learn::Family;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortConfig {
    pub n_subjects: usize,
}

impl Default for CohortConfig {
    fn default() -> Self {
        Self { n_subjects: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceConfig {
    pub n_trees: usize,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        Self { n_trees: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub features: Vec<String>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            features: vec!["rr_mean_ms".into()],
        }
    }
}

/// Everything a command can be told. `seed` is the master seed: it seeds
/// the cohort, the splits and the models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// A task name such as `NP-HP`, `LP-MP-HP` or `regression`, or `all`.
    pub task: String,
    pub model: String,
    pub paths: Paths,
    pub cohort: CohortConfig,
    pub synth: SynthConfig,
    pub features: FeatureConfig,
    pub study: StudyConfig,
    pub importance: ImportanceConfig,
    pub stats: StatsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            task: "LP-MP-HP".into(),
            model: "gbt".into(),
            paths: Paths {
                out_dir: PathBuf::from("out"),
                ..Default::default()
            },
            cohort: CohortConfig::default(),
            synth: SynthConfig::default(),
            features: FeatureConfig::default(),
            study: StudyConfig::default(),
            importance: ImportanceConfig::default(),
            stats: StatsConfig::default(),
        }
    }
}

/// Values given on the command line; `None` leaves the file or default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub task: Option<String>,
    pub model: Option<String>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Failure::Usage(format!("config: {e}")).into())
    }

    pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Self::from_toml(&text).with_context(|| format!("in {}", p.display()))?
            }
            None => Self::default(),
        };
        if let Some(s) = flags.seed {
            cfg.seed = s;
        }
        if let Some(t) = &flags.task {
            cfg.task = t.clone();
        }
        if let Some(m) = &flags.model {
            cfg.model = m.clone();
        }
        if let Some(o) = &flags.out {
            cfg.paths.out_dir = o.clone();
        }
        cfg.study.cv.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every section before any work is done.
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| -> anyhow::Error { Failure::Usage(m).into() };
        self.tasks()?;
        self.family()?;
        self.features.validate().map_err(|e| usage(e.to_string()))?;
        self.synth.validate().map_err(|e| usage(e.to_string()))?;
        self.study.validate().map_err(|e| usage(e.to_string()))?;
        if self.cohort.n_subjects == 0 {
            return Err(usage("cohort.n_subjects must be at least 1".into()));
        }
        if self.importance.n_trees == 0 {
            return Err(usage("importance.n_trees must be at least 1".into()));
        }
        if (self.synth.epoch_len_s - self.features.epoch_len_s).abs() > 1e-9 {
            return Err(usage(format!(
                "synth.epoch_len_s ({}) and features.epoch_len_s ({}) differ",
                self.synth.epoch_len_s, self.features.epoch_len_s
            )));
        }
        Ok(())
    }

    pub fn tasks(&self) -> Result<Vec<Task>> {
        if self.task.eq_ignore_ascii_case("all") {
            return Ok(Task::all());
        }
        let t = self
            .task
            .parse()
            .map_err(|_| Failure::Usage(format!("unknown task '{}'", self.task)))?;
        Ok(vec![t])
    }

    pub fn family(&self) -> Result<Family> {
        self.model
            .parse()
            .map_err(|_| Failure::Usage(format!("unknown model '{}'", self.model)).into())
    }

    pub fn out_dir(&self) -> &Path {
        &self.paths.out_dir
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.paths
            .manifest
            .clone()
            .unwrap_or_else(|| self.out_dir().join("manifest.csv"))
    }

    pub fn features_path(&self) -> PathBuf {
        self.paths
            .features
            .clone()
            .unwrap_or_else(|| self.out_dir().join("features.csv"))
    }

    /// The configuration as echoed into reports. Paths are left out so that
    /// the same run in another directory gives the same bytes.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(m) = v.as_object_mut() {
            m.remove("paths");
        }
        v
    }
}
