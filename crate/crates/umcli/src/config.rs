//! TOML configuration files.
//!
//! A file is either a bare topology
//!
//! ```toml
//! levels = 2
//! branching = [3, 3]
//! sigmas = [1.0, 1.0]
//! base_mean = 0.0          # optional
//! ```
//!
//! or an experiment, which nests the topology in a `[topology]` table:
//!
//! ```toml
//! dimensions = [5, 10, 15, 30, 100, 1000, 10000]
//! seeds = [1, 2, 3, 4, 5]
//! outputs = "out/sweep"
//!
//! [topology]
//! levels = 3
//! branching = [3, 3, 3]
//! sigmas = [1.0, 1.0, 1.0]
//!
//! [index_mode]
//! mode = "sampled"
//! sample_count = 2000
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use ultragen::TreeTopology;

pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexModeConfig {
    Exact {},
    Sampled { sample_count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TreeTopology,
    pub dimensions: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default)]
    pub index_mode: IndexModeConfig,
}

impl Default for IndexModeConfig {
    fn default() -> Self {
        IndexModeConfig::Exact {}
    }
}

fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.to_vec()
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(
        topology: TreeTopology,
        dimensions: Vec<usize>,
        seeds: Vec<u64>,
        outputs: impl Into<PathBuf>,
    ) -> Result<Self> {
        let mut c = ExperimentConfig {
            topology,
            dimensions,
            seeds,
            outputs: outputs.into(),
            index_mode: IndexModeConfig::Exact {},
        };
        c.normalize()?;
        Ok(c)
    }

    /// Sorts and deduplicates dimensions and checks the config invariants.
    pub fn normalize(&mut self) -> Result<()> {
        self.dimensions.sort_unstable();
        self.dimensions.dedup();
        if self.dimensions.is_empty() {
            bail!("`dimensions` must not be empty");
        }
        if self.dimensions[0] == 0 {
            bail!("every dimension must be >= 1");
        }
        if self.seeds.is_empty() {
            bail!("`seeds` must not be empty");
        }
        if let IndexModeConfig::Sampled { sample_count } = self.index_mode {
            if sample_count < ultragen::indexes::MIN_SAMPLES {
                bail!(
                    "sample_count must be >= {}, got {sample_count}",
                    ultragen::indexes::MIN_SAMPLES
                );
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedConfig {
    Topology(TreeTopology),
    Experiment(ExperimentConfig),
}

impl LoadedConfig {
    pub fn topology(&self) -> &TreeTopology {
        match self {
            LoadedConfig::Topology(t) => t,
            LoadedConfig::Experiment(e) => &e.topology,
        }
    }
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let table: toml::Table = toml::from_str(text)?;
    if table.contains_key("topology") {
        let mut e: ExperimentConfig = table.try_into()?;
        e.normalize()?;
        Ok(LoadedConfig::Experiment(e))
    } else {
        Ok(LoadedConfig::Topology(table.try_into()?))
    }
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("parsing {}", path.display()))
}
