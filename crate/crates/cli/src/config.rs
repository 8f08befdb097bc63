//! Effective configuration: command-line flags over the TOML file over
//! built-in defaults.

use anyhow::{Context, Result};
use enose_core::data::SynthConfig;
use enose_core::pipeline::{PcaFitScope, PipelineConfig, SpreadChoice};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Contents of a `--config` file. Both tables are optional and take the
/// field names of [`SynthConfig`] and [`PipelineConfig`].
///
/// ```toml
/// [synth]
/// noise_sigma = 0.2
///
/// [pipeline]
/// n_repetitions = 20
/// spread = { fixed = 0.08 }
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub synth: SynthConfig,
    pub pipeline: PipelineConfig,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct Common {
    /// TOML file with optional `synth` and `pipeline` tables
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Master seed for data generation, splits and repetitions
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// PNN spread factor
    #[arg(long, global = true)]
    pub spread: Option<f64>,

    /// Number of repetitions
    #[arg(long, global = true)]
    pub reps: Option<usize>,

    /// Class treated as ambient air in fire/no-fire metrics
    #[arg(long, global = true, value_name = "NAME")]
    pub negative_class: Option<String>,

    /// Rows used to fit PCA: train or all
    #[arg(long = "pca-fit", global = true, value_name = "SCOPE")]
    pub pca_fit: Option<PcaFitScope>,

    /// Output path (a directory or a file, depending on the subcommand)
    #[arg(short = 'o', long = "output", global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

pub struct Effective {
    pub synth: SynthConfig,
    pub pipeline: PipelineConfig,
}

impl Common {
    pub fn resolve(&self) -> Result<Effective> {
        let FileConfig {
            mut synth,
            mut pipeline,
        } = FileConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            synth.seed = seed;
            pipeline.master_seed = seed;
        }
        if let Some(spread) = self.spread {
            pipeline.spread = SpreadChoice::Fixed(spread);
        }
        if let Some(reps) = self.reps {
            pipeline.n_repetitions = reps;
        }
        if let Some(scope) = self.pca_fit {
            pipeline.pca_fit_scope = scope;
        }
        Ok(Effective { synth, pipeline })
    }
}
