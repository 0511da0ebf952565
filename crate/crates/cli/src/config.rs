//! TOML experiment configuration. Every table rejects unknown keys and every
//! key has a default, so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use cdiff::datagen::{SignalConfig, SphereParams};
use cdiff::ecg::FecgParams;
use cdiff::embed::{EmbedParams, OperatorVariant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub shapes: ShapesConfig,
    pub planted: PlantedConfig,
    pub fecg: FecgConfig,
    pub embed: EmbedConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapesConfig {
    pub sphere: SphereParams,
    pub embedding: EmbedParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantedConfig {
    pub n: usize,
    /// Number of difference samples; ignored when `diff_indices` is given.
    pub m: usize,
    pub diff_indices: Option<Vec<usize>>,
    pub magnitude: f64,
    pub seed: u64,
    pub tol_ratio: f64,
    pub mask_threshold: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            n: 30,
            m: 2,
            diff_indices: None,
            magnitude: 0.5,
            seed: 1,
            tol_ratio: cdiff::operators::DEFAULT_RANK_TOL,
            mask_threshold: 1e-12,
        }
    }
}

impl PlantedConfig {
    /// Explicit indices, or `m` indices spread evenly over `0..n`.
    pub fn indices(&self) -> Vec<usize> {
        match &self.diff_indices {
            Some(v) => v.clone(),
            None if self.m == 0 => vec![],
            None => (0..self.m).map(|k| k * self.n / self.m).collect(),
        }
    }
}

/// Recorded signals to use in place of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalInput {
    /// Two-column CSV, one sample per row.
    pub path: PathBuf,
    pub fs: f64,
    /// JSON array of reference beat indices.
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FecgConfig {
    pub signal: SignalConfig,
    pub input: Option<SignalInput>,
    pub pipeline: FecgParams,
    pub tol_ms: f64,
    pub guard_s: f64,
}

impl Default for FecgConfig {
    fn default() -> Self {
        FecgConfig {
            signal: SignalConfig::default(),
            input: None,
            pipeline: FecgParams::default(),
            tol_ms: cdiff::ecg::score::DEFAULT_TOL_MS,
            guard_s: cdiff::ecg::score::DEFAULT_GUARD_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedConfig {
    /// Headerless CSV point clouds with matching row counts.
    pub view1: Option<PathBuf>,
    pub view2: Option<PathBuf>,
    pub embedding: EmbedParams,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("{}: {e}", origin.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    /// Applies `--seed` to the section that `command` reads.
    pub fn override_seed(&mut self, command: &str, seed: u64) {
        match command {
            "shapes" => self.shapes.sphere.seed = seed,
            "planted" => self.planted.seed = seed,
            "fecg" => self.fecg.signal.seed = seed,
            _ => {}
        }
    }

    pub fn override_operator(&mut self, op: OperatorVariant) {
        self.shapes.embedding.operator = op;
        self.embed.embedding.operator = op;
        self.fecg.pipeline.operator = op;
    }
}
