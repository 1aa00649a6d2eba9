//! JSON run configuration.
//!
//! One file drives every command; unknown keys are rejected so typos fail
//! loudly instead of silently falling back to defaults. The single top-level
//! seed feeds all randomness (generation, fold shuffling, initialization,
//! dropout) through tagged derivation, so a config fixes an entire run.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use efcnet_core::model::TrainConfig;
use efcnet_core::synth::SynthConfig;

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub synth: SynthSection,
    pub train: TrainSection,
    pub baseline: BaselineSection,
    pub cv: CvSection,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            synth: SynthSection::default(),
            train: TrainSection::default(),
            baseline: BaselineSection::default(),
            cv: CvSection::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n_regions: usize,
    pub t_len: usize,
    pub n_communities: usize,
    pub coupling_by_class: Vec<f64>,
    pub noise_std: f64,
    pub n_per_class: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            n_regions: 20,
            t_len: 150,
            n_communities: 2,
            coupling_by_class: vec![0.6, 0.3],
            noise_std: 1.0,
            n_per_class: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub hidden_dim: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            epochs: 300,
            learning_rate: 1e-4,
            weight_decay: 5e-4,
            dropout: 0.5,
            hidden_dim: 1024,
        }
    }
}

/// The plain-GCN baseline shares the training section except for the two
/// knobs its reference setup differs on.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub hidden_dim: usize,
    pub dropout: f64,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            hidden_dim: 512,
            dropout: 0.3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CvSection {
    pub k: usize,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection { k: 10 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(AppError::io(path))?;
        serde_json::from_str(&text).map_err(|e| AppError::Config {
            message: format!("{}: {e}", path.display()),
        })
    }

    /// Serialized with a stable field order and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            n_regions: self.synth.n_regions,
            t_len: self.synth.t_len,
            n_communities: self.synth.n_communities,
            coupling_by_class: self.synth.coupling_by_class.clone(),
            noise_std: self.synth.noise_std,
            seed: self.seed,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            learning_rate: self.train.learning_rate,
            weight_decay: self.train.weight_decay,
            dropout: self.train.dropout,
            hidden_dim: self.train.hidden_dim,
            seed: self.seed,
        }
    }

    /// Baseline GCN settings: the shared training section with the
    /// baseline's width and dropout swapped in.
    pub fn baseline_config(&self) -> TrainConfig {
        TrainConfig {
            hidden_dim: self.baseline.hidden_dim,
            dropout: self.baseline.dropout,
            ..self.train_config()
        }
    }
}
