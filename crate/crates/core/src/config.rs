//! TOML pipeline configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dict::SnippetMode;
use crate::expansion::{ChatEndpointConfig, ExpansionSettings, LemmaMatchPolicy, PromptTemplate};
use crate::forge::ForgeConfig;
use crate::resolver::{default_multiplier_grid, Aggregation, RemoteScorerConfig};
use crate::retry::RetryPolicy;
use crate::splits::HoldoutConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub dictionary: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionConfig {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub n_generations: u32,
    pub prompt_template: String,
    pub snippet_mode: SnippetMode,
    pub max_in_flight: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        let s = ExpansionSettings::default();
        Self {
            model_id: s.model_id,
            temperature: s.temperature,
            max_tokens: s.max_tokens,
            n_generations: s.n_generations,
            prompt_template: s.template.as_str().to_string(),
            snippet_mode: SnippetMode::CoreOnly,
            max_in_flight: 4,
        }
    }
}

impl ExpansionConfig {
    pub fn settings(&self) -> ExpansionSettings {
        ExpansionSettings {
            model_id: self.model_id.clone(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            n_generations: self.n_generations,
            template: PromptTemplate::new(self.prompt_template.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub validation_fraction: f64,
    pub lemma_disjoint_validation: bool,
}

impl Default for SplitSettings {
    fn default() -> Self {
        Self {
            validation_fraction: HoldoutConfig::default().fraction,
            lemma_disjoint_validation: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSettings {
    /// Fixed multiplier; when unset it is chosen from `grid`.
    pub multiplier: Option<f64>,
    pub grid: Vec<f64>,
    pub aggregation: Aggregation,
}

impl Default for ThresholdSettings {
    fn default() -> Self {
        Self {
            multiplier: None,
            grid: default_multiplier_grid(),
            aggregation: Aggregation::Max,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed for every randomized stage.
    pub seed: u64,
    pub paths: PathsConfig,
    pub expansion: ExpansionConfig,
    pub endpoint: ChatEndpointConfig,
    pub retry: RetryPolicy,
    pub matching: LemmaMatchPolicy,
    pub forge: ForgeConfig,
    pub split: SplitSettings,
    pub scorer: RemoteScorerConfig,
    pub resolve: ThresholdSettings,
}

impl PipelineConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn forge_config(&self) -> ForgeConfig {
        ForgeConfig {
            seed: self.seed,
            ..self.forge.clone()
        }
    }

    pub fn holdout_config(&self) -> HoldoutConfig {
        HoldoutConfig {
            fraction: self.split.validation_fraction,
            seed: self.seed,
            lemma_disjoint: self.split.lemma_disjoint_validation,
        }
    }
}
