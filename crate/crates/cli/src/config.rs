//! Run configuration: defaults, overridden by the TOML file, overridden by
//! command-line flags. The resolved settings are echoed into every output.

use std::path::{Path, PathBuf};

use anyhow::Context;
use nnd_core::adapters::{Annotators, FrankOptions, SummEvalOptions};
use nnd_core::{BootstrapConfig, NormalizationConfig, DEFAULT_RESAMPLES};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
    Svg,
}

/// Config file layout:
///
/// ```toml
/// format = "table"
///
/// [normalization]
/// strip_outer_quotes = true
///
/// [bootstrap]
/// n_resamples = 2000
/// seed = 7
///
/// [summeval]
/// annotators = "turker"
///
/// [frank]
/// split = "test"        # "any" keeps every split
///
/// [challenge300]
/// category_map = "configs/my_groups.json"
/// ```
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub format: Option<Format>,
    pub normalization: NormalizationConfig,
    pub bootstrap: BootstrapSection,
    pub summeval: SummEvalSection,
    pub frank: FrankSection,
    pub challenge300: Challenge300Section,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSection {
    pub n_resamples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummEvalSection {
    pub annotators: Annotators,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrankSection {
    pub split: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Challenge300Section {
    pub category_map: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Settings after precedence is applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Effective {
    #[serde(skip)]
    pub format: Format,
    pub normalization: NormalizationConfig,
    /// `None` when no seed was given: no intervals are computed.
    pub bootstrap: Option<BootstrapConfig>,
    pub summeval: SummEvalOptions,
    pub frank: FrankOptions,
    pub challenge300_category_map: Option<PathBuf>,
}

impl Effective {
    pub fn resolve(file: &FileConfig, seed: Option<u64>, format: Option<Format>) -> Self {
        let bootstrap = seed.or(file.bootstrap.seed).map(|seed| BootstrapConfig {
            n_resamples: file.bootstrap.n_resamples.unwrap_or(DEFAULT_RESAMPLES),
            seed,
        });
        let split = match file.frank.split.as_deref() {
            None => FrankOptions::default().split,
            Some("any") => None,
            Some(s) => Some(s.to_string()),
        };
        Effective {
            format: format.or(file.format).unwrap_or_default(),
            normalization: file.normalization,
            bootstrap,
            summeval: SummEvalOptions {
                annotators: file.summeval.annotators,
            },
            frank: FrankOptions { split },
            challenge300_category_map: file.challenge300.category_map.clone(),
        }
    }
}
