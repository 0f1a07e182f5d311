//! Pipeline configuration: a TOML file, `--set key=value` overrides, and
//! defaults for everything that is left out.

use std::path::{Path, PathBuf};

use andkit_core::builder::Fold;
use andkit_core::cluster::{Linkage, ThresholdGrid};
use andkit_core::disambig::{ContentKind, ForestConfig};
use andkit_core::linker::PositionConfig;
use andkit_core::metrics::B3Averaging;
use andkit_core::profiler::LookupField;
use andkit_core::synth::SynthConfig;
use serde::{Deserialize, Serialize};

/// Raised for unreadable or inconsistent configuration.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Every stage derives its randomness from this seed.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Downstream stages read the trimmed block dataset.
    pub trimmed: bool,
    pub input: InputConfig,
    pub position: PositionConfig,
    pub sampling: SamplingConfig,
    pub split: SplitConfig,
    pub model: ModelConfig,
    pub cluster: ClusterConfig,
    pub profile: ProfileConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            out_dir: PathBuf::from("out"),
            trimmed: false,
            input: InputConfig::default(),
            position: PositionConfig::default(),
            sampling: SamplingConfig::default(),
            split: SplitConfig::default(),
            model: ModelConfig::default(),
            cluster: ClusterConfig::default(),
            profile: ProfileConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub registry: PathBuf,
    pub corpus: PathBuf,
    /// Author IDs of another system, audited by `audit-ids`.
    pub external_ids: Option<PathBuf>,
    /// Content similarities for `model.cf_kind = "plugin"`.
    pub plugin_scores: Option<PathBuf>,
    pub lookups: Vec<LookupSpec>,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig {
            registry: PathBuf::from("data/registry.jsonl"),
            corpus: PathBuf::from("data/corpus.jsonl"),
            external_ids: None,
            plugin_scores: None,
            lookups: Vec::new(),
        }
    }
}

/// A two-column TSV mapping name keys to category labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookupSpec {
    pub name: String,
    pub field: LookupField,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Pairs kept per block; 0 keeps all.
    pub cap: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { cap: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Train, validation and test percentages.
    pub ratios: [u32; 3],
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { ratios: [50, 25, 25] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub cf_kind: ContentKind,
    /// Pairs with probability at or above the cutoff are predicted same-author.
    pub cutoff: f64,
    pub forest: ForestConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            cf_kind: ContentKind::Tfidf,
            cutoff: 0.5,
            forest: ForestConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub linkage: Linkage,
    /// Fixed distance threshold; when absent, `cluster` uses the tuned one.
    pub threshold: Option<f64>,
    pub grid: ThresholdGrid,
    pub averaging: B3Averaging,
    /// Fold that `cluster` and `evaluate` score.
    pub fold: Fold,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            linkage: Linkage::Average,
            threshold: None,
            grid: ThresholdGrid::default(),
            averaging: B3Averaging::Pooled,
            fold: Fold::Test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Positions above the cap share one bin.
    pub position_cap: u32,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { position_cap: 10 }
    }
}

/// Parse an override value as a TOML literal, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(root: &mut toml::Table, assignment: &str) -> anyhow::Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override {assignment:?} is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key {key:?} is malformed")));
    }
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = root;
    for p in parents {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override key {key:?}: {p} is not a table")))?;
    }
    table.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl PipelineConfig {
    /// Load `path` (if given), then apply `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<Self> {
        let mut root = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let cfg: PipelineConfig = toml::Value::Table(root)
            .try_into()
            .map_err(|e| config_err(format!("invalid configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.split.ratios.iter().sum::<u32>() != 100 {
            return Err(config_err(format!("split.ratios must sum to 100, got {:?}", self.split.ratios)));
        }
        if !(0.0..=1.0).contains(&self.model.cutoff) {
            return Err(config_err("model.cutoff must lie in [0, 1]"));
        }
        if let Some(t) = self.cluster.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(config_err("cluster.threshold must lie in [0, 1]"));
            }
        }
        if self.model.cf_kind == ContentKind::Plugin && self.input.plugin_scores.is_none() {
            return Err(config_err("model.cf_kind = \"plugin\" needs input.plugin_scores"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml().unwrap();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.position.margin, 0.2);
        assert_eq!(cfg.model.forest.n_trees, 100);
        assert_eq!(cfg.split.ratios, [50, 25, 25]);
        assert_eq!(cfg.cluster.grid.step, 0.05);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let sets = [
            "model.forest.n_trees=7".to_string(),
            "model.cf_kind=none".to_string(),
            "out_dir=/tmp/x".to_string(),
            "cluster.threshold=0.3".to_string(),
        ];
        let cfg = PipelineConfig::load(None, &sets).unwrap();
        assert_eq!(cfg.model.forest.n_trees, 7);
        assert_eq!(cfg.model.cf_kind, ContentKind::None);
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.cluster.threshold, Some(0.3));
        assert_eq!(cfg.position.single_author_floor, 0.5);
    }

    #[test]
    fn bad_configs_are_rejected() {
        for bad in ["split.ratios=[50, 30, 30]", "nonsense=1", "model.cutoff=2.0", "seed"] {
            let err = PipelineConfig::load(None, &[bad.to_string()]).unwrap_err();
            assert!(err.downcast_ref::<ConfigError>().is_some(), "{bad}");
        }
    }
}
