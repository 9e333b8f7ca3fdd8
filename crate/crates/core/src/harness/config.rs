use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::formatter::FormatMode;
use crate::gateway::GatewayConfig;

/// Label vocabulary of one verification dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelMap {
    pub labels: Vec<String>,
    /// Lower-case surface form to label, e.g. `supports = "1"`.
    #[serde(default)]
    pub synonyms: BTreeMap<String, String>,
}

impl LabelMap {
    pub fn contains_label(&self, s: &str) -> bool {
        self.labels.iter().any(|l| l.eq_ignore_ascii_case(s.trim()))
    }

    /// Maps a prediction onto the label space; unknown forms pass through.
    pub fn map(&self, pred: &str) -> String {
        let key = pred.trim().trim_end_matches('.').trim().to_lowercase();
        if let Some(label) = self.labels.iter().find(|l| l.to_lowercase() == key) {
            return label.clone();
        }
        self.synonyms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| pred.trim().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            rel_tol: 1e-4,
            abs_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub format_mode: FormatMode,
    pub parallelism: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            format_mode: FormatMode::Rules,
            parallelism: 4,
        }
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gateway: GatewayConfig,
    pub scoring: ScoringConfig,
    pub run: RunSection,
    pub labels: BTreeMap<String, LabelMap>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Config, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a config file. Relative gateway paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = Config::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(fixture) = &config.gateway.fixture {
            if fixture.is_relative() {
                config.gateway.fixture = Some(base.join(fixture));
            }
        }
        if let Some(dir) = &config.gateway.cache_dir {
            if dir.is_relative() {
                config.gateway.cache_dir = Some(base.join(dir));
            }
        }
        Ok(config)
    }
}
