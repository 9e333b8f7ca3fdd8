use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{Gateway, GatewayError, GatewayErrorKind, PromptBundle, PromptKind};

/// Canned responses for one record, keyed by prompt kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureEntry {
    pub id: String,
    pub query: String,
    #[serde(default)]
    pub formatter: Option<String>,
    #[serde(default)]
    pub toolmaker: Option<String>,
    #[serde(default)]
    pub explainer: Option<String>,
    #[serde(default)]
    pub cot: Option<String>,
    #[serde(default)]
    pub directqa: Option<String>,
}

impl FixtureEntry {
    fn response(&self, kind: PromptKind) -> Option<&str> {
        match kind {
            PromptKind::Formatter => self.formatter.as_deref(),
            PromptKind::Toolmaker => self.toolmaker.as_deref(),
            PromptKind::Explainer => self.explainer.as_deref(),
            PromptKind::Cot => self.cot.as_deref(),
            PromptKind::DirectQa => self.directqa.as_deref(),
        }
    }
}

/// Replays teacher outputs from a JSONL file.
///
/// A prompt is matched to the entry whose query occurs in the user message
/// (longest match wins); a missing entry or response is reported as a
/// transport failure, which is how an unreachable model looks to callers.
pub struct FixtureGateway {
    entries: Vec<FixtureEntry>,
    calls: AtomicUsize,
}

impl FixtureGateway {
    pub fn new(entries: Vec<FixtureEntry>) -> Self {
        FixtureGateway {
            entries,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, String> {
        let raw = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut entries = Vec::new();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry =
                serde_json::from_str(line).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
            entries.push(entry);
        }
        Ok(FixtureGateway::new(entries))
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Gateway for FixtureGateway {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let entry = self
            .entries
            .iter()
            .filter(|e| !e.query.trim().is_empty() && bundle.user.contains(e.query.trim()))
            .max_by_key(|e| e.query.trim().len())
            .ok_or_else(|| GatewayError::new(GatewayErrorKind::Transport, "no fixture entry for prompt"))?;
        entry.response(bundle.kind).map(str::to_string).ok_or_else(|| {
            GatewayError::new(
                GatewayErrorKind::Transport,
                format!("fixture {} has no {:?} response", entry.id, bundle.kind),
            )
        })
    }
}
