//! Corpus-level handling of generated tools: abstraction, deduplication, and
//! mapping onto the builtin registry.

use std::collections::{BTreeMap, HashMap};
use std::sync::LazyLock;

use serde::Serialize;

use super::{normalize_name, Registry, ToolDef, REFERENCE_SOURCES};

/// Keeps definitions whose normalized name occurs at least `min_count` times.
/// Order and multiplicity of the kept definitions are preserved.
pub fn abstract_tools(defs: &[ToolDef], min_count: usize) -> Vec<ToolDef> {
    let min_count = min_count.max(1);
    let mut freq: HashMap<String, usize> = HashMap::new();
    for d in defs {
        *freq.entry(normalize_name(&d.name)).or_default() += 1;
    }
    defs.iter()
        .filter(|d| freq[&normalize_name(&d.name)] >= min_count)
        .cloned()
        .collect()
}

/// Merges structurally identical definitions.
///
/// First, definitions sharing a name keep only their most frequent body.
/// Then definitions with equal `(param_count, body_fingerprint)` form one
/// cluster whose canonical name is the lexicographically smallest; every other
/// name in the cluster is recorded in the alias map. Output is sorted by name
/// and is independent of input order.
pub fn deduplicate(defs: &[ToolDef]) -> (Vec<ToolDef>, BTreeMap<String, String>) {
    let mut by_name: BTreeMap<String, Vec<&ToolDef>> = BTreeMap::new();
    for d in defs {
        by_name.entry(normalize_name(&d.name)).or_default().push(d);
    }

    let mut winners: Vec<ToolDef> = Vec::new();
    for (name, group) in by_name {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        for d in &group {
            *freq.entry(d.body_fingerprint.as_str()).or_default() += 1;
        }
        // BTreeMap iteration breaks frequency ties toward the smaller fingerprint
        let best = freq
            .iter()
            .fold(None::<(&str, usize)>, |acc, (fp, n)| match acc {
                Some((_, m)) if m >= *n => acc,
                _ => Some((fp, *n)),
            })
            .map(|(fp, _)| fp)
            .expect("group is non-empty");
        let chosen = group
            .iter()
            .filter(|d| d.body_fingerprint == best)
            .min_by(|a, b| a.source_text.cmp(&b.source_text))
            .expect("winner exists");
        winners.push(ToolDef {
            name,
            ..(*chosen).clone()
        });
    }

    let mut clusters: BTreeMap<(usize, String), Vec<ToolDef>> = BTreeMap::new();
    for d in winners {
        clusters
            .entry((d.param_count, d.body_fingerprint.clone()))
            .or_default()
            .push(d);
    }

    let mut aliases = BTreeMap::new();
    let mut out = Vec::new();
    for (_, mut members) in clusters {
        members.sort_by(|a, b| a.name.cmp(&b.name));
        let canonical = members.remove(0);
        for m in members {
            aliases.insert(m.name, canonical.name.clone());
        }
        out.push(canonical);
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    (out, aliases)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "detail")]
pub enum Registration {
    MappedTo(String),
    Rejected(String),
}

static REFERENCE_FINGERPRINTS: LazyLock<Vec<(String, usize, &'static str)>> = LazyLock::new(|| {
    REFERENCE_SOURCES
        .iter()
        .map(|(builtin, src)| {
            let def = ToolDef::from_source(src).expect("reference source parses");
            (def.body_fingerprint, def.param_count, *builtin)
        })
        .collect()
});

/// Maps a generated definition onto a builtin, or rejects it.
///
/// A structural match against a builtin's reference body takes precedence,
/// so a generated binary `sum(a, b)` that adds maps to `add`. Otherwise the
/// name is resolved through the registry and must agree on arity. The
/// registry itself is never modified.
pub fn register_generated(def: &ToolDef, registry: &Registry) -> Registration {
    for (fp, arity, builtin) in REFERENCE_FINGERPRINTS.iter() {
        if *fp == def.body_fingerprint && *arity == def.param_count {
            if let Ok(spec) = registry.resolve(builtin) {
                return Registration::MappedTo(spec.name.clone());
            }
        }
    }
    match registry.resolve(&def.name) {
        Ok(spec) if spec.arity() == def.param_count => Registration::MappedTo(spec.name.clone()),
        Ok(spec) => Registration::Rejected(format!(
            "arity {} does not match builtin {} ({})",
            def.param_count,
            spec.name,
            spec.arity()
        )),
        Err(_) => Registration::Rejected("no builtin match".into()),
    }
}
