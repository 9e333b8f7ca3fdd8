//! Tool-usage analytics over execution traces.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::score::round1;
use crate::executor::RunOutcome;
use crate::toolkit::Registry;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolCount {
    pub tool: String,
    pub calls: usize,
}

/// Overlap between the distinct tools of an in-domain run and an
/// out-of-domain run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overlap {
    pub in_domain_tools: usize,
    pub ood_tools: usize,
    pub shared_tools: usize,
    /// |A ∩ B| / |A ∪ B|
    pub jaccard: f64,
    /// |A ∩ B| / |B|, B being the out-of-domain set
    pub reuse_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolStats {
    pub total_calls: usize,
    pub frequencies: BTreeMap<String, usize>,
    pub top_k: Vec<ToolCount>,
    /// Percentage of calls per category, one decimal.
    pub categories: BTreeMap<String, f64>,
    pub overlap: Option<Overlap>,
}

fn frequencies(outcomes: &[RunOutcome]) -> BTreeMap<String, usize> {
    let mut freq = BTreeMap::new();
    for entry in outcomes.iter().flat_map(|o| &o.trace) {
        *freq.entry(entry.tool.clone()).or_default() += 1;
    }
    freq
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn overlap(in_domain: &BTreeSet<String>, ood: &BTreeSet<String>) -> Overlap {
    let shared = in_domain.intersection(ood).count();
    let union = in_domain.union(ood).count();
    Overlap {
        in_domain_tools: in_domain.len(),
        ood_tools: ood.len(),
        shared_tools: shared,
        jaccard: ratio(shared, union),
        reuse_fraction: ratio(shared, ood.len()),
    }
}

/// Call frequencies, the `top_k` most called tools (ties by name), category
/// shares, and optionally overlap with an out-of-domain run.
pub fn tool_stats(outcomes: &[RunOutcome], ood: Option<&[RunOutcome]>, registry: &Registry, top_k: usize) -> ToolStats {
    let freq = frequencies(outcomes);
    let total: usize = freq.values().sum();

    let mut ranked: Vec<ToolCount> = freq
        .iter()
        .map(|(tool, &calls)| ToolCount {
            tool: tool.clone(),
            calls,
        })
        .collect();
    ranked.sort_by(|a, b| b.calls.cmp(&a.calls).then_with(|| a.tool.cmp(&b.tool)));
    ranked.truncate(top_k);

    let mut by_category: BTreeMap<String, usize> = BTreeMap::new();
    for (tool, &calls) in &freq {
        let category = registry
            .resolve(tool)
            .map(|s| s.category.to_string())
            .unwrap_or_else(|_| "unknown".into());
        *by_category.entry(category).or_default() += calls;
    }
    let categories = by_category
        .into_iter()
        .map(|(c, n)| (c, round1(100.0 * ratio(n, total))))
        .collect();

    let overlap = ood.map(|o| {
        let a: BTreeSet<String> = freq.keys().cloned().collect();
        let b: BTreeSet<String> = frequencies(o).into_keys().collect();
        overlap(&a, &b)
    });

    ToolStats {
        total_calls: total,
        frequencies: freq,
        top_k: ranked,
        categories,
        overlap,
    }
}
