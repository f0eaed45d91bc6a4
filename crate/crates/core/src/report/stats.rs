//! Corpus-level statistics over per-project summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::taxonomy::{PurposeClass, WhatClass};
use super::ReportError;
use crate::census::{CensusCounts, ContextKind, TokenKind};
use crate::modgraph::CorpusProjectSummary;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub project_count: u64,
    pub direct_unsafe_share: f64,
    pub transitive_unsafe_share: f64,
    pub first_level_share: f64,
    /// Depth -> distinct unsafe-containing package versions.
    pub depth_histogram: BTreeMap<u32, u64>,
    pub depth_mean: f64,
    /// Population standard deviation.
    pub depth_sd: f64,
    /// Each package version counted once across the corpus.
    pub token_distribution: BTreeMap<TokenKind, u64>,
    pub context_distribution: BTreeMap<ContextKind, u64>,
    /// Each package version counted once per project that depends on it.
    pub token_distribution_per_project: BTreeMap<TokenKind, u64>,
    pub context_distribution_per_project: BTreeMap<ContextKind, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsMetadata {
    pub depth_origin: String,
    pub depth_sd: String,
    pub depth_histogram: String,
    pub token_distribution: String,
    pub token_distribution_per_project: String,
    pub token_kinds: Vec<String>,
    pub context_kinds: Vec<String>,
    pub taxonomy_what: Vec<String>,
    pub taxonomy_purpose: Vec<String>,
}

impl Default for StatsMetadata {
    fn default() -> Self {
        StatsMetadata {
            depth_origin: "root-module packages are depth 0, their direct imports depth 1".into(),
            depth_sd: "population standard deviation".into(),
            depth_histogram: "distinct package versions with at least one finding, at their smallest depth in any project".into(),
            token_distribution: "each package version counted once across the corpus".into(),
            token_distribution_per_project: "each package version counted once per project".into(),
            token_kinds: TokenKind::ALL.iter().map(|k| k.as_str().to_string()).collect(),
            context_kinds: ContextKind::ALL.iter().map(|k| k.as_str().to_string()).collect(),
            taxonomy_what: WhatClass::ALL.iter().map(|k| k.as_str().to_string()).collect(),
            taxonomy_purpose: PurposeClass::ALL.iter().map(|k| k.as_str().to_string()).collect(),
        }
    }
}

/// The emitted JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsDocument {
    pub metadata: StatsMetadata,
    pub stats: CorpusStats,
    pub projects: Vec<CorpusProjectSummary>,
}

/// Mean and population standard deviation of a depth histogram.
pub fn depth_stats(histogram: &BTreeMap<u32, u64>) -> (f64, f64) {
    let n: u64 = histogram.values().sum();
    if n == 0 {
        return (0.0, 0.0);
    }
    let n = n as f64;
    let mean = histogram
        .iter()
        .map(|(&d, &c)| d as f64 * c as f64)
        .sum::<f64>()
        / n;
    let var = histogram
        .iter()
        .map(|(&d, &c)| c as f64 * (d as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

fn share(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn compute(summaries: &[CorpusProjectSummary]) -> CorpusStats {
    let projects = summaries.len() as u64;
    let direct = summaries.iter().filter(|s| s.has_direct_unsafe).count() as u64;
    let transitive = summaries
        .iter()
        .filter(|s| s.has_transitive_nonstd_unsafe)
        .count() as u64;
    let first_level: u64 = summaries.iter().map(|s| s.first_level_dep_count).sum();
    let first_level_unsafe: u64 = summaries
        .iter()
        .map(|s| s.first_level_unsafe_dep_count)
        .sum();

    let mut distinct: BTreeMap<(&str, &str), (u32, &CensusCounts)> = BTreeMap::new();
    let mut per_project = CensusCounts::default();
    for s in summaries {
        for p in &s.unsafe_packages {
            per_project.add(&p.counts);
            distinct
                .entry((&p.package, &p.version))
                .and_modify(|e| e.0 = e.0.min(p.depth))
                .or_insert((p.depth, &p.counts));
        }
    }
    let mut histogram = BTreeMap::new();
    let mut per_version = CensusCounts::default();
    for (depth, counts) in distinct.values() {
        *histogram.entry(*depth).or_default() += 1;
        per_version.add(counts);
    }
    let (depth_mean, depth_sd) = depth_stats(&histogram);
    CorpusStats {
        project_count: projects,
        direct_unsafe_share: share(direct, projects),
        transitive_unsafe_share: share(transitive, projects),
        first_level_share: share(first_level_unsafe, first_level),
        depth_histogram: histogram,
        depth_mean,
        depth_sd,
        token_distribution: per_version.by_token,
        context_distribution: per_version.by_context,
        token_distribution_per_project: per_project.by_token,
        context_distribution_per_project: per_project.by_context,
    }
}

/// Aggregates project summaries and renders them as a JSON document with a
/// fixed key order.
pub fn emit_stats(
    summaries: &[CorpusProjectSummary],
) -> Result<(CorpusStats, String), ReportError> {
    if summaries.is_empty() {
        return Err(ReportError::EmptyCorpus);
    }
    let stats = compute(summaries);
    let doc = StatsDocument {
        metadata: StatsMetadata::default(),
        stats: stats.clone(),
        projects: summaries.to_vec(),
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    Ok((stats, json))
}

/// Reads an emitted document back and recomputes the statistics from its
/// project summaries.
pub fn stats_from_json(json: &str) -> Result<(CorpusStats, CorpusStats), ReportError> {
    let doc: StatsDocument = serde_json::from_str(json)?;
    if doc.projects.is_empty() {
        return Err(ReportError::EmptyCorpus);
    }
    let recomputed = compute(&doc.projects);
    Ok((doc.stats, recomputed))
}

/// Long-form `series,key,value` rows for plotting.
pub fn stats_csv(stats: &CorpusStats) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut row = |series: &str, key: &str, value: String| {
        w.write_record([series, key, &value])
            .expect("in-memory write");
    };
    row("series", "key", "value".into());
    for (d, c) in &stats.depth_histogram {
        row("depth_histogram", &d.to_string(), c.to_string());
    }
    for (series, map) in [
        ("token_distribution", &stats.token_distribution),
        (
            "token_distribution_per_project",
            &stats.token_distribution_per_project,
        ),
    ] {
        for k in TokenKind::ALL {
            row(
                series,
                k.as_str(),
                map.get(&k).copied().unwrap_or(0).to_string(),
            );
        }
    }
    for (series, map) in [
        ("context_distribution", &stats.context_distribution),
        (
            "context_distribution_per_project",
            &stats.context_distribution_per_project,
        ),
    ] {
        for k in ContextKind::ALL {
            row(
                series,
                k.as_str(),
                map.get(&k).copied().unwrap_or(0).to_string(),
            );
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}
