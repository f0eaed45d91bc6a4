//! Per-project study metrics computed on a frozen dependency DAG.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::graph::DepGraph;
use crate::census::CensusCounts;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SummaryOptions {
    /// Count standard-library packages in dependency metrics.
    pub include_std: bool,
}

/// One unsafe-containing package counted by a project summary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsafePackage {
    pub package: String,
    pub version: String,
    pub depth: u32,
    pub is_std: bool,
    pub root_module: bool,
    pub counts: CensusCounts,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusProjectSummary {
    pub project: String,
    pub has_direct_unsafe: bool,
    pub has_transitive_nonstd_unsafe: bool,
    pub first_level_dep_count: u64,
    pub first_level_unsafe_dep_count: u64,
    /// Depth -> number of unsafe-containing packages first discovered there.
    pub depth_histogram: BTreeMap<u32, u64>,
    /// Unsafe-containing packages in scope, sorted by (package, version).
    pub unsafe_packages: Vec<UnsafePackage>,
    pub unresolved_imports: u64,
}

/// Computes the project-level flags, first-level dependency counts and the
/// depth histogram. Std packages are left out of dependency metrics unless
/// `include_std` is set; they never affect the transitive flag.
pub fn summarize_project(
    project: &str,
    graph: &DepGraph,
    opts: SummaryOptions,
) -> CorpusProjectSummary {
    let mut summary = CorpusProjectSummary {
        project: project.to_string(),
        has_direct_unsafe: false,
        has_transitive_nonstd_unsafe: false,
        first_level_dep_count: 0,
        first_level_unsafe_dep_count: 0,
        depth_histogram: BTreeMap::new(),
        unsafe_packages: Vec::new(),
        unresolved_imports: graph.unresolved.len() as u64,
    };
    for (i, node) in graph.nodes.iter().enumerate() {
        let in_root = graph.is_root_module(i);
        let has_unsafe = node.local_total() > 0;
        let in_scope = in_root || !node.is_std || opts.include_std;
        if in_root && has_unsafe {
            summary.has_direct_unsafe = true;
        }
        if !in_root && !node.is_std && has_unsafe {
            summary.has_transitive_nonstd_unsafe = true;
        }
        if !in_root && node.depth == 1 && in_scope {
            summary.first_level_dep_count += 1;
            if has_unsafe {
                summary.first_level_unsafe_dep_count += 1;
            }
        }
        if has_unsafe && in_scope {
            *summary.depth_histogram.entry(node.depth).or_default() += 1;
            summary.unsafe_packages.push(UnsafePackage {
                package: node.package_path.clone(),
                version: graph.module_of(i).version.clone(),
                depth: node.depth,
                is_std: node.is_std,
                root_module: in_root,
                counts: node.local.clone(),
            });
        }
    }
    summary
        .unsafe_packages
        .sort_by(|a, b| (&a.package, &a.version).cmp(&(&b.package, &b.version)));
    summary
}
