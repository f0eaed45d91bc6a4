#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use unsafe_audit::census::{ContextKind, TokenKind, UnsafeFinding};
use unsafe_audit::modgraph::{
    build_dep_tree, DepGraph, LoadedPackage, ModGraphError, ModuleInfo, PackageLoader,
    ResolvedPackage,
};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

/// A DAG over packages `n0..nk` given as adjacency lists plus per-node
/// UnsafePointer counts.
#[derive(Clone, Debug)]
pub struct SyntheticDag {
    pub edges: Vec<Vec<usize>>,
    pub counts: Vec<u64>,
    pub roots: Vec<usize>,
}

pub fn name(i: usize) -> String {
    format!("example.com/n{i}")
}

pub fn index_of(path: &str) -> usize {
    path.trim_start_matches("example.com/n")
        .parse()
        .expect("synthetic name")
}

impl PackageLoader for SyntheticDag {
    fn resolve(&self, import_path: &str, _: &ModuleInfo) -> Result<ResolvedPackage, ModGraphError> {
        Ok(ResolvedPackage {
            package_path: import_path.to_string(),
            dir: PathBuf::from(import_path),
            module: Arc::new(ModuleInfo {
                module_path: import_path.to_string(),
                version: "v1.0.0".into(),
                ..Default::default()
            }),
        })
    }

    fn load(&self, package: &ResolvedPackage) -> LoadedPackage {
        let i = index_of(&package.package_path);
        LoadedPackage {
            imports: self.edges[i].iter().map(|&j| name(j)).collect(),
            findings: (0..self.counts[i])
                .map(|k| UnsafeFinding {
                    package_path: package.package_path.clone(),
                    module_path: package.package_path.clone(),
                    module_version: "v1.0.0".into(),
                    file: format!("n{i}/x.go"),
                    line: k as u32 + 1,
                    column: 1,
                    token: TokenKind::UnsafePointer,
                    context: ContextKind::Other,
                    snippet: String::new(),
                })
                .collect(),
            file_count: 1,
            parse_error_files: 0,
        }
    }
}

impl SyntheticDag {
    pub fn build(&self) -> DepGraph {
        let roots: Vec<ResolvedPackage> = self
            .roots
            .iter()
            .map(|&r| self.resolve(&name(r), &ModuleInfo::default()).unwrap())
            .collect();
        build_dep_tree(&roots, self)
    }

    /// Nodes reachable from `start` by plain DFS over the input edges.
    pub fn reachable(&self, start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for &c in &self.edges[n] {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        seen
    }

    /// Shortest distance from any root, by BFS over the input edges.
    pub fn bfs_depths(&self) -> BTreeMap<usize, u32> {
        let mut depth = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &r in &self.roots {
            if depth.insert(r, 0).is_none() {
                queue.push_back(r);
            }
        }
        while let Some(n) = queue.pop_front() {
            let d = depth[&n];
            for &c in &self.edges[n] {
                if let std::collections::btree_map::Entry::Vacant(e) = depth.entry(c) {
                    e.insert(d + 1);
                    queue.push_back(c);
                }
            }
        }
        depth
    }
}

/// Checks the aggregation invariants of `graph` against brute force over
/// the input DAG. Returns a description of the first violation.
pub fn check_dag_invariants(dag: &SyntheticDag, graph: &DepGraph) -> Result<(), String> {
    let depths = dag.bfs_depths();
    if graph.nodes.len() != depths.len() {
        return Err(format!(
            "{} nodes, expected {}",
            graph.nodes.len(),
            depths.len()
        ));
    }
    let mut seen = BTreeSet::new();
    for node in &graph.nodes {
        let i = index_of(&node.package_path);
        if !seen.insert(i) {
            return Err(format!("n{i} appears twice"));
        }
        let expected: u64 = dag.reachable(i).iter().map(|&j| dag.counts[j]).sum();
        if node.cumulative_total() != expected {
            return Err(format!(
                "cumulative(n{i}) = {}, expected {expected}",
                node.cumulative_total()
            ));
        }
        if node.local_total() != dag.counts[i] {
            return Err(format!(
                "local(n{i}) = {}, expected {}",
                node.local_total(),
                dag.counts[i]
            ));
        }
        if node.depth != depths[&i] {
            return Err(format!(
                "depth(n{i}) = {}, expected {}",
                node.depth, depths[&i]
            ));
        }
        for &c in &node.children {
            if graph.nodes[c].cumulative_total() > node.cumulative_total() {
                return Err(format!(
                    "cumulative(child {}) exceeds parent n{i}",
                    graph.nodes[c].package_path
                ));
            }
        }
    }
    Ok(())
}

/// Random DAG with edges only from lower to higher indices.
pub fn dag_strategy() -> impl proptest::strategy::Strategy<Value = SyntheticDag> {
    use proptest::prelude::*;
    (1usize..24)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(proptest::collection::vec(any::<u16>(), 0..5), n),
                proptest::collection::vec(0u64..5, n),
                proptest::collection::btree_set(0..n, 1..=n.min(3)),
            )
        })
        .prop_map(|(n, raw, counts, roots)| {
            let edges = raw
                .into_iter()
                .enumerate()
                .map(|(i, targets)| {
                    let span = n - i - 1;
                    let mut out: Vec<usize> = if span == 0 {
                        Vec::new()
                    } else {
                        targets
                            .into_iter()
                            .map(|t| i + 1 + t as usize % span)
                            .collect()
                    };
                    out.sort();
                    out.dedup();
                    out
                })
                .collect();
            SyntheticDag {
                edges,
                counts,
                roots: roots.into_iter().collect(),
            }
        })
}

/// Oracle rows: package, version -> kind name -> count.
pub type Oracle = BTreeMap<(String, String), BTreeMap<String, u64>>;

pub fn read_oracle(path: &Path) -> Oracle {
    let mut out = Oracle::new();
    let mut reader = csv::Reader::from_path(path).expect("oracle file");
    for rec in reader.records() {
        let rec = rec.expect("oracle row");
        let entry = out
            .entry((rec[0].to_string(), rec[1].to_string()))
            .or_default();
        let count: u64 = rec[3].parse().expect("count");
        if count > 0 {
            entry.insert(rec[2].to_string(), count);
        }
    }
    out
}

/// Same shape as the oracle, built from the non-std resolved nodes of a graph.
pub fn observed_counts(graph: &DepGraph) -> Oracle {
    let mut out = Oracle::new();
    for (i, node) in graph.nodes.iter().enumerate() {
        if node.is_std || !node.resolved {
            continue;
        }
        let version = graph.module_of(i).version.clone();
        let entry = out.entry((node.package_path.clone(), version)).or_default();
        for (k, v) in &node.local.by_token {
            if *v > 0 {
                entry.insert(k.as_str().to_string(), *v);
            }
        }
        for (k, v) in &node.local.by_context {
            if *v > 0 {
                entry.insert(k.as_str().to_string(), *v);
            }
        }
    }
    out
}
