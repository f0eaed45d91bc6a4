//! Deduplicated package dependency DAG with depths and cumulative counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use super::gomod::ModuleInfo;
use super::resolve::{is_std_package, ResolvedPackage};
use super::ModGraphError;
use crate::census::{CensusCounts, TokenKind, UnsafeFinding};

/// What a loader reports for one package directory.
#[derive(Clone, Debug, Default)]
pub struct LoadedPackage {
    /// Import paths that create edges (blank imports already removed).
    pub imports: BTreeSet<String>,
    pub findings: Vec<UnsafeFinding>,
    pub file_count: usize,
    pub parse_error_files: usize,
}

/// Source of package contents and import resolution for the walk.
pub trait PackageLoader: Sync {
    fn resolve(
        &self,
        import_path: &str,
        importer: &ModuleInfo,
    ) -> Result<ResolvedPackage, ModGraphError>;

    fn load(&self, package: &ResolvedPackage) -> LoadedPackage;

    /// Whether a standard-library package should be scanned and expanded.
    fn scan_std(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct UnresolvedImport {
    pub import_path: String,
    pub importer: String,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct PackageNode {
    pub package_path: String,
    /// Index into [`DepGraph::modules`].
    pub module: usize,
    pub depth: u32,
    pub is_std: bool,
    /// False for placeholder nodes standing in for unresolved imports.
    pub resolved: bool,
    /// Imports the cgo pseudo-package `C`.
    pub uses_cgo: bool,
    pub dir: Option<PathBuf>,
    pub file_count: usize,
    pub parse_error_files: usize,
    pub local: CensusCounts,
    pub cumulative: BTreeMap<TokenKind, u64>,
    pub children: Vec<usize>,
    pub findings: Vec<UnsafeFinding>,
}

impl PackageNode {
    pub fn local_total(&self) -> u64 {
        self.local.total()
    }

    pub fn cumulative_total(&self) -> u64 {
        self.cumulative.values().sum()
    }
}

#[derive(Clone, Debug)]
pub struct DepGraph {
    pub modules: Vec<Arc<ModuleInfo>>,
    pub nodes: Vec<PackageNode>,
    pub roots: Vec<usize>,
    pub root_module: usize,
    pub unresolved: Vec<UnresolvedImport>,
}

type NodeKey = (String, String);

struct Builder {
    modules: Vec<Arc<ModuleInfo>>,
    module_index: HashMap<(String, String), usize>,
    nodes: Vec<PackageNode>,
    index: HashMap<NodeKey, usize>,
}

impl Builder {
    fn module(&mut self, module: &Arc<ModuleInfo>) -> usize {
        let key = (module.module_path.clone(), module.version.clone());
        if let Some(&i) = self.module_index.get(&key) {
            return i;
        }
        self.modules.push(module.clone());
        self.module_index.insert(key, self.modules.len() - 1);
        self.modules.len() - 1
    }

    fn node(&mut self, package: &ResolvedPackage, depth: u32, root_module: usize) -> (usize, bool) {
        let key = (package.package_path.clone(), package.module.version.clone());
        if let Some(&i) = self.index.get(&key) {
            return (i, false);
        }
        let module = self.module(&package.module);
        let is_std = module != root_module
            && is_std_package(&package.package_path, &package.module.module_path);
        self.nodes.push(PackageNode {
            package_path: package.package_path.clone(),
            module,
            depth,
            is_std,
            resolved: true,
            uses_cgo: false,
            dir: Some(package.dir.clone()),
            file_count: 0,
            parse_error_files: 0,
            local: CensusCounts::default(),
            cumulative: BTreeMap::new(),
            children: Vec::new(),
            findings: Vec::new(),
        });
        self.index.insert(key, self.nodes.len() - 1);
        (self.nodes.len() - 1, true)
    }

    fn placeholder(&mut self, import_path: &str, depth: u32) -> (usize, bool) {
        let placeholder = ResolvedPackage {
            package_path: import_path.to_string(),
            dir: PathBuf::new(),
            module: Arc::new(ModuleInfo {
                module_path: String::new(),
                ..Default::default()
            }),
        };
        let (i, fresh) = self.node(&placeholder, depth, usize::MAX);
        if fresh {
            self.nodes[i].resolved = false;
            self.nodes[i].dir = None;
            self.nodes[i].is_std = super::resolve::is_std_path(import_path);
        }
        (i, fresh)
    }
}

fn reaches(children: &[Vec<usize>], from: usize, target: usize) -> bool {
    let mut seen = vec![false; children.len()];
    let mut stack = vec![from];
    while let Some(n) = stack.pop() {
        if n == target {
            return true;
        }
        if std::mem::replace(&mut seen[n], true) {
            continue;
        }
        stack.extend(children[n].iter().copied());
    }
    false
}

/// Builds the dependency DAG by breadth-first expansion from `roots`.
///
/// Nodes are keyed by (package path, module version); the depth of a node is
/// the BFS layer in which it was first discovered. The pseudo-imports
/// `unsafe` and `C` create no nodes. Import cycles are broken by dropping the
/// edge that would close them. Unresolved imports become leaf placeholders.
pub fn build_dep_tree<L: PackageLoader>(roots: &[ResolvedPackage], loader: &L) -> DepGraph {
    let root_module_info = roots.first().map(|r| r.module.clone()).unwrap_or_default();
    let mut b = Builder {
        modules: Vec::new(),
        module_index: HashMap::new(),
        nodes: Vec::new(),
        index: HashMap::new(),
    };
    let root_module = b.module(&root_module_info);

    let mut root_ids = Vec::new();
    let mut frontier = Vec::new();
    for r in roots {
        let (i, fresh) = b.node(r, 0, root_module);
        if fresh {
            root_ids.push(i);
            frontier.push((i, r.clone()));
        }
    }

    let mut unresolved = BTreeSet::new();
    // Edges in discovery order plus the BFS processing order of each node.
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut order: Vec<usize> = vec![usize::MAX; b.nodes.len()];
    let mut processed = 0usize;
    let mut depth = 0u32;

    while !frontier.is_empty() {
        let scan_std = loader.scan_std();
        let loaded: Vec<Option<LoadedPackage>> = frontier
            .par_iter()
            .map(|(i, pkg)| {
                let node_is_std = b.nodes[*i].is_std && b.nodes[*i].module != root_module;
                (!node_is_std || scan_std).then(|| loader.load(pkg))
            })
            .collect();

        let resolutions: Vec<Vec<(String, Result<ResolvedPackage, ModGraphError>)>> = frontier
            .par_iter()
            .zip(&loaded)
            .map(|((_, pkg), loaded)| {
                let Some(loaded) = loaded else {
                    return Vec::new();
                };
                loaded
                    .imports
                    .iter()
                    .filter(|p| p.as_str() != "unsafe" && p.as_str() != "C")
                    .map(|p| (p.clone(), loader.resolve(p, &pkg.module)))
                    .collect()
            })
            .collect();

        let mut next = Vec::new();
        for (((id, pkg), loaded), resolved) in frontier.into_iter().zip(loaded).zip(resolutions) {
            if order.len() < b.nodes.len() {
                order.resize(b.nodes.len(), usize::MAX);
            }
            order[id] = processed;
            processed += 1;
            if let Some(loaded) = loaded {
                let node = &mut b.nodes[id];
                node.uses_cgo = loaded.imports.contains("C");
                node.file_count = loaded.file_count;
                node.parse_error_files = loaded.parse_error_files;
                node.local = CensusCounts::from_findings(&loaded.findings);
                node.findings = loaded.findings;
            }
            for (import_path, result) in resolved {
                let (child, fresh) = match result {
                    Ok(target) => b.node(&target, depth + 1, root_module),
                    Err(err) => {
                        let reason = match err {
                            ModGraphError::UnresolvedImport { reason, .. } => reason,
                            other => other.to_string(),
                        };
                        unresolved.insert(UnresolvedImport {
                            import_path: import_path.clone(),
                            importer: pkg.package_path.clone(),
                            reason,
                        });
                        b.placeholder(&import_path, depth + 1)
                    }
                };
                if fresh && b.nodes[child].resolved {
                    let dir = b.nodes[child].dir.clone().unwrap_or_default();
                    let module = b.modules[b.nodes[child].module].clone();
                    next.push((
                        child,
                        ResolvedPackage {
                            package_path: import_path.clone(),
                            dir,
                            module,
                        },
                    ));
                }
                if child != id {
                    edges.push((id, child));
                }
            }
        }
        frontier = next;
        depth += 1;
    }

    // Placeholders are never processed; order them after everything else.
    order.resize(b.nodes.len(), usize::MAX);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); b.nodes.len()];
    for (from, to) in edges {
        if children[from].contains(&to) {
            continue;
        }
        // An edge can only close a cycle if its target was processed first.
        if order[to] <= order[from] && reaches(&children, to, from) {
            log::warn!(
                "import cycle: dropping edge {} -> {}",
                b.nodes[from].package_path,
                b.nodes[to].package_path
            );
            continue;
        }
        children[from].push(to);
    }
    let paths: Vec<String> = b.nodes.iter().map(|n| n.package_path.clone()).collect();
    for (node, mut kids) in b.nodes.iter_mut().zip(children) {
        kids.sort_by(|&x, &y| (&paths[x], x).cmp(&(&paths[y], y)));
        node.children = kids;
    }

    let mut graph = DepGraph {
        modules: b.modules,
        nodes: b.nodes,
        roots: root_ids,
        root_module,
        unresolved: unresolved.into_iter().collect(),
    };
    graph.compute_cumulative();
    graph
}

impl DepGraph {
    /// Topological order: every node appears after all of its children.
    pub fn postorder(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut state = vec![0u8; n];
        let mut out = Vec::with_capacity(n);
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(&child) = self.nodes[node].children.get(*next) {
                    *next += 1;
                    if state[child] == 0 {
                        state[child] = 1;
                        stack.push((child, 0));
                    }
                } else {
                    state[node] = 2;
                    out.push(node);
                    stack.pop();
                }
            }
        }
        out
    }

    /// Bitset of nodes reachable from each node, itself included.
    pub fn reachability(&self) -> Vec<Vec<u64>> {
        let n = self.nodes.len();
        let words = n.div_ceil(64);
        let mut reach = vec![vec![0u64; words]; n];
        for node in self.postorder() {
            let mut set = vec![0u64; words];
            set[node / 64] |= 1 << (node % 64);
            for &c in &self.nodes[node].children {
                for (w, cw) in set.iter_mut().zip(&reach[c]) {
                    *w |= cw;
                }
            }
            reach[node] = set;
        }
        reach
    }

    fn compute_cumulative(&mut self) {
        let reach = self.reachability();
        let mut cumulative = Vec::with_capacity(self.nodes.len());
        for set in &reach {
            let mut sums: BTreeMap<TokenKind, u64> = BTreeMap::new();
            for (w, &word) in set.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let member = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (k, v) in &self.nodes[member].local.by_token {
                        *sums.entry(*k).or_default() += v;
                    }
                }
            }
            cumulative.push(sums);
        }
        for (node, sums) in self.nodes.iter_mut().zip(cumulative) {
            node.cumulative = sums;
        }
    }

    pub fn module_of(&self, node: usize) -> &ModuleInfo {
        &self.modules[self.nodes[node].module]
    }

    pub fn root_module(&self) -> &ModuleInfo {
        &self.modules[self.root_module]
    }

    /// Whether the node belongs to the root module.
    pub fn is_root_module(&self, node: usize) -> bool {
        self.nodes[node].module == self.root_module
    }

    /// All findings, sorted by (file, line, column, token).
    pub fn findings(&self) -> Vec<UnsafeFinding> {
        let mut all: Vec<UnsafeFinding> = self
            .nodes
            .iter()
            .flat_map(|n| n.findings.iter().cloned())
            .collect();
        crate::census::sort_findings(&mut all);
        all
    }
}
