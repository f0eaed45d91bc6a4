//! Text and JSON renderings of the dependency DAG.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::census::{TokenKind, UnsafeFinding};
use crate::modgraph::DepGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TreeOptions {
    /// Deepest level printed; root packages are level 0.
    pub max_depth: Option<u32>,
    pub show_std: bool,
    /// List each node's findings under its full entry.
    pub show_code: bool,
}

fn sort_key(graph: &DepGraph, node: usize) -> (&str, &str) {
    let n = &graph.nodes[node];
    (&n.package_path, &graph.modules[n.module].version)
}

fn label(graph: &DepGraph, node: usize) -> String {
    let n = &graph.nodes[node];
    let version = &graph.modules[n.module].version;
    if version.is_empty() || graph.is_root_module(node) {
        n.package_path.clone()
    } else {
        format!("{}@{version}", n.package_path)
    }
}

/// For each node, the parent under which it is printed in full: the
/// lexicographically first among its shallowest importers.
fn canonical_parents(graph: &DepGraph) -> Vec<Option<usize>> {
    let mut canon: Vec<Option<usize>> = vec![None; graph.nodes.len()];
    for (p, node) in graph.nodes.iter().enumerate() {
        for &c in &node.children {
            if graph.nodes[c].depth == 0 || node.depth + 1 != graph.nodes[c].depth {
                continue;
            }
            match canon[c] {
                Some(q) if sort_key(graph, q) <= sort_key(graph, p) => {}
                _ => canon[c] = Some(p),
            }
        }
    }
    canon
}

struct Renderer<'a> {
    graph: &'a DepGraph,
    opts: TreeOptions,
    canon: Vec<Option<usize>>,
    out: String,
}

impl Renderer<'_> {
    fn visible(&self, node: usize) -> bool {
        self.opts.show_std || !self.graph.nodes[node].is_std
    }

    fn sorted(&self, nodes: &[usize]) -> Vec<usize> {
        let mut v: Vec<usize> = nodes.iter().copied().filter(|&n| self.visible(n)).collect();
        v.sort_by(|&a, &b| sort_key(self.graph, a).cmp(&sort_key(self.graph, b)));
        v.dedup();
        v
    }

    fn line(&mut self, node: usize, level: u32, full: bool) {
        let n = &self.graph.nodes[node];
        let indent = "  ".repeat(level as usize);
        let mut text = format!(
            "{indent}{} [local {} | cumulative {}]",
            label(self.graph, node),
            n.local_total(),
            n.cumulative_total()
        );
        if !n.resolved {
            text.push_str(" (unresolved)");
        }
        if n.parse_error_files > 0 {
            write!(text, " (parse errors in {} files)", n.parse_error_files)
                .expect("write to string");
        }
        if !full {
            text.push_str(" (*)");
        }
        writeln!(self.out, "{text}").expect("write to string");
        if full && self.opts.show_code {
            for f in &n.findings {
                writeln!(
                    self.out,
                    "{indent}    {}:{}:{}: {} ({}) {}",
                    f.file,
                    f.line,
                    f.column,
                    f.token.as_str(),
                    f.context.as_str(),
                    f.snippet.replace('\n', " ")
                )
                .expect("write to string");
            }
        }
    }

    fn walk(&mut self, node: usize, level: u32) {
        self.line(node, level, true);
        if self.opts.max_depth.is_some_and(|m| level >= m) {
            return;
        }
        for child in self.sorted(&self.graph.nodes[node].children) {
            if self.canon[child] == Some(node) {
                self.walk(child, level + 1);
            } else {
                self.line(child, level + 1, false);
            }
        }
    }
}

/// One line per node, `path [local L | cumulative C]`, children indented two
/// spaces. Each node is expanded once at its canonical position and shown as
/// a `(*)` back-reference everywhere else.
pub fn render_tree(graph: &DepGraph, opts: TreeOptions) -> String {
    let mut r = Renderer {
        graph,
        opts,
        canon: canonical_parents(graph),
        out: String::new(),
    };
    for root in r.sorted(&graph.roots) {
        r.walk(root, 0);
    }
    r.out
}

#[derive(Serialize)]
struct JsonPackage<'a> {
    package: &'a str,
    module: &'a str,
    version: &'a str,
    depth: u32,
    is_std: bool,
    resolved: bool,
    uses_cgo: bool,
    files: usize,
    /// Files that only parsed with errors; their intact parts are counted.
    parse_errors: usize,
    local: &'a BTreeMap<TokenKind, u64>,
    local_contexts: &'a BTreeMap<crate::census::ContextKind, u64>,
    cumulative: &'a BTreeMap<TokenKind, u64>,
    imports: Vec<String>,
}

#[derive(Serialize)]
struct JsonUnresolved<'a> {
    import_path: &'a str,
    importer: &'a str,
    reason: &'a str,
}

#[derive(Serialize)]
struct JsonCensus<'a> {
    packages: Vec<JsonPackage<'a>>,
    unresolved_imports: Vec<JsonUnresolved<'a>>,
    findings: Vec<UnsafeFinding>,
}

/// Packages (sorted by path and version), unresolved imports and findings.
pub fn census_json(graph: &DepGraph) -> Result<String, serde_json::Error> {
    let mut order: Vec<usize> = (0..graph.nodes.len()).collect();
    order.sort_by(|&a, &b| sort_key(graph, a).cmp(&sort_key(graph, b)));
    let packages = order
        .into_iter()
        .map(|i| {
            let n = &graph.nodes[i];
            let mut imports: Vec<String> = n.children.iter().map(|&c| label(graph, c)).collect();
            imports.sort();
            JsonPackage {
                package: &n.package_path,
                module: &graph.modules[n.module].module_path,
                version: &graph.modules[n.module].version,
                depth: n.depth,
                is_std: n.is_std,
                resolved: n.resolved,
                uses_cgo: n.uses_cgo,
                files: n.file_count,
                parse_errors: n.parse_error_files,
                local: &n.local.by_token,
                local_contexts: &n.local.by_context,
                cumulative: &n.cumulative,
                imports,
            }
        })
        .collect();
    let doc = JsonCensus {
        packages,
        unresolved_imports: graph
            .unresolved
            .iter()
            .map(|u| JsonUnresolved {
                import_path: &u.import_path,
                importer: &u.importer,
                reason: &u.reason,
            })
            .collect(),
        findings: graph.findings(),
    };
    let mut out = serde_json::to_string_pretty(&doc)?;
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;
    use std::sync::Arc;

    use super::*;
    use crate::census::ContextKind;
    use crate::modgraph::{
        build_dep_tree, LoadedPackage, ModGraphError, ModuleInfo, PackageLoader, ResolvedPackage,
    };

    struct Fake(BTreeMap<&'static str, (Vec<&'static str>, u32)>);

    impl PackageLoader for Fake {
        fn resolve(&self, path: &str, _: &ModuleInfo) -> Result<ResolvedPackage, ModGraphError> {
            if !self.0.contains_key(path) {
                return Err(ModGraphError::UnresolvedImport {
                    import_path: path.into(),
                    reason: "not found".into(),
                });
            }
            Ok(ResolvedPackage {
                package_path: path.into(),
                dir: PathBuf::from(path),
                module: Arc::new(ModuleInfo {
                    module_path: path.into(),
                    ..Default::default()
                }),
            })
        }

        fn load(&self, p: &ResolvedPackage) -> LoadedPackage {
            let (imports, n) = &self.0[p.package_path.as_str()];
            LoadedPackage {
                imports: imports.iter().map(|s| s.to_string()).collect(),
                findings: (0..*n)
                    .map(|i| UnsafeFinding {
                        package_path: p.package_path.clone(),
                        module_path: p.package_path.clone(),
                        module_version: String::new(),
                        file: format!("{}/x.go", p.package_path),
                        line: i + 1,
                        column: 2,
                        token: TokenKind::UnsafePointer,
                        context: ContextKind::Call,
                        snippet: "unsafe.Pointer(p)".into(),
                    })
                    .collect(),
                file_count: 1,
                parse_error_files: 0,
            }
        }
    }

    fn graph(spec: &[(&'static str, &[&'static str], u32)]) -> DepGraph {
        let fake = Fake(
            spec.iter()
                .map(|(p, i, n)| (*p, (i.to_vec(), *n)))
                .collect(),
        );
        let root = fake.resolve(spec[0].0, &ModuleInfo::default()).unwrap();
        build_dep_tree(&[root], &fake)
    }

    #[test]
    fn single_root() {
        let g = graph(&[("root", &[], 2)]);
        assert_eq!(
            render_tree(&g, TreeOptions::default()),
            "root [local 2 | cumulative 2]\n"
        );
    }

    #[test]
    fn diamond_prints_shared_node_once() {
        let g = graph(&[
            ("a", &["b", "c"], 0),
            ("b", &["d"], 0),
            ("c", &["d"], 0),
            ("d", &[], 1),
        ]);
        let text = render_tree(&g, TreeOptions::default());
        assert_eq!(
            text,
            "a [local 0 | cumulative 1]\n  b [local 0 | cumulative 1]\n    d [local 1 | cumulative 1]\n  c [local 0 | cumulative 1]\n    d [local 1 | cumulative 1] (*)\n"
        );
    }

    #[test]
    fn shallowest_position_wins() {
        let g = graph(&[("a", &["b", "d"], 0), ("b", &["d"], 0), ("d", &[], 1)]);
        let text = render_tree(&g, TreeOptions::default());
        assert_eq!(
            text,
            "a [local 0 | cumulative 1]\n  b [local 0 | cumulative 1]\n    d [local 1 | cumulative 1] (*)\n  d [local 1 | cumulative 1]\n"
        );
    }

    #[test]
    fn max_depth_keeps_cumulative() {
        let g = graph(&[("a", &["b"], 0), ("b", &["c"], 0), ("c", &[], 3)]);
        let opts = TreeOptions {
            max_depth: Some(1),
            ..Default::default()
        };
        assert_eq!(
            render_tree(&g, opts),
            "a [local 0 | cumulative 3]\n  b [local 0 | cumulative 3]\n"
        );
    }

    #[test]
    fn unresolved_and_code() {
        let g = graph(&[("a", &["gone.example/x"], 1)]);
        let opts = TreeOptions {
            show_code: true,
            ..Default::default()
        };
        assert_eq!(
            render_tree(&g, opts),
            "a [local 1 | cumulative 1]\n    a/x.go:1:2: UnsafePointer (Call) unsafe.Pointer(p)\n  gone.example/x [local 0 | cumulative 0] (unresolved)\n"
        );
    }

    #[test]
    fn json_lists_every_package() {
        let g = graph(&[("a", &["b"], 0), ("b", &[], 2)]);
        let v: serde_json::Value = serde_json::from_str(&census_json(&g).unwrap()).unwrap();
        assert_eq!(v["packages"].as_array().unwrap().len(), 2);
        assert_eq!(v["packages"][0]["cumulative"]["UnsafePointer"], 2);
        assert_eq!(v["findings"].as_array().unwrap().len(), 2);
    }
}
