use std::collections::{BTreeMap, BTreeSet};

use super::{NodeKind, SyntaxTree};

/// Per-file mapping from local package names to import paths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ImportTable {
    pub entries: BTreeMap<String, String>,
    pub dot_imports: BTreeSet<String>,
    pub blank_imports: BTreeSet<String>,
}

impl ImportTable {
    /// Import path bound to `local_name`, if any.
    pub fn path_of(&self, local_name: &str) -> Option<&str> {
        self.entries.get(local_name).map(String::as_str)
    }

    /// Whether `local_name` refers to the package at `path`.
    pub fn names(&self, local_name: &str, path: &str) -> bool {
        self.path_of(local_name) == Some(path)
    }

    pub fn is_dot_imported(&self, path: &str) -> bool {
        self.dot_imports.contains(path)
    }

    /// Every imported path, including dot and blank imports.
    pub fn all_paths(&self) -> BTreeSet<&str> {
        self.entries
            .values()
            .chain(&self.dot_imports)
            .chain(&self.blank_imports)
            .map(String::as_str)
            .collect()
    }

    /// Paths that create dependency edges: blank imports excluded.
    pub fn edge_paths(&self) -> BTreeSet<&str> {
        let blank: BTreeSet<&str> = self.blank_imports.iter().map(String::as_str).collect();
        self.entries
            .values()
            .chain(&self.dot_imports)
            .map(String::as_str)
            .filter(|p| !blank.contains(p))
            .collect()
    }

    pub fn merge(&mut self, other: &ImportTable) {
        for (k, v) in &other.entries {
            self.entries.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self.dot_imports.extend(other.dot_imports.iter().cloned());
        self.blank_imports
            .extend(other.blank_imports.iter().cloned());
    }
}

/// Default local name of an unaliased import: the last path segment, with a
/// trailing major-version segment (`/v2`, `/v3`, ...) skipped.
pub fn default_package_name(path: &str) -> &str {
    let mut segments = path.rsplit('/');
    let last = segments.next().unwrap_or(path);
    if is_major_version(last) {
        if let Some(prev) = segments.next() {
            return prev;
        }
    }
    last
}

fn is_major_version(segment: &str) -> bool {
    segment
        .strip_prefix('v')
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

fn unquote(literal: &str) -> Option<&str> {
    let inner = literal
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .or_else(|| literal.strip_prefix('`').and_then(|s| s.strip_suffix('`')))?;
    if inner.is_empty() || inner.contains('\\') {
        None
    } else {
        Some(inner)
    }
}

/// Builds the import table of one file.
pub fn resolve_imports(tree: &SyntaxTree) -> ImportTable {
    let mut table = ImportTable::default();
    for decl in tree.children(tree.root()) {
        if tree.kind(*decl) != NodeKind::ImportDecl {
            continue;
        }
        for spec in tree.descendants(*decl) {
            if tree.grammar_kind(spec) != "import_spec" {
                continue;
            }
            let Some(path) = tree
                .child_by_field(spec, "path")
                .and_then(|p| unquote(tree.text(p)))
            else {
                log::debug!(
                    "{}:{}: skipping unparseable import spec",
                    tree.file_path(),
                    tree.node(spec).line
                );
                continue;
            };
            match tree.child_by_field(spec, "name") {
                Some(name) => match tree.grammar_kind(name) {
                    "dot" => {
                        table.dot_imports.insert(path.to_string());
                    }
                    "blank_identifier" => {
                        table.blank_imports.insert(path.to_string());
                    }
                    _ => {
                        table
                            .entries
                            .insert(tree.text(name).to_string(), path.to_string());
                    }
                },
                None => {
                    table
                        .entries
                        .insert(default_package_name(path).to_string(), path.to_string());
                }
            }
        }
    }
    table
}
