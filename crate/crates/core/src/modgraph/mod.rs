//! Module manifests, import resolution and the package dependency DAG.

mod gomod;
mod graph;
mod resolve;
mod summary;

pub use gomod::{parse_gomod, path_has_prefix, ModuleInfo, ReplaceTarget, Require};
pub use graph::{
    build_dep_tree, DepGraph, LoadedPackage, PackageLoader, PackageNode, UnresolvedImport,
};
pub use resolve::{
    escape_module_path, is_std_package, is_std_path, load_module, resolve_package_dir,
    ResolvedPackage, Resolver, ResolverRoots, STD_MODULE,
};
pub use summary::{summarize_project, CorpusProjectSummary, SummaryOptions, UnsafePackage};

use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::census::{scan_package, PackageIdentity};
use crate::frontend::{self, EnumerateOptions, ImportTable, SyntaxTree};

#[derive(Debug, Error)]
pub enum ModGraphError {
    #[error("malformed go.mod: {0}")]
    MalformedManifest(String),
    #[error("unresolved import {import_path}: {reason}")]
    UnresolvedImport { import_path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<frontend::FrontendError> for ModGraphError {
    fn from(err: frontend::FrontendError) -> Self {
        match err {
            frontend::FrontendError::Io { path, source } => ModGraphError::Io { path, source },
        }
    }
}

/// Parsed files of one package directory with their import tables.
pub struct ParsedPackage {
    pub files: Vec<SyntaxTree>,
    pub imports: Vec<ImportTable>,
}

impl ParsedPackage {
    pub fn merged_imports(&self) -> ImportTable {
        let mut merged = ImportTable::default();
        for t in &self.imports {
            merged.merge(t);
        }
        merged
    }
}

pub fn parse_package(dir: &Path, opts: EnumerateOptions) -> Result<ParsedPackage, ModGraphError> {
    let paths = frontend::enumerate_package(dir, opts)?;
    let files = paths
        .iter()
        .map(|p| frontend::parse_path(p))
        .collect::<Result<Vec<_>, _>>()?;
    let imports = files.iter().map(frontend::resolve_imports).collect();
    Ok(ParsedPackage { files, imports })
}

/// Filesystem-backed loader used by the CLI.
pub struct FsLoader {
    pub resolver: Resolver,
    pub enumerate: EnumerateOptions,
    pub scan_std: bool,
}

impl PackageLoader for FsLoader {
    fn resolve(
        &self,
        import_path: &str,
        importer: &ModuleInfo,
    ) -> Result<ResolvedPackage, ModGraphError> {
        self.resolver.resolve(import_path, importer)
    }

    fn load(&self, package: &ResolvedPackage) -> LoadedPackage {
        let parsed = match parse_package(&package.dir, self.enumerate) {
            Ok(p) => p,
            Err(err) => {
                log::warn!("{}: {err}", package.package_path);
                return LoadedPackage::default();
            }
        };
        let identity = PackageIdentity {
            package_path: package.package_path.clone(),
            module_path: package.module.module_path.clone(),
            module_version: package.module.version.clone(),
        };
        let findings = scan_package(&parsed.files, &parsed.imports, &identity);
        let imports = parsed
            .merged_imports()
            .edge_paths()
            .into_iter()
            .map(str::to_string)
            .collect();
        LoadedPackage {
            imports,
            findings,
            file_count: parsed.files.len(),
            parse_error_files: parsed.files.iter().filter(|f| f.had_parse_errors()).count(),
        }
    }

    fn scan_std(&self) -> bool {
        self.scan_std
    }
}

fn lexical_parent(path: &Path) -> PathBuf {
    match path.components().next_back() {
        Some(Component::Normal(_)) => {
            let parent = path.parent().unwrap_or(Path::new(""));
            if parent.as_os_str().is_empty() {
                PathBuf::from(".")
            } else {
                parent.to_path_buf()
            }
        }
        Some(Component::CurDir) | None => PathBuf::from(".."),
        _ => path.join(".."),
    }
}

/// Nearest directory at or above `start` that contains a `go.mod`, expressed
/// relative to `start` the same way `start` was given.
pub fn find_module_root(start: &Path) -> Option<PathBuf> {
    let mut shown = start.to_path_buf();
    let mut abs = std::path::absolute(start).ok()?;
    loop {
        if abs.join("go.mod").is_file() {
            return Some(shown);
        }
        if !abs.pop() {
            return None;
        }
        shown = lexical_parent(&shown);
    }
}

/// Opens the module that owns `target`. Directories outside any module get a
/// synthetic root module named after the directory.
pub fn open_root_module(target: &Path) -> Result<ModuleInfo, ModGraphError> {
    if !target.is_dir() {
        return Err(ModGraphError::Io {
            path: target.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }
    match find_module_root(target) {
        Some(root) => {
            let manifest = root.join("go.mod");
            let text = std::fs::read_to_string(&manifest).map_err(|source| ModGraphError::Io {
                path: manifest.display().to_string(),
                source,
            })?;
            let mut info = parse_gomod(&text)?;
            info.source_dir = root;
            Ok(info)
        }
        None => {
            let name = std::path::absolute(target)
                .ok()
                .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .unwrap_or_else(|| "main".to_string());
            Ok(ModuleInfo {
                module_path: name,
                source_dir: target.to_path_buf(),
                ..Default::default()
            })
        }
    }
}

fn package_path_for(module: &ModuleInfo, dir: &Path) -> String {
    let abs_dir = std::path::absolute(dir).unwrap_or_else(|_| dir.to_path_buf());
    let abs_root =
        std::path::absolute(&module.source_dir).unwrap_or_else(|_| module.source_dir.clone());
    let normalize = |p: &Path| -> PathBuf {
        let mut out = PathBuf::new();
        for c in p.components() {
            match c {
                Component::ParentDir => {
                    out.pop();
                }
                Component::CurDir => {}
                other => out.push(other),
            }
        }
        out
    };
    let rel = normalize(&abs_dir)
        .strip_prefix(normalize(&abs_root))
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let rel: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    if rel.is_empty() {
        module.module_path.clone()
    } else {
        format!("{}/{}", module.module_path, rel.join("/"))
    }
}

fn skip_dir(name: &str) -> bool {
    name == "vendor" || name == "testdata" || name.starts_with('.') || name.starts_with('_')
}

/// Package directories named by one command-line target. A trailing `/...`
/// selects every package below the directory within the same module.
pub fn discover_packages(
    target: &Path,
    recursive: bool,
    module: &Arc<ModuleInfo>,
    opts: EnumerateOptions,
) -> Result<Vec<ResolvedPackage>, ModGraphError> {
    let mut dirs = Vec::new();
    if recursive {
        let mut stack = vec![target.to_path_buf()];
        while let Some(dir) = stack.pop() {
            let nested_module = dir != target && dir.join("go.mod").is_file();
            if nested_module {
                continue;
            }
            dirs.push(dir.clone());
            let entries = std::fs::read_dir(&dir).map_err(|source| ModGraphError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            for entry in entries.flatten() {
                let name = entry.file_name().to_string_lossy().into_owned();
                if entry.file_type().is_ok_and(|t| t.is_dir()) && !skip_dir(&name) {
                    stack.push(entry.path());
                }
            }
        }
        dirs.sort();
    } else {
        dirs.push(target.to_path_buf());
    }
    let mut packages = Vec::new();
    for dir in dirs {
        let files = frontend::enumerate_package(&dir, opts)?;
        if files.is_empty() && recursive {
            continue;
        }
        packages.push(ResolvedPackage {
            package_path: package_path_for(module, &dir),
            dir,
            module: module.clone(),
        });
    }
    Ok(packages)
}

/// Splits a `dir/...` pattern into the directory and the recursive flag.
pub fn split_pattern(target: &str) -> (PathBuf, bool) {
    match target.strip_suffix("...") {
        Some(rest) => {
            let rest = rest.trim_end_matches('/');
            (
                PathBuf::from(if rest.is_empty() { "." } else { rest }),
                true,
            )
        }
        None => (PathBuf::from(target), false),
    }
}

/// Resolves root packages for `target` and walks the dependency DAG.
pub fn analyze_target(
    target: &str,
    roots: &ResolverRoots,
    enumerate: EnumerateOptions,
    scan_std: bool,
    force_recursive: bool,
) -> Result<DepGraph, ModGraphError> {
    let (dir, recursive) = split_pattern(target);
    let module = open_root_module(&dir)?;
    let loader = FsLoader {
        resolver: Resolver::new(module, roots.clone()),
        enumerate,
        scan_std,
    };
    let module = loader.resolver.root().clone();
    let packages = discover_packages(&dir, recursive || force_recursive, &module, enumerate)?;
    Ok(build_dep_tree(&packages, &loader))
}

/// Parses many package directories in parallel, preserving order.
pub fn parse_packages(
    dirs: &[PathBuf],
    opts: EnumerateOptions,
) -> Vec<Result<ParsedPackage, ModGraphError>> {
    dirs.par_iter().map(|d| parse_package(d, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns() {
        assert_eq!(split_pattern("./..."), (PathBuf::from("."), true));
        assert_eq!(split_pattern("a/b/..."), (PathBuf::from("a/b"), true));
        assert_eq!(split_pattern("a/b"), (PathBuf::from("a/b"), false));
    }

    #[test]
    fn module_root_and_package_paths() {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().join("proj");
        std::fs::create_dir_all(root.join("pkg/inner")).unwrap();
        std::fs::create_dir_all(root.join("vendor/x")).unwrap();
        std::fs::create_dir_all(root.join("sub")).unwrap();
        std::fs::write(root.join("go.mod"), "module example.com/proj\n").unwrap();
        std::fs::write(root.join("main.go"), "package main\n").unwrap();
        std::fs::write(root.join("pkg/inner/a.go"), "package inner\n").unwrap();
        std::fs::write(root.join("vendor/x/x.go"), "package x\n").unwrap();
        std::fs::write(root.join("sub/go.mod"), "module example.com/sub\n").unwrap();
        std::fs::write(root.join("sub/s.go"), "package sub\n").unwrap();

        let module = Arc::new(open_root_module(&root.join("pkg/inner")).unwrap());
        assert_eq!(module.module_path, "example.com/proj");
        let pkgs = discover_packages(&root, true, &module, EnumerateOptions::default()).unwrap();
        let paths: Vec<_> = pkgs.iter().map(|p| p.package_path.as_str()).collect();
        assert_eq!(paths, ["example.com/proj", "example.com/proj/pkg/inner"]);
    }

    #[test]
    fn missing_target_is_io_error() {
        assert!(matches!(
            open_root_module(Path::new("/definitely/not/here")),
            Err(ModGraphError::Io { .. })
        ));
    }
}
