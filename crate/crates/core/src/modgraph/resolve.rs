use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::gomod::{parse_gomod, path_has_prefix, ModuleInfo, ReplaceTarget};
use super::ModGraphError;

/// Module path used for standard-library packages.
pub const STD_MODULE: &str = "std";

/// Directories consulted when resolving imports. Nothing is fetched.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResolverRoots {
    pub module_cache: Option<PathBuf>,
    pub vendor_dir: Option<PathBuf>,
    pub goroot_src: Option<PathBuf>,
}

/// A package located on disk together with its owning module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedPackage {
    pub package_path: String,
    pub dir: PathBuf,
    pub module: Arc<ModuleInfo>,
}

/// Whether an import path belongs to the standard library.
pub fn is_std_path(import_path: &str) -> bool {
    let first = import_path.split('/').next().unwrap_or("");
    !first.contains('.')
}

/// Standard-library classification used for reporting: std paths plus the
/// `golang.org/x/sys` module.
pub fn is_std_package(package_path: &str, module_path: &str) -> bool {
    module_path == STD_MODULE
        || module_path == "golang.org/x/sys"
        || path_has_prefix(package_path, "golang.org/x/sys")
        || (module_path.is_empty() && is_std_path(package_path))
}

/// Module-cache case escaping: each uppercase letter becomes `!` + lowercase.
pub fn escape_module_path(path: &str) -> String {
    let mut out = String::with_capacity(path.len());
    for c in path.chars() {
        if c.is_ascii_uppercase() {
            out.push('!');
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn subpath<'a>(import_path: &'a str, module_path: &str) -> &'a str {
    import_path[module_path.len()..].trim_start_matches('/')
}

fn existing_dir(dir: PathBuf) -> Option<PathBuf> {
    dir.is_dir().then_some(dir)
}

fn unresolved(import_path: &str, reason: impl Into<String>) -> ModGraphError {
    ModGraphError::UnresolvedImport {
        import_path: import_path.to_string(),
        reason: reason.into(),
    }
}

/// Reads `dir/go.mod` when present; otherwise synthesizes a module with no
/// requirements (pre-module dependencies have no manifest).
pub fn load_module(dir: &Path, module_path: &str, version: &str) -> ModuleInfo {
    let parsed =
        std::fs::read_to_string(dir.join("go.mod"))
            .ok()
            .and_then(|text| match parse_gomod(&text) {
                Ok(info) => Some(info),
                Err(err) => {
                    log::warn!("{}: {err}", dir.join("go.mod").display());
                    None
                }
            });
    let mut info = parsed.unwrap_or_default();
    info.module_path = module_path.to_string();
    info.version = version.to_string();
    info.source_dir = dir.to_path_buf();
    info
}

fn cache_dir(cache: &Path, module_path: &str, version: &str) -> PathBuf {
    cache.join(format!(
        "{}@{}",
        escape_module_path(module_path),
        escape_module_path(version)
    ))
}

/// Locates the directory of `import_path` as seen from `requirer` (whose
/// `require` and `replace` directives choose the module version).
///
/// Resolution order: the root module's own tree, the vendor directory, the
/// module cache, then `goroot_src` for standard-library paths.
pub fn resolve_package_dir(
    import_path: &str,
    root: &ModuleInfo,
    roots: &ResolverRoots,
) -> Result<ResolvedPackage, ModGraphError> {
    resolve_with(import_path, root, root, roots, &mut |dir, path, version| {
        Arc::new(load_module(dir, path, version))
    })
}

fn resolve_with(
    import_path: &str,
    root: &ModuleInfo,
    requirer: &ModuleInfo,
    roots: &ResolverRoots,
    load: &mut dyn FnMut(&Path, &str, &str) -> Arc<ModuleInfo>,
) -> Result<ResolvedPackage, ModGraphError> {
    let found = |dir: PathBuf, module: Arc<ModuleInfo>| ResolvedPackage {
        package_path: import_path.to_string(),
        dir,
        module,
    };

    if root.owns(import_path) {
        let dir = root
            .source_dir
            .join(subpath(import_path, &root.module_path));
        return existing_dir(dir)
            .map(|dir| found(dir, Arc::new(root.clone())))
            .ok_or_else(|| unresolved(import_path, "missing directory in root module"));
    }

    let requirement = root
        .require_for(import_path)
        .map(|r| (root, r))
        .or_else(|| requirer.require_for(import_path).map(|r| (requirer, r)));

    if let Some(vendor) = &roots.vendor_dir {
        if let Some(dir) = existing_dir(vendor.join(import_path)) {
            let (module_path, version) = requirement
                .map(|(_, r)| (r.module_path.as_str(), r.version.as_str()))
                .unwrap_or((import_path, ""));
            let module = load(&vendor.join(module_path), module_path, version);
            return Ok(found(dir, module));
        }
    }

    if let Some((declarer, req)) = requirement {
        let sub = subpath(import_path, &req.module_path);
        let replacement = root
            .replacement(&req.module_path, &req.version)
            .map(|t| (root, t))
            .or_else(|| {
                declarer
                    .replacement(&req.module_path, &req.version)
                    .map(|t| (declarer, t))
            });
        let module_dir = match replacement {
            Some((owner, ReplaceTarget::Dir(dir))) => Some(owner.source_dir.join(dir)),
            Some((
                _,
                ReplaceTarget::Module {
                    module_path,
                    version,
                },
            )) => roots
                .module_cache
                .as_ref()
                .map(|cache| cache_dir(cache, module_path, version)),
            None => roots
                .module_cache
                .as_ref()
                .map(|cache| cache_dir(cache, &req.module_path, &req.version)),
        };
        let Some(module_dir) = module_dir else {
            return Err(unresolved(import_path, "no module cache configured"));
        };
        let Some(dir) = existing_dir(module_dir.join(sub)) else {
            return Err(unresolved(
                import_path,
                format!("{}@{} not in module cache", req.module_path, req.version),
            ));
        };
        let module = load(&module_dir, &req.module_path, &req.version);
        return Ok(found(dir, module));
    }

    if is_std_path(import_path) {
        let Some(goroot) = &roots.goroot_src else {
            return Err(unresolved(
                import_path,
                "standard library source not configured",
            ));
        };
        let dir = existing_dir(goroot.join(import_path))
            .ok_or_else(|| unresolved(import_path, "not found in goroot"))?;
        let module = load(goroot, STD_MODULE, "");
        return Ok(found(dir, module));
    }

    Err(unresolved(import_path, "no matching require directive"))
}

/// Resolver shared by the dependency walk; caches parsed module manifests.
#[derive(Debug)]
pub struct Resolver {
    root: Arc<ModuleInfo>,
    roots: ResolverRoots,
    modules: Mutex<HashMap<(String, String), Arc<ModuleInfo>>>,
}

impl Resolver {
    pub fn new(root: ModuleInfo, roots: ResolverRoots) -> Self {
        Resolver {
            root: Arc::new(root),
            roots,
            modules: Mutex::new(HashMap::new()),
        }
    }

    pub fn root(&self) -> &Arc<ModuleInfo> {
        &self.root
    }

    pub fn roots(&self) -> &ResolverRoots {
        &self.roots
    }

    pub fn resolve(
        &self,
        import_path: &str,
        requirer: &ModuleInfo,
    ) -> Result<ResolvedPackage, ModGraphError> {
        let mut load = |dir: &Path, path: &str, version: &str| {
            let key = (path.to_string(), version.to_string());
            if let Some(m) = self.modules.lock().expect("module cache lock").get(&key) {
                return m.clone();
            }
            let module = Arc::new(load_module(dir, path, version));
            self.modules
                .lock()
                .expect("module cache lock")
                .entry(key)
                .or_insert(module)
                .clone()
        };
        let mut resolved = resolve_with(import_path, &self.root, requirer, &self.roots, &mut load)?;
        if resolved.module.module_path == self.root.module_path
            && resolved.module.version.is_empty()
        {
            resolved.module = self.root.clone();
        }
        Ok(resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mkdir(p: &Path) {
        std::fs::create_dir_all(p).unwrap();
    }

    #[test]
    fn escaping() {
        assert_eq!(
            escape_module_path("github.com/BurntSushi/toml"),
            "github.com/!burnt!sushi/toml"
        );
        assert_eq!(escape_module_path("example.com/lower"), "example.com/lower");
    }

    #[test]
    fn std_classification() {
        assert!(is_std_path("fmt"));
        assert!(is_std_path("net/http"));
        assert!(!is_std_path("example.com/x"));
        assert!(is_std_package("golang.org/x/sys/unix", "golang.org/x/sys"));
        assert!(!is_std_package("golang.org/x/net/html", "golang.org/x/net"));
    }

    #[test]
    fn resolution_order() {
        let tmp = tempfile::tempdir().unwrap();
        let base = tmp.path();
        let root_dir = base.join("app");
        mkdir(&root_dir.join("internal/conv"));
        let cache = base.join("cache");
        mkdir(&cache.join("github.com/!burnt!sushi/toml@v1.0.0/internal"));
        let goroot = base.join("goroot/src");
        mkdir(&goroot.join("fmt"));
        let vendor = base.join("vendor");
        mkdir(&vendor.join("example.com/vend/pkg"));
        mkdir(&base.join("local/sub"));

        let root = ModuleInfo {
            source_dir: root_dir.clone(),
            ..parse_gomod(
                "module example.com/app\nrequire (\n\tgithub.com/BurntSushi/toml v1.0.0\n\texample.com/vend v0.1.0\n\texample.com/local v1.0.0\n)\nreplace example.com/local => ../local\n",
            )
            .unwrap()
        };
        let roots = ResolverRoots {
            module_cache: Some(cache.clone()),
            vendor_dir: None,
            goroot_src: Some(goroot.clone()),
        };

        let r = resolve_package_dir("example.com/app", &root, &roots).unwrap();
        assert_eq!(r.dir, root_dir);
        assert_eq!(r.module.module_path, "example.com/app");
        let r = resolve_package_dir("example.com/app/internal/conv", &root, &roots).unwrap();
        assert_eq!(r.dir, root_dir.join("internal/conv"));

        let r = resolve_package_dir("github.com/BurntSushi/toml", &root, &roots).unwrap();
        assert_eq!(r.dir, cache.join("github.com/!burnt!sushi/toml@v1.0.0"));
        assert_eq!(r.module.version, "v1.0.0");
        let r = resolve_package_dir("github.com/BurntSushi/toml/internal", &root, &roots).unwrap();
        assert_eq!(
            r.dir,
            cache.join("github.com/!burnt!sushi/toml@v1.0.0/internal")
        );

        let r = resolve_package_dir("fmt", &root, &roots).unwrap();
        assert_eq!(r.dir, goroot.join("fmt"));
        assert_eq!(r.module.module_path, STD_MODULE);

        let r = resolve_package_dir("example.com/local/sub", &root, &roots).unwrap();
        assert_eq!(r.dir, root_dir.join("../local/sub"));

        let err = resolve_package_dir("example.com/vend/pkg", &root, &roots).unwrap_err();
        assert!(matches!(err, ModGraphError::UnresolvedImport { .. }));
        let vendored = ResolverRoots {
            vendor_dir: Some(vendor.clone()),
            ..roots.clone()
        };
        let r = resolve_package_dir("example.com/vend/pkg", &root, &vendored).unwrap();
        assert_eq!(r.dir, vendor.join("example.com/vend/pkg"));
        assert_eq!(r.module.module_path, "example.com/vend");

        assert!(resolve_package_dir("example.com/unknown", &root, &roots).is_err());
        assert!(resolve_package_dir("os", &root, &roots).is_err());
        let no_goroot = ResolverRoots {
            goroot_src: None,
            ..roots
        };
        assert!(resolve_package_dir("fmt", &root, &no_goroot).is_err());
    }

    #[test]
    fn requirer_fallback_and_manifest_cache() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = tmp.path().join("cache");
        let dep_dir = cache.join("example.com/dep@v1.0.0");
        mkdir(&dep_dir);
        std::fs::write(
            dep_dir.join("go.mod"),
            "module example.com/dep\nrequire example.com/leaf v0.2.0\n",
        )
        .unwrap();
        mkdir(&cache.join("example.com/leaf@v0.2.0"));
        let root = ModuleInfo {
            source_dir: tmp.path().join("app"),
            ..parse_gomod("module example.com/app\nrequire example.com/dep v1.0.0\n").unwrap()
        };
        let resolver = Resolver::new(
            root,
            ResolverRoots {
                module_cache: Some(cache),
                ..Default::default()
            },
        );
        let dep = resolver
            .resolve("example.com/dep", &resolver.root().clone())
            .unwrap();
        assert_eq!(dep.module.requires.len(), 1);
        assert!(resolver
            .resolve("example.com/leaf", &resolver.root().clone())
            .is_err());
        let leaf = resolver.resolve("example.com/leaf", &dep.module).unwrap();
        assert_eq!(leaf.module.version, "v0.2.0");
        let again = resolver
            .resolve("example.com/dep", &resolver.root().clone())
            .unwrap();
        assert!(Arc::ptr_eq(&dep.module, &again.module));
    }
}
