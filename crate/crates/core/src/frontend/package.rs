use std::path::{Path, PathBuf};

use super::FrontendError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub include_tests: bool,
}

/// Lists the `.go` files of one package directory (non-recursive), sorted.
pub fn enumerate_package(
    dir: &Path,
    opts: EnumerateOptions,
) -> Result<Vec<PathBuf>, FrontendError> {
    let io_err = |source| FrontendError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let entry = entry.map_err(io_err)?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if !name.ends_with(".go") || name.starts_with('.') || name.starts_with('_') {
            continue;
        }
        if !opts.include_tests && name.ends_with("_test.go") {
            continue;
        }
        if !entry.file_type().map_err(io_err)?.is_file() {
            continue;
        }
        files.push(entry.path());
    }
    files.sort();
    Ok(files)
}
