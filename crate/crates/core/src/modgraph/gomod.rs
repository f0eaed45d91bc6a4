use std::collections::BTreeMap;
use std::path::PathBuf;

use super::ModGraphError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Require {
    pub module_path: String,
    pub version: String,
    pub indirect: bool,
}

/// Right-hand side of a `replace` directive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplaceTarget {
    /// Local directory, relative to the declaring module's root unless absolute.
    Dir(PathBuf),
    Module {
        module_path: String,
        version: String,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModuleInfo {
    pub module_path: String,
    /// Empty for the root module.
    pub version: String,
    pub source_dir: PathBuf,
    pub go_version: Option<String>,
    pub requires: Vec<Require>,
    /// Keyed by (module path, optional version restriction).
    pub replaces: BTreeMap<(String, Option<String>), ReplaceTarget>,
    pub excludes: Vec<(String, String)>,
}

impl ModuleInfo {
    /// Longest `require` entry whose module path prefixes `import_path`.
    pub fn require_for(&self, import_path: &str) -> Option<&Require> {
        self.requires
            .iter()
            .filter(|r| path_has_prefix(import_path, &r.module_path))
            .max_by_key(|r| r.module_path.len())
    }

    pub fn replacement(&self, module_path: &str, version: &str) -> Option<&ReplaceTarget> {
        self.replaces
            .get(&(module_path.to_string(), Some(version.to_string())))
            .or_else(|| self.replaces.get(&(module_path.to_string(), None)))
    }

    /// Whether `import_path` lies inside this module's path space.
    pub fn owns(&self, import_path: &str) -> bool {
        !self.module_path.is_empty() && path_has_prefix(import_path, &self.module_path)
    }
}

/// Segment-aware prefix test: `a/b` prefixes `a/b` and `a/b/c` but not `a/bc`.
pub fn path_has_prefix(path: &str, prefix: &str) -> bool {
    path == prefix
        || (path.len() > prefix.len()
            && path.starts_with(prefix)
            && path.as_bytes()[prefix.len()] == b'/')
}

fn strip_comment(line: &str) -> (&str, &str) {
    let mut in_quote: Option<char> = None;
    let mut prev = '\0';
    for (i, c) in line.char_indices() {
        match in_quote {
            Some(q) if c == q && !(q == '"' && prev == '\\') => in_quote = None,
            Some(_) => {}
            None if c == '"' || c == '`' => in_quote = Some(c),
            None if c == '/' && prev == '/' => return (&line[..i - 1], &line[i + 1..]),
            None => {}
        }
        prev = c;
    }
    (line, "")
}

fn tokens(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' || c == '`' {
            chars.next();
            let mut tok = String::new();
            let mut escaped = false;
            for d in chars.by_ref() {
                if escaped {
                    tok.push(d);
                    escaped = false;
                } else if c == '"' && d == '\\' {
                    escaped = true;
                } else if d == c {
                    break;
                } else {
                    tok.push(d);
                }
            }
            out.push(tok);
        } else if c == '(' || c == ')' {
            chars.next();
            out.push(c.to_string());
        } else if c == '=' && {
            let mut look = chars.clone();
            look.next();
            look.peek() == Some(&'>')
        } {
            chars.next();
            chars.next();
            out.push("=>".to_string());
        } else {
            let mut tok = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_whitespace() || d == '"' || d == '`' || d == '(' || d == ')' {
                    break;
                }
                tok.push(d);
                chars.next();
            }
            out.push(tok);
        }
    }
    out
}

fn is_local_path(target: &str) -> bool {
    target.starts_with("./")
        || target.starts_with("../")
        || target.starts_with('/')
        || target == "."
        || target == ".."
}

fn apply_directive(
    info: &mut ModuleInfo,
    verb: &str,
    args: &[String],
    comment: &str,
    line_no: usize,
) -> bool {
    match (verb, args) {
        ("module", [path, ..]) => {
            info.module_path = path.clone();
            true
        }
        ("go", [version, ..]) => {
            info.go_version = Some(version.clone());
            true
        }
        ("require", [path, version, ..]) => {
            info.requires.push(Require {
                module_path: path.clone(),
                version: version.clone(),
                indirect: comment.trim().starts_with("indirect"),
            });
            true
        }
        ("exclude", [path, version, ..]) => {
            info.excludes.push((path.clone(), version.clone()));
            true
        }
        ("replace", _) => {
            let Some(arrow) = args.iter().position(|a| a == "=>") else {
                log::warn!("go.mod:{line_no}: replace without `=>`");
                return false;
            };
            let (lhs, rhs) = (&args[..arrow], &args[arrow + 1..]);
            let key = match lhs {
                [path] => (path.clone(), None),
                [path, version] => (path.clone(), Some(version.clone())),
                _ => return false,
            };
            let target = match rhs {
                [dir] if is_local_path(dir) => ReplaceTarget::Dir(PathBuf::from(dir)),
                [path, version] => ReplaceTarget::Module {
                    module_path: path.clone(),
                    version: version.clone(),
                },
                _ => {
                    log::warn!("go.mod:{line_no}: unrecognized replace target");
                    return false;
                }
            };
            info.replaces.insert(key, target);
            true
        }
        _ => {
            log::debug!("go.mod:{line_no}: ignoring directive `{verb}`");
            false
        }
    }
}

/// Parses the body of a `go.mod` file.
pub fn parse_gomod(text: &str) -> Result<ModuleInfo, ModGraphError> {
    let mut info = ModuleInfo::default();
    let mut block: Option<String> = None;
    let mut saw_module = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (code, comment) = strip_comment(raw);
        let toks = tokens(code);
        if toks.is_empty() {
            continue;
        }
        if let Some(verb) = &block {
            if toks[0] == ")" {
                block = None;
                continue;
            }
            let verb = verb.clone();
            saw_module |=
                apply_directive(&mut info, &verb, &toks, comment, line_no) && verb == "module";
            continue;
        }
        let verb = toks[0].as_str();
        if toks.get(1).map(String::as_str) == Some("(") {
            block = Some(verb.to_string());
            continue;
        }
        saw_module |=
            apply_directive(&mut info, verb, &toks[1..], comment, line_no) && verb == "module";
    }
    if !saw_module || info.module_path.is_empty() {
        return Err(ModGraphError::MalformedManifest(
            "no `module` directive".to_string(),
        ));
    }
    Ok(info)
}
