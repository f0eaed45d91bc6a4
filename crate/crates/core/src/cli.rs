//! Command-line entry point: argument parsing, orchestration and exit codes.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::frontend::EnumerateOptions;
use crate::lints::{lint_package, Diagnostic, LintOptions, Severity};
use crate::modgraph::{
    analyze_target, discover_packages, find_module_root, is_std_path, open_root_module,
    parse_package, split_pattern, summarize_project, DepGraph, ModGraphError, ResolverRoots,
    SummaryOptions,
};
use crate::report::{
    census_json, emit_census_csv, emit_diagnostics, emit_stats, render_tree, stats_csv,
    DiagnosticFormat, ReportError, TreeOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

const MODCACHE_ENV: &str = "UNSAFE_AUDIT_MODCACHE";

#[derive(Debug, Parser)]
#[command(
    name = "unsafe-audit",
    version,
    about = "Audit unsafe usage in Go projects and their dependencies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count and classify unsafe usages across packages and their dependencies.
    Census(CommonArgs),
    /// Run the slice-header and struct-cast passes.
    Lint(CommonArgs),
    /// Aggregate census results over several project roots.
    Stats(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Tree,
    Text,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Package directories; a trailing `/...` includes every package below.
    targets: Vec<String>,
    #[arg(long)]
    include_tests: bool,
    #[arg(long)]
    include_std: bool,
    #[arg(long, value_name = "N")]
    max_depth: Option<u32>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_name = "DIR")]
    module_cache: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    vendor: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    goroot_src: Option<PathBuf>,
    #[arg(long)]
    show_code: bool,
    /// Also lint resolved dependencies.
    #[arg(long)]
    deps: bool,
    /// Count only direct fields when comparing struct layouts.
    #[arg(long)]
    structcast_flat: bool,
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Census,
    Lint,
    Stats,
}

/// Fully resolved configuration for one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub subcommand: Mode,
    pub target_dirs: Vec<String>,
    pub include_tests: bool,
    pub include_std: bool,
    pub max_depth: Option<u32>,
    pub format: OutputFormat,
    pub module_cache: Option<PathBuf>,
    pub vendor_dir: Option<PathBuf>,
    pub goroot_src: Option<PathBuf>,
    pub show_code: bool,
    pub deps: bool,
    pub structcast_flat: bool,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Tree,
    Text,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    ModGraph(#[from] ModGraphError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunConfig {
    fn from_args(subcommand: Mode, a: CommonArgs) -> Result<Self, CliError> {
        let format = match (subcommand, a.format) {
            (_, Some(Format::Csv)) if subcommand != Mode::Lint => OutputFormat::Csv,
            (_, Some(Format::Json)) => OutputFormat::Json,
            (Mode::Census, Some(Format::Tree | Format::Text)) => OutputFormat::Tree,
            (Mode::Lint, Some(Format::Text)) => OutputFormat::Text,
            (_, Some(other)) => {
                return Err(CliError::Usage(format!(
                    "--format {} is not supported here",
                    other
                        .to_possible_value()
                        .expect("no skipped variants")
                        .get_name()
                )))
            }
            (Mode::Census, None) => OutputFormat::Tree,
            (Mode::Lint, None) => OutputFormat::Text,
            (Mode::Stats, None) => OutputFormat::Json,
        };
        let mut targets = a.targets;
        if targets.is_empty() {
            if subcommand == Mode::Stats {
                return Err(CliError::Usage(
                    "stats needs at least one project directory".into(),
                ));
            }
            targets.push(".".into());
        }
        if a.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            subcommand,
            target_dirs: targets,
            include_tests: a.include_tests,
            include_std: a.include_std,
            max_depth: a.max_depth,
            format,
            module_cache: a.module_cache.or_else(|| {
                std::env::var_os(MODCACHE_ENV)
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from)
            }),
            vendor_dir: a.vendor,
            goroot_src: a.goroot_src,
            show_code: a.show_code,
            deps: a.deps,
            structcast_flat: a.structcast_flat,
            output: a.output,
            jobs: a.jobs,
        })
    }

    fn enumerate(&self) -> EnumerateOptions {
        EnumerateOptions {
            include_tests: self.include_tests,
        }
    }

    /// Resolver roots for one target; a `vendor` directory next to the
    /// target's `go.mod` is used when no explicit one was given.
    fn roots_for(&self, dir: &Path) -> ResolverRoots {
        let vendor_dir = self.vendor_dir.clone().or_else(|| {
            find_module_root(dir)
                .map(|root| root.join("vendor"))
                .filter(|v| v.is_dir())
        });
        ResolverRoots {
            module_cache: self.module_cache.clone(),
            vendor_dir,
            goroot_src: self.goroot_src.clone(),
        }
    }
}

/// Parses arguments into a configuration. On failure returns the rendered
/// clap message and whether it is a help/version request.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, (String, bool)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let informational = matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        );
        (e.render().to_string(), informational)
    })?;
    let (sub, args) = match cli.command {
        Command::Census(a) => (Mode::Census, a),
        Command::Lint(a) => (Mode::Lint, a),
        Command::Stats(a) => (Mode::Stats, a),
    };
    RunConfig::from_args(sub, args).map_err(|e| (format!("error: {e}\n"), false))
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err((msg, informational)) => {
            if informational {
                print!("{msg}");
                return EXIT_OK;
            }
            eprint!("{msg}");
            return EXIT_ERROR;
        }
    };
    let result = match config.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&config)),
            Err(e) => Err(CliError::Usage(format!("cannot start {n} workers: {e}"))),
        },
        None => execute(&config),
    };
    match result {
        Ok((text, code)) => match write_output(&config, &text) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_ERROR
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Produces the report text and the exit code without touching stdout.
pub fn execute(config: &RunConfig) -> Result<(String, i32), CliError> {
    match config.subcommand {
        Mode::Census => census(config).map(|t| (t, EXIT_OK)),
        Mode::Lint => lint(config),
        Mode::Stats => stats(config).map(|t| (t, EXIT_OK)),
    }
}

fn analyze(config: &RunConfig, target: &str, force_recursive: bool) -> Result<DepGraph, CliError> {
    let (dir, _) = split_pattern(target);
    let graph = analyze_target(
        target,
        &config.roots_for(&dir),
        config.enumerate(),
        config.include_std,
        force_recursive,
    )?;
    for u in &graph.unresolved {
        // Standard-library gaps are expected whenever no GOROOT source is given.
        if is_std_path(&u.import_path) && config.goroot_src.is_none() {
            log::debug!(
                "{}: unresolved import {}: {}",
                u.importer,
                u.import_path,
                u.reason
            );
        } else {
            log::warn!(
                "{}: unresolved import {}: {}",
                u.importer,
                u.import_path,
                u.reason
            );
        }
    }
    Ok(graph)
}

fn census(config: &RunConfig) -> Result<String, CliError> {
    let graphs = config
        .target_dirs
        .iter()
        .map(|t| analyze(config, t, false))
        .collect::<Result<Vec<_>, _>>()?;
    match config.format {
        OutputFormat::Csv => {
            let mut findings: Vec<_> = graphs
                .iter()
                .flat_map(|g| {
                    g.findings().into_iter().filter(|f| {
                        config.include_std || !is_std_finding(g, &f.package_path, &f.module_version)
                    })
                })
                .collect();
            crate::census::sort_findings(&mut findings);
            findings.dedup();
            Ok(emit_census_csv(&findings))
        }
        OutputFormat::Json => {
            let mut docs = graphs
                .iter()
                .map(|g| census_json(g).and_then(|s| serde_json::from_str::<serde_json::Value>(&s)))
                .collect::<Result<Vec<_>, _>>()?;
            let value = if docs.len() == 1 {
                docs.pop().expect("one document")
            } else {
                serde_json::Value::Array(docs)
            };
            let mut out = serde_json::to_string_pretty(&value)?;
            out.push('\n');
            Ok(out)
        }
        OutputFormat::Tree | OutputFormat::Text => {
            let opts = TreeOptions {
                max_depth: config.max_depth,
                show_std: config.include_std,
                show_code: config.show_code,
            };
            Ok(graphs.iter().map(|g| render_tree(g, opts)).collect())
        }
    }
}

fn is_std_finding(graph: &DepGraph, package: &str, version: &str) -> bool {
    graph.nodes.iter().any(|n| {
        n.is_std && n.package_path == package && graph.modules[n.module].version == version
    })
}

fn lint(config: &RunConfig) -> Result<(String, i32), CliError> {
    let opts = LintOptions {
        structcast_flat: config.structcast_flat,
        ..LintOptions::default()
    };
    let mut dirs: Vec<PathBuf> = Vec::new();
    for target in &config.target_dirs {
        let (dir, recursive) = split_pattern(target);
        if config.deps {
            let graph = analyze(config, target, false)?;
            dirs.extend(
                graph
                    .nodes
                    .iter()
                    .filter(|n| n.resolved && (config.include_std || !n.is_std))
                    .filter_map(|n| n.dir.clone()),
            );
        } else {
            let module = std::sync::Arc::new(open_root_module(&dir)?);
            let packages = discover_packages(&dir, recursive, &module, config.enumerate())?;
            dirs.extend(packages.into_iter().map(|p| p.dir));
        }
    }
    dirs.sort();
    dirs.dedup();
    let per_package: Vec<Result<Vec<Diagnostic>, ModGraphError>> = {
        use rayon::prelude::*;
        dirs.par_iter()
            .map(|d| {
                parse_package(d, config.enumerate())
                    .map(|p| lint_package(&p.files, &p.imports, opts))
            })
            .collect()
    };
    let mut diags = Vec::new();
    for r in per_package {
        diags.extend(r?);
    }
    diags.sort();
    diags.dedup();
    let format = match config.format {
        OutputFormat::Json => DiagnosticFormat::Json,
        _ => DiagnosticFormat::Text,
    };
    let code = if diags.iter().any(|d| d.severity == Severity::Warning) {
        EXIT_WARNINGS
    } else {
        EXIT_OK
    };
    Ok((emit_diagnostics(&diags, format)?, code))
}

fn stats(config: &RunConfig) -> Result<String, CliError> {
    let summaries = config
        .target_dirs
        .iter()
        .map(|t| {
            let graph = analyze(config, t, true)?;
            Ok(summarize_project(
                &graph.root_module().module_path,
                &graph,
                SummaryOptions {
                    include_std: config.include_std,
                },
            ))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let (stats, json) = emit_stats(&summaries)?;
    Ok(match config.format {
        OutputFormat::Csv => stats_csv(&stats),
        _ => json,
    })
}

/// Writes to `--output` through a temporary file renamed into place, or to
/// stdout.
fn write_output(config: &RunConfig, text: &str) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    match &config.output {
        Some(path) => {
            let parent = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io(path))?;
            tmp.write_all(text.as_bytes()).map_err(io(path))?;
            tmp.persist(path).map_err(|e| io(path)(e.error))?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(io(Path::new("<stdout>")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, (String, bool)> {
        parse_args(std::iter::once("unsafe-audit").chain(args.iter().copied()))
    }

    #[test]
    fn defaults_per_subcommand() {
        let c = parse(&["census"]).unwrap();
        assert_eq!(c.format, OutputFormat::Tree);
        assert_eq!(c.target_dirs, ["."]);
        assert!(!c.include_tests && !c.include_std);
        assert_eq!(parse(&["lint", "x"]).unwrap().format, OutputFormat::Text);
        assert_eq!(parse(&["stats", "x"]).unwrap().format, OutputFormat::Json);
    }

    #[test]
    fn flags() {
        let c = parse(&[
            "census",
            "a",
            "b/...",
            "--include-tests",
            "--max-depth",
            "2",
            "--format",
            "csv",
            "--module-cache",
            "/mc",
            "--show-code",
            "--jobs",
            "4",
        ])
        .unwrap();
        assert_eq!(c.target_dirs, ["a", "b/..."]);
        assert!(c.include_tests && c.show_code);
        assert_eq!(c.max_depth, Some(2));
        assert_eq!(c.format, OutputFormat::Csv);
        assert_eq!(c.module_cache, Some(PathBuf::from("/mc")));
        assert_eq!(c.jobs, Some(4));
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["stats"]).is_err());
        assert!(parse(&["lint", "--format", "csv"]).is_err());
        assert!(parse(&["bogus"]).is_err());
        assert!(parse(&["census", "--jobs", "0"]).is_err());
        assert!(parse(&["--help"]).unwrap_err().1);
    }
}
