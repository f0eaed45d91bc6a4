//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the terminal.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{check_dag_invariants, dag_strategy, fixture, fixtures, observed_counts, read_oracle};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use unsafe_audit::census::{scan_package, ContextKind, PackageIdentity, TokenKind, UnsafeFinding};
use unsafe_audit::frontend::EnumerateOptions;
use unsafe_audit::lints::{lint_package, Diagnostic, LintOptions, Pass, Severity};
use unsafe_audit::modgraph::{
    analyze_target, parse_package, summarize_project, ResolverRoots, SummaryOptions,
};
use unsafe_audit::report::{depth_stats, emit_stats};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn scan(rel: &str) -> Result<Vec<UnsafeFinding>, String> {
    let parsed =
        parse_package(&fixture(rel), EnumerateOptions::default()).map_err(|e| e.to_string())?;
    Ok(scan_package(
        &parsed.files,
        &parsed.imports,
        &PackageIdentity::default(),
    ))
}

fn lint(rel: &str) -> Result<Vec<Diagnostic>, String> {
    let parsed =
        parse_package(&fixture(rel), EnumerateOptions::default()).map_err(|e| e.to_string())?;
    Ok(lint_package(
        &parsed.files,
        &parsed.imports,
        LintOptions::default(),
    ))
}

fn cli(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_unsafe-audit"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("UNSAFE_AUDIT_MODCACHE")
        .output()
        .map_err(|e| e.to_string())
}

fn census_exactness() -> Outcome {
    let start = Instant::now();
    let roots = ResolverRoots {
        module_cache: Some(fixture("corpus/modcache")),
        ..Default::default()
    };
    let target = format!("{}/...", fixture("corpus/app").display());
    let graph = analyze_target(&target, &roots, EnumerateOptions::default(), false, false)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let oracle = read_oracle(&fixture("corpus/oracle.csv"));
    ensure!(
        oracle.len() >= 10,
        "oracle covers {} packages",
        oracle.len()
    );
    let observed = observed_counts(&graph);
    ensure!(
        observed == oracle,
        "counts differ from oracle:\n{observed:#?}"
    );
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(())
}

fn tally(f: &[UnsafeFinding]) -> BTreeMap<(TokenKind, ContextKind), u64> {
    let mut out = BTreeMap::new();
    for x in f {
        *out.entry((x.token, x.context)).or_default() += 1;
    }
    out
}

fn sample_fidelity() -> Outcome {
    use ContextKind::*;
    use TokenKind::*;
    let l1 = tally(&scan("samples/in_place_cast")?);
    ensure!(
        l1 == BTreeMap::from([((UnsafePointer, Assignment), 1)]),
        "in-place cast: {l1:?}"
    );
    let l2 = tally(&scan("samples/escape_hiding")?);
    let want2 = BTreeMap::from([
        ((UnsafePointer, Parameter), 2),
        ((UnsafePointer, Assignment), 1),
        ((Uintptr, Assignment), 1),
    ]);
    ensure!(l2 == want2, "escape hiding: {l2:?}");
    let mut l3 = BTreeMap::new();
    for f in scan("samples/string_to_bytes")? {
        *l3.entry(f.token).or_insert(0u64) += 1;
    }
    let want3 = BTreeMap::from([
        (UnsafePointer, 2),
        (ReflectStringHeader, 1),
        (ReflectSliceHeader, 1),
    ]);
    ensure!(l3 == want3, "string to bytes: {l3:?}");
    Ok(())
}

fn sliceheader_pass() -> Outcome {
    let only_sliceheader = |d: &[Diagnostic]| d.iter().all(|x| x.pass == Pass::SliceheaderPass);
    let l3 = lint("lint/composite_literal")?;
    ensure!(
        l3.len() == 1 && only_sliceheader(&l3) && l3[0].line == 10,
        "string to bytes: {l3:?}"
    );
    let zero = lint("lint/zero_value")?;
    ensure!(
        !zero.is_empty() && only_sliceheader(&zero),
        "zero-value fixture: {zero:?}"
    );
    let safe = lint("lint/safe")?;
    ensure!(safe.is_empty(), "safe fixture: {safe:?}");
    let call = lint("lint/call")?;
    ensure!(
        !call.is_empty() && only_sliceheader(&call),
        "call fixture: {call:?}"
    );
    Ok(())
}

fn structcast_pass() -> Outcome {
    let warns = |d: &[Diagnostic], counts: &str| {
        d.len() == 1
            && d[0].pass == Pass::StructcastPass
            && d[0].severity == Severity::Warning
            && d[0].message.contains(counts)
    };
    let fwd = lint("structcast/mismatch")?;
    ensure!(warns(&fwd, "(1 vs 0)"), "mismatch: {fwd:?}");
    let rev = lint("structcast/reverse")?;
    ensure!(warns(&rev, "(0 vs 1)"), "reverse: {rev:?}");
    let same = lint("structcast/identical")?;
    ensure!(same.is_empty(), "identical: {same:?}");
    let uu = lint("structcast/uint_uintptr")?;
    ensure!(uu.is_empty(), "uint/uintptr: {uu:?}");
    Ok(())
}

fn dedup_invariants() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&dag_strategy(), |dag| {
            check_dag_invariants(&dag, &dag.build()).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string())
}

fn stats_correctness() -> Outcome {
    let (mean, sd) = depth_stats(&BTreeMap::from([(1, 1), (3, 2), (5, 1)]));
    ensure!(mean == 3.0, "mean {mean}");
    ensure!((sd - 2f64.sqrt()).abs() < 1e-9, "sd {sd}");

    let roots = ResolverRoots {
        module_cache: Some(fixture("stats/modcache")),
        ..Default::default()
    };
    let mut summaries = Vec::new();
    for p in ["p1", "p2", "p3"] {
        let target = fixture(&format!("stats/{p}")).display().to_string();
        let graph = analyze_target(&target, &roots, EnumerateOptions::default(), false, true)
            .map_err(|e| e.to_string())?;
        summaries.push(summarize_project(p, &graph, SummaryOptions::default()));
    }
    let (stats, _) = emit_stats(&summaries).map_err(|e| e.to_string())?;
    ensure!(
        stats.direct_unsafe_share == 1.0 / 3.0,
        "direct share {}",
        stats.direct_unsafe_share
    );
    ensure!(
        stats.transitive_unsafe_share == 1.0,
        "transitive share {}",
        stats.transitive_unsafe_share
    );
    Ok(())
}

fn determinism() -> Outcome {
    let run = |jobs: &str| {
        cli(&[
            "census",
            "corpus/app/...",
            "--module-cache",
            "corpus/modcache",
            "--format",
            "csv",
            "--jobs",
            jobs,
        ])
    };
    let one = run("1")?;
    let eight = run("8")?;
    ensure!(
        one.status.success() && eight.status.success(),
        "census failed"
    );
    ensure!(one.stdout.len() > 100, "suspiciously short output");
    ensure!(one.stdout == eight.stdout, "outputs differ");
    Ok(())
}

fn exit_codes() -> Outcome {
    let code = |args: &[&str]| cli(args).map(|o| o.status.code());
    let unsafe_pkg = code(&["lint", "lint/composite_literal"])?;
    ensure!(
        unsafe_pkg == Some(1),
        "unsafe fixture exited {unsafe_pkg:?}"
    );
    let safe = code(&["lint", "lint/safe"])?;
    ensure!(safe == Some(0), "safe fixture exited {safe:?}");
    let missing = code(&["lint", "no/such/dir"])?;
    ensure!(missing == Some(2), "nonexistent path exited {missing:?}");
    Ok(())
}

fn string_comment_immunity() -> Outcome {
    let f = scan("immunity")?;
    ensure!(f.is_empty(), "findings: {f:?}");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "census exactness against the hand-counted oracle",
            census_exactness,
        ),
        ("sample-program fidelity", sample_fidelity),
        ("sliceheader pass", sliceheader_pass),
        ("structcast pass", structcast_pass),
        (
            "dedup and aggregation invariants on 100 random DAGs",
            dedup_invariants,
        ),
        ("stats correctness", stats_correctness),
        ("determinism across worker counts", determinism),
        ("lint exit-code contract", exit_codes),
        ("string and comment immunity", string_comment_immunity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS {}: {name}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}: {name}: {msg}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
