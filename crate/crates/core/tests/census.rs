mod common;

use std::collections::BTreeMap;

use common::{fixture, observed_counts, read_oracle};
use unsafe_audit::census::{scan_package, ContextKind, PackageIdentity, TokenKind, UnsafeFinding};
use unsafe_audit::frontend::EnumerateOptions;
use unsafe_audit::modgraph::{analyze_target, parse_package, ResolverRoots};

fn scan_dir(rel: &str) -> Vec<UnsafeFinding> {
    let parsed = parse_package(&fixture(rel), EnumerateOptions::default()).unwrap();
    scan_package(&parsed.files, &parsed.imports, &PackageIdentity::default())
}

fn tally(findings: &[UnsafeFinding]) -> BTreeMap<(TokenKind, ContextKind), u64> {
    let mut out = BTreeMap::new();
    for f in findings {
        *out.entry((f.token, f.context)).or_default() += 1;
    }
    out
}

fn corpus_roots() -> ResolverRoots {
    ResolverRoots {
        module_cache: Some(fixture("corpus/modcache")),
        ..Default::default()
    }
}

fn corpus_target() -> String {
    format!("{}/...", fixture("corpus/app").display())
}

// Hand walk: `out.Items = *(*[]audit.Policy)(unsafe.Pointer(&in.Items))`
// holds one unsafe.Pointer, nested in a conversion whose nearest enclosing
// construct is the assignment.
#[test]
fn in_place_cast_sample() {
    let f = scan_dir("samples/in_place_cast");
    assert_eq!(
        tally(&f),
        BTreeMap::from([((TokenKind::UnsafePointer, ContextKind::Assignment), 1)])
    );
    assert_eq!((f[0].line, f[0].column), (11, 33));
}

// Hand walk: the parameter `p unsafe.Pointer` and the result type are
// signature positions; `x := uintptr(p)` and `return unsafe.Pointer(...)`
// are assignment-like.
#[test]
fn escape_hiding_sample() {
    let f = scan_dir("samples/escape_hiding");
    assert_eq!(
        tally(&f),
        BTreeMap::from([
            ((TokenKind::UnsafePointer, ContextKind::Parameter), 2),
            ((TokenKind::UnsafePointer, ContextKind::Assignment), 1),
            ((TokenKind::Uintptr, ContextKind::Assignment), 1),
        ])
    );
}

// Hand walk: line 9 holds StringHeader and unsafe.Pointer, line 10 the
// SliceHeader composite type, line 15 the final unsafe.Pointer.
#[test]
fn string_to_bytes_sample() {
    let f = scan_dir("samples/string_to_bytes");
    let tokens: Vec<(u32, TokenKind)> = f.iter().map(|x| (x.line, x.token)).collect();
    assert_eq!(
        tokens,
        [
            (9, TokenKind::ReflectStringHeader),
            (9, TokenKind::UnsafePointer),
            (10, TokenKind::ReflectSliceHeader),
            (15, TokenKind::UnsafePointer),
        ]
    );
}

#[test]
fn strings_and_comments_are_immune() {
    assert!(scan_dir("immunity").is_empty());
}

#[test]
fn corpus_matches_hand_counted_oracle() {
    let graph = analyze_target(
        &corpus_target(),
        &corpus_roots(),
        EnumerateOptions::default(),
        false,
        false,
    )
    .unwrap();
    let oracle = read_oracle(&fixture("corpus/oracle.csv"));
    assert!(oracle.len() >= 10);
    assert_eq!(observed_counts(&graph), oracle);
}

#[test]
fn corpus_shape() {
    let graph = analyze_target(
        &corpus_target(),
        &corpus_roots(),
        EnumerateOptions::default(),
        false,
        false,
    )
    .unwrap();
    let node = |p: &str| graph.nodes.iter().find(|n| n.package_path == p).unwrap();
    assert_eq!(node("example.com/shared").depth, 2);
    assert_eq!(node("example.com/leaf").depth, 3);
    assert_eq!(node("github.com/BurntSushi/toml").depth, 1);
    // app: 2 local, conv 9, clean 0, liba subtree 1+3+2, libb subtree 1+3 plus
    // the shared node already counted, toml 3.
    assert_eq!(
        node("example.com/app").cumulative_total(),
        2 + 9 + 6 + 4 + 3
    );
    assert_eq!(
        graph
            .nodes
            .iter()
            .filter(|n| n.package_path == "example.com/shared")
            .count(),
        1
    );
    // Only standard-library imports stay unresolved without a GOROOT.
    assert!(graph
        .unresolved
        .iter()
        .all(|u| ["fmt", "os", "reflect"].contains(&u.import_path.as_str())));
}

#[test]
fn test_files_only_with_include_tests() {
    let conv = |include_tests| {
        let graph = analyze_target(
            &fixture("corpus/app/internal/conv").display().to_string(),
            &corpus_roots(),
            EnumerateOptions { include_tests },
            false,
            false,
        )
        .unwrap();
        graph.nodes[graph.roots[0]]
            .local
            .token(TokenKind::UnsafePointer)
    };
    assert_eq!(conv(false), 4);
    assert_eq!(conv(true), 5);
}
