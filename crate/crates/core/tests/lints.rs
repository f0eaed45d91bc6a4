mod common;

use common::fixture;
use unsafe_audit::frontend::EnumerateOptions;
use unsafe_audit::lints::{lint_package, Diagnostic, LintOptions, Pass, Severity};
use unsafe_audit::modgraph::parse_package;

fn lint(rel: &str) -> Vec<Diagnostic> {
    let parsed = parse_package(&fixture(rel), EnumerateOptions::default()).unwrap();
    lint_package(&parsed.files, &parsed.imports, LintOptions::default())
}

#[test]
fn composite_literal_header_is_flagged() {
    let d = lint("lint/composite_literal");
    assert_eq!(d.len(), 1, "{d:#?}");
    assert_eq!(d[0].pass, Pass::SliceheaderPass);
    assert_eq!((d[0].line, d[0].column), (10, 17));
    assert_eq!(d[0].severity, Severity::Warning);
}

#[test]
fn zero_value_header_writes_are_flagged() {
    let d = lint("lint/zero_value");
    let lines: Vec<u32> = d.iter().map(|x| x.line).collect();
    assert_eq!(lines, [10, 11, 12]);
    assert!(d.iter().all(|x| x.pass == Pass::SliceheaderPass));
}

#[test]
fn cast_derived_header_is_safe() {
    assert!(lint("lint/safe").is_empty());
}

#[test]
fn replacing_the_cast_with_a_call_warns() {
    let d = lint("lint/call");
    let lines: Vec<u32> = d.iter().map(|x| x.line).collect();
    assert_eq!(lines, [15, 16, 17]);
}

#[test]
fn structcast_mismatch_is_symmetric() {
    let fwd = lint("structcast/mismatch");
    let rev = lint("structcast/reverse");
    for d in [&fwd, &rev] {
        assert_eq!(d.len(), 1, "{d:#?}");
        assert_eq!(d[0].pass, Pass::StructcastPass);
        assert_eq!(d[0].severity, Severity::Warning);
        assert_eq!((d[0].line, d[0].column), (16, 9));
    }
    assert!(fwd[0].message.contains("(1 vs 0)"));
    assert!(rev[0].message.contains("(0 vs 1)"));
}

#[test]
fn structcast_equal_counts_are_silent() {
    assert!(lint("structcast/identical").is_empty());
    assert!(lint("structcast/uint_uintptr").is_empty());
}

#[test]
fn samples_without_headers_or_struct_casts_are_clean() {
    // The in-place cast converts between slices of unknown external element types;
    // The escape-hiding sample has no header or struct at all.
    assert!(lint("samples/escape_hiding").is_empty());
    assert!(lint("samples/in_place_cast")
        .iter()
        .all(|d| d.severity == Severity::Info));
}
