//! Detection and classification of unsafe-related tokens.
//!
//! A token is a use of `unsafe.Pointer`, `unsafe.Sizeof`, `unsafe.Offsetof`,
//! `unsafe.Alignof`, `reflect.SliceHeader`, `reflect.StringHeader` or the
//! predeclared `uintptr` type. Matching runs over syntax trees, so text in
//! comments and string literals never produces a finding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::frontend::scope::{self, DeclKind};
use crate::frontend::{ImportTable, NodeId, NodeKind, SyntaxTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    UnsafePointer,
    UnsafeSizeof,
    UnsafeOffsetof,
    UnsafeAlignof,
    ReflectSliceHeader,
    ReflectStringHeader,
    Uintptr,
}

impl TokenKind {
    pub const ALL: [TokenKind; 7] = [
        TokenKind::UnsafePointer,
        TokenKind::UnsafeSizeof,
        TokenKind::UnsafeOffsetof,
        TokenKind::UnsafeAlignof,
        TokenKind::ReflectSliceHeader,
        TokenKind::ReflectStringHeader,
        TokenKind::Uintptr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::UnsafePointer => "UnsafePointer",
            TokenKind::UnsafeSizeof => "UnsafeSizeof",
            TokenKind::UnsafeOffsetof => "UnsafeOffsetof",
            TokenKind::UnsafeAlignof => "UnsafeAlignof",
            TokenKind::ReflectSliceHeader => "ReflectSliceHeader",
            TokenKind::ReflectStringHeader => "ReflectStringHeader",
            TokenKind::Uintptr => "Uintptr",
        }
    }

    fn from_member(package: &str, member: &str) -> Option<TokenKind> {
        match (package, member) {
            ("unsafe", "Pointer") => Some(TokenKind::UnsafePointer),
            ("unsafe", "Sizeof") => Some(TokenKind::UnsafeSizeof),
            ("unsafe", "Offsetof") => Some(TokenKind::UnsafeOffsetof),
            ("unsafe", "Alignof") => Some(TokenKind::UnsafeAlignof),
            ("reflect", "SliceHeader") => Some(TokenKind::ReflectSliceHeader),
            ("reflect", "StringHeader") => Some(TokenKind::ReflectStringHeader),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContextKind {
    Assignment,
    Call,
    Parameter,
    Variable,
    Other,
}

impl ContextKind {
    pub const ALL: [ContextKind; 5] = [
        ContextKind::Assignment,
        ContextKind::Call,
        ContextKind::Parameter,
        ContextKind::Variable,
        ContextKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ContextKind::Assignment => "Assignment",
            ContextKind::Call => "Call",
            ContextKind::Parameter => "Parameter",
            ContextKind::Variable => "Variable",
            ContextKind::Other => "Other",
        }
    }
}

macro_rules! display_from_str {
    ($ty:ty, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|k| k.as_str() == s)
                    .ok_or_else(|| format!("unknown {}: {s}", $what))
            }
        }
    };
}

display_from_str!(TokenKind, "token kind");
display_from_str!(ContextKind, "context kind");

/// Identity of the package a finding belongs to.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PackageIdentity {
    pub package_path: String,
    pub module_path: String,
    pub module_version: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnsafeFinding {
    pub package_path: String,
    pub module_path: String,
    pub module_version: String,
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub token: TokenKind,
    pub context: ContextKind,
    pub snippet: String,
}

/// Per-package counts by token kind and by context kind.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCounts {
    pub by_token: BTreeMap<TokenKind, u64>,
    pub by_context: BTreeMap<ContextKind, u64>,
}

impl CensusCounts {
    pub fn from_findings<'a>(findings: impl IntoIterator<Item = &'a UnsafeFinding>) -> Self {
        let mut counts = CensusCounts::default();
        for f in findings {
            *counts.by_token.entry(f.token).or_default() += 1;
            *counts.by_context.entry(f.context).or_default() += 1;
        }
        counts
    }

    pub fn total(&self) -> u64 {
        self.by_token.values().sum()
    }

    pub fn token(&self, kind: TokenKind) -> u64 {
        self.by_token.get(&kind).copied().unwrap_or(0)
    }

    pub fn context(&self, kind: ContextKind) -> u64 {
        self.by_context.get(&kind).copied().unwrap_or(0)
    }

    pub fn add(&mut self, other: &CensusCounts) {
        for (k, v) in &other.by_token {
            *self.by_token.entry(*k).or_default() += v;
        }
        for (k, v) in &other.by_context {
            *self.by_context.entry(*k).or_default() += v;
        }
    }
}

/// Package-wide facts needed while matching and classifying tokens.
#[derive(Clone, Debug, Default)]
pub struct PackageScope {
    /// Names declared at package level in any file.
    pub declared: BTreeSet<String>,
    /// Names of package-level type declarations.
    pub types: BTreeSet<String>,
}

impl PackageScope {
    pub fn from_files(files: &[SyntaxTree]) -> Self {
        let mut scope = PackageScope::default();
        for tree in files {
            for decl in scope::file_declarations(tree) {
                let name = tree.text(decl.name).to_string();
                if decl.kind == DeclKind::Type {
                    scope.types.insert(name.clone());
                }
                scope.declared.insert(name);
            }
        }
        scope
    }
}

/// Everything `match_token` and `classify_context` look at besides the node.
#[derive(Clone, Copy)]
pub struct MatchContext<'a> {
    pub tree: &'a SyntaxTree,
    pub imports: &'a ImportTable,
    pub package: &'a PackageScope,
}

const PREDECLARED_TYPES: &[&str] = &[
    "bool",
    "byte",
    "complex64",
    "complex128",
    "error",
    "float32",
    "float64",
    "int",
    "int8",
    "int16",
    "int32",
    "int64",
    "rune",
    "string",
    "uint",
    "uint8",
    "uint16",
    "uint32",
    "uint64",
    "uintptr",
    "any",
];

pub fn is_predeclared_type(name: &str) -> bool {
    PREDECLARED_TYPES.contains(&name)
}

fn shadowed(cx: &MatchContext<'_>, node: NodeId, name: &str) -> bool {
    cx.package.declared.contains(name) || scope::lookup(cx.tree, node, name).is_some()
}

fn is_literal_key(tree: &SyntaxTree, node: NodeId) -> bool {
    tree.parent(node).is_some_and(|p| {
        tree.grammar_kind(p) == "literal_element" && tree.node(p).field == Some("key")
    })
}

/// Splits a selector or qualified type into (qualifier, member) nodes.
pub fn selector_parts(tree: &SyntaxTree, node: NodeId) -> Option<(NodeId, NodeId)> {
    match tree.grammar_kind(node) {
        "selector_expression" => Some((
            tree.child_by_field(node, "operand")?,
            tree.child_by_field(node, "field")?,
        )),
        "qualified_type" => Some((
            tree.child_by_field(node, "package")?,
            tree.child_by_field(node, "name")?,
        )),
        _ => None,
    }
}

/// Returns the token kind `node` represents, if it is an unsafe-related use.
pub fn match_token(cx: &MatchContext<'_>, node: NodeId) -> Option<TokenKind> {
    let tree = cx.tree;
    match tree.kind(node) {
        NodeKind::SelectorExpr => {
            let (qualifier, member) = selector_parts(tree, node)?;
            if !matches!(
                tree.grammar_kind(qualifier),
                "identifier" | "package_identifier"
            ) {
                return None;
            }
            let path = cx.imports.path_of(tree.text(qualifier))?;
            TokenKind::from_member(path, tree.text(member))
        }
        NodeKind::Ident => {
            if !matches!(tree.grammar_kind(node), "identifier" | "type_identifier") {
                return None;
            }
            let name = tree.text(node);
            let kind = if name == "uintptr" {
                TokenKind::Uintptr
            } else {
                ["unsafe", "reflect"]
                    .into_iter()
                    .filter(|p| cx.imports.is_dot_imported(p))
                    .find_map(|p| TokenKind::from_member(p, name))?
            };
            if scope::is_declaring_ident(tree, node)
                || is_literal_key(tree, node)
                || shadowed(cx, node, name)
            {
                return None;
            }
            Some(kind)
        }
        _ => None,
    }
}

fn is_conversion_callee(cx: &MatchContext<'_>, callee: NodeId) -> bool {
    let tree = cx.tree;
    if tree.grammar_kind(callee) == "parenthesized_expression" {
        return true;
    }
    let callee = tree.unparen(callee);
    match tree.grammar_kind(callee) {
        "pointer_type" | "slice_type" | "array_type" | "map_type" | "channel_type"
        | "function_type" | "struct_type" | "interface_type" | "qualified_type"
        | "generic_type" | "type_identifier" => true,
        "unary_expression" => tree.kind(callee) == NodeKind::StarExpr,
        "identifier" => {
            let name = tree.text(callee);
            (is_predeclared_type(name) || cx.package.types.contains(name))
                && scope::lookup(tree, callee, name).is_none_or(|d| d.kind == DeclKind::Type)
        }
        "selector_expression" => match_token(cx, callee).is_some(),
        _ => false,
    }
}

/// Classifies the syntactic context of a matched token.
///
/// Walks up from the token, skipping the expression chain built directly on
/// it (its selector, calls and conversions applied to it, unary `*`/`&` and
/// parentheses, and a composite literal it is the type of), and classifies by
/// the first ancestor that is a signature list, declaration, assignment-like
/// statement or call argument list. Anything else is `Other`.
pub fn classify_context(cx: &MatchContext<'_>, token: NodeId) -> ContextKind {
    let tree = cx.tree;
    let mut child = token;
    for anc in tree.ancestors(token) {
        match tree.kind(anc) {
            NodeKind::ParamList | NodeKind::ResultList => return ContextKind::Parameter,
            NodeKind::VarDecl | NodeKind::TypeDecl => return ContextKind::Variable,
            NodeKind::AssignStmt | NodeKind::ReturnStmt => return ContextKind::Assignment,
            NodeKind::CompositeLit => {
                if tree.node(child).field == Some("body") {
                    return ContextKind::Assignment;
                }
            }
            NodeKind::CallExpr => {
                if tree.grammar_kind(anc) == "call_expression"
                    && tree.node(child).field == Some("arguments")
                {
                    let is_conversion = tree
                        .child_by_field(anc, "function")
                        .is_some_and(|callee| is_conversion_callee(cx, callee));
                    if !is_conversion {
                        return ContextKind::Call;
                    }
                }
            }
            kind if kind.is_statement_boundary() => return ContextKind::Other,
            _ => {}
        }
        child = anc;
    }
    ContextKind::Other
}

const SNIPPET_LIMIT: usize = 200;
const SNIPPET_MARKER: &str = "...";

/// Source of the statement enclosing `node`, on one line with runs of
/// whitespace collapsed. Compound statements contribute only their header.
pub fn snippet(tree: &SyntaxTree, node: NodeId) -> String {
    let mut stmt = node;
    let mut child = node;
    for anc in tree.ancestors(node) {
        let kind = tree.kind(anc);
        if kind == NodeKind::Block || anc == tree.root() {
            stmt = child;
            break;
        }
        if matches!(
            kind,
            NodeKind::AssignStmt
                | NodeKind::ReturnStmt
                | NodeKind::VarDecl
                | NodeKind::TypeDecl
                | NodeKind::ImportDecl
        ) || kind.is_statement_boundary()
        {
            stmt = anc;
            break;
        }
        child = anc;
        stmt = anc;
    }
    let span = tree.node(stmt).span;
    let mut end = span.end();
    if matches!(
        tree.kind(stmt),
        NodeKind::FuncDecl
            | NodeKind::IfStmt
            | NodeKind::ForStmt
            | NodeKind::SwitchStmt
            | NodeKind::OtherStmt
    ) {
        let body = tree.children(stmt).iter().copied().find(|&c| {
            let k = tree.kind(c);
            (k == NodeKind::Block
                || k.is_statement_boundary()
                || k == NodeKind::AssignStmt
                || k == NodeKind::ReturnStmt)
                && c != node
                && !tree.is_ancestor(c, node)
        });
        if let Some(body) = body {
            let body_start = tree.node(body).span.offset;
            if body_start > tree.node(node).span.end() {
                end = body_start;
            }
        }
    }
    let text = &tree.source()[span.offset..end];
    let mut collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    while collapsed.ends_with('{') {
        collapsed.pop();
        collapsed.truncate(collapsed.trim_end().len());
    }
    if collapsed.is_empty() {
        collapsed = tree
            .text(node)
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
    }
    if collapsed.chars().count() > SNIPPET_LIMIT {
        let cut: String = collapsed.chars().take(SNIPPET_LIMIT).collect();
        collapsed = cut + SNIPPET_MARKER;
    }
    collapsed
}

/// Finds every unsafe-related token in one package.
///
/// `imports[i]` must be the import table of `files[i]`.
pub fn scan_package(
    files: &[SyntaxTree],
    imports: &[ImportTable],
    identity: &PackageIdentity,
) -> Vec<UnsafeFinding> {
    assert_eq!(files.len(), imports.len(), "one import table per file");
    let package = PackageScope::from_files(files);
    let mut findings = Vec::new();
    for (tree, imports) in files.iter().zip(imports) {
        let cx = MatchContext {
            tree,
            imports,
            package: &package,
        };
        for id in tree.ids() {
            let Some(token) = match_token(&cx, id) else {
                continue;
            };
            let node = tree.node(id);
            findings.push(UnsafeFinding {
                package_path: identity.package_path.clone(),
                module_path: identity.module_path.clone(),
                module_version: identity.module_version.clone(),
                file: tree.file_path().to_string(),
                line: node.line,
                column: node.column,
                token,
                context: classify_context(&cx, id),
                snippet: snippet(tree, id),
            });
        }
    }
    sort_findings(&mut findings);
    findings
}

pub fn sort_findings(findings: &mut [UnsafeFinding]) {
    findings.sort_by(|a, b| {
        (&a.file, a.line, a.column, a.token).cmp(&(&b.file, b.line, b.column, b.token))
    });
}
