//! The `sliceheader` and `structcast` lint passes.

pub mod cfg;
pub mod sliceheader;
pub mod structcast;
pub mod types;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::census::snippet;
use crate::frontend::{ImportTable, NodeId, SyntaxTree};

pub use cfg::{build_cfg, BasicBlock, Cfg};
pub use sliceheader::sliceheader_check;
pub use structcast::structcast_check;
pub use types::{ArchCount, HeaderKind, TypeEnv, TypeRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pass {
    #[serde(rename = "sliceheader")]
    SliceheaderPass,
    #[serde(rename = "structcast")]
    StructcastPass,
}

impl Pass {
    pub fn as_str(self) -> &'static str {
        match self {
            Pass::SliceheaderPass => "sliceheader",
            Pass::StructcastPass => "structcast",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    /// The pass could not decide; never affects the exit code.
    Info,
}

/// Field order gives the required (file, line, column, pass) sort order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub pass: Pass,
    pub severity: Severity,
    pub message: String,
    pub snippet: String,
}

impl Diagnostic {
    pub(crate) fn at(
        tree: &SyntaxTree,
        node: NodeId,
        pass: Pass,
        severity: Severity,
        message: String,
    ) -> Self {
        let n = tree.node(node);
        Diagnostic {
            file: tree.file_path().to_string(),
            line: n.line,
            column: n.column,
            pass,
            severity,
            message,
            snippet: snippet(tree, node),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LintOptions {
    /// Count only direct struct fields in `structcast`.
    pub structcast_flat: bool,
    /// Maximum CFG blocks visited per backward walk in `sliceheader`.
    pub walk_bound: usize,
}

impl Default for LintOptions {
    fn default() -> Self {
        LintOptions {
            structcast_flat: false,
            walk_bound: 64,
        }
    }
}

/// Runs both passes over one package and returns sorted diagnostics.
pub fn lint_package(
    files: &[SyntaxTree],
    imports: &[ImportTable],
    opts: LintOptions,
) -> Vec<Diagnostic> {
    let env = TypeEnv::new(files, imports);
    let mut out = sliceheader_check(&env, opts.walk_bound);
    out.extend(structcast_check(&env, opts.structcast_flat));
    out.sort();
    out.dedup();
    out
}

/// The outermost declaration around `node`; used to skip code containing
/// parse errors without discarding the rest of the file.
pub(crate) fn in_broken_declaration(tree: &SyntaxTree, node: NodeId) -> bool {
    let top = std::iter::once(node)
        .chain(tree.ancestors(node))
        .take_while(|&a| a != tree.root())
        .last();
    match top {
        Some(top) => tree.contains_error(top),
        None => tree.contains_error(node),
    }
}

pub(crate) fn is_unsafe_pointer(env: &TypeEnv<'_>, file: usize, callee: NodeId) -> bool {
    let tree = env.tree(file);
    let callee = tree.unparen(callee);
    match tree.grammar_kind(callee) {
        "selector_expression" | "qualified_type" => crate::census::selector_parts(tree, callee)
            .is_some_and(|(q, m)| {
                tree.text(m) == "Pointer"
                    && env.imports[file].path_of(tree.text(q)) == Some("unsafe")
            }),
        "identifier" | "type_identifier" => {
            tree.text(callee) == "Pointer"
                && env.imports[file].is_dot_imported("unsafe")
                && crate::frontend::scope::lookup(tree, callee, "Pointer").is_none()
        }
        _ => false,
    }
}

/// Splits a conversion into (target type node, single operand).
pub(crate) fn conversion_parts(
    env: &TypeEnv<'_>,
    file: usize,
    node: NodeId,
) -> Option<(NodeId, NodeId)> {
    let tree = env.tree(file);
    match tree.grammar_kind(node) {
        "type_conversion_expression" => Some((
            tree.child_by_field(node, "type")?,
            tree.child_by_field(node, "operand")?,
        )),
        "call_expression" => {
            let callee = tree.child_by_field(node, "function")?;
            let args = tree.child_by_field(node, "arguments")?;
            let [arg] = tree.children(args) else {
                return None;
            };
            let is_type = tree.grammar_kind(callee) == "parenthesized_expression"
                || env.is_type_expr(file, callee)
                || is_unsafe_pointer(env, file, callee);
            is_type.then_some((callee, *arg))
        }
        _ => None,
    }
}

/// The operand of `unsafe.Pointer(x)`.
pub(crate) fn unsafe_pointer_operand(
    env: &TypeEnv<'_>,
    file: usize,
    node: NodeId,
) -> Option<NodeId> {
    let node = env.tree(file).unparen(node);
    let (ty, operand) = conversion_parts(env, file, node)?;
    is_unsafe_pointer(env, file, ty).then_some(operand)
}
