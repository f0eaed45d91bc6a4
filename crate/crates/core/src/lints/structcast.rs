//! Flags in-place casts between struct types whose counts of
//! architecture-dependent fields differ.

use super::types::{TypeEnv, TypeRef};
use super::{
    conversion_parts, in_broken_declaration, unsafe_pointer_operand, Diagnostic, Pass, Severity,
};
use crate::frontend::NodeKind;

fn display(env: &TypeEnv<'_>, ty: &TypeRef) -> String {
    match ty {
        TypeRef::Basic(n) | TypeRef::Named { name: n, .. } => n.clone(),
        TypeRef::External { package, name } => {
            format!("{}.{}", package.rsplit('/').next().unwrap_or(package), name)
        }
        TypeRef::Pointer(inner) => format!("*{}", display(env, inner)),
        TypeRef::Struct(loc) => env
            .tree(loc.file)
            .text(loc.node)
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" "),
        _ => "?".to_string(),
    }
}

fn is_struct_like(env: &TypeEnv<'_>, ty: &TypeRef) -> bool {
    ty.is_external() || matches!(env.underlying(ty), TypeRef::Struct(_))
}

/// Finds `(*T2)(unsafe.Pointer(&v))` and `(*T2)(unsafe.Pointer(p))` where
/// both sides are struct types and compares their arch-dependent field
/// counts. Counts that are incomplete, or types from other packages, give
/// an informational diagnostic instead of a warning.
pub fn structcast_check(env: &TypeEnv<'_>, flat: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (file, tree) in env.files.iter().enumerate() {
        for id in tree.ids() {
            if tree.kind(id) != NodeKind::CallExpr || in_broken_declaration(tree, id) {
                continue;
            }
            let Some((target_node, operand)) = conversion_parts(env, file, id) else {
                continue;
            };
            let TypeRef::Pointer(to) = env.type_of(file, target_node) else {
                continue;
            };
            let Some(src) = unsafe_pointer_operand(env, file, operand) else {
                continue;
            };
            let src = tree.unparen(src);
            let from = if tree.kind(src) == NodeKind::UnaryAddrExpr {
                match tree.child_by_field(src, "operand") {
                    Some(v) => env.expr_type(file, v),
                    None => continue,
                }
            } else {
                match env.expr_type(file, src) {
                    TypeRef::Pointer(inner) => *inner,
                    _ => continue,
                }
            };
            let to = *to;
            if !is_struct_like(env, &from) || !is_struct_like(env, &to) {
                continue;
            }
            if from.is_external() && to.is_external() {
                continue;
            }
            let a = env.count_arch_dependent_fields(&from, flat);
            let b = env.count_arch_dependent_fields(&to, flat);
            let (f, t) = (display(env, &from), display(env, &to));
            if a.incomplete || b.incomplete {
                out.push(Diagnostic::at(
                    tree,
                    id,
                    Pass::StructcastPass,
                    Severity::Info,
                    format!(
                        "struct cast from {f} to {t}: architecture-dependent field counts cannot be fully determined ({}{} vs {}{})",
                        a.count,
                        if a.incomplete { "+" } else { "" },
                        b.count,
                        if b.incomplete { "+" } else { "" },
                    ),
                ));
            } else if a.count != b.count {
                out.push(Diagnostic::at(
                    tree,
                    id,
                    Pass::StructcastPass,
                    Severity::Warning,
                    format!(
                        "struct cast from {f} to {t} with unequal architecture-dependent field counts ({} vs {})",
                        a.count, b.count
                    ),
                ));
            }
        }
    }
    out.sort();
    out
}
