//! Best-effort lexical scope lookup over a single syntax tree.
//!
//! This is not a type checker: it finds the nearest syntactic declaration of
//! a name that is visible at a use site, following Go's block scoping rules
//! for blocks, statement initializers, signatures and case clauses.

use super::{NodeId, NodeKind, SyntaxTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    ShortVar,
    Var,
    Const,
    Type,
    Func,
    Param,
    Range,
    TypeSwitchAlias,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Declaration {
    pub kind: DeclKind,
    /// The declaring identifier.
    pub name: NodeId,
    /// Declared type expression, when written.
    pub type_expr: Option<NodeId>,
    /// Initializer expression matched by position, when there is one.
    pub value: Option<NodeId>,
    /// Statement, spec or parameter declaration introducing the name.
    pub site: NodeId,
}

fn identifiers(tree: &SyntaxTree, list: NodeId) -> Vec<NodeId> {
    if tree.grammar_kind(list) == "identifier" {
        return vec![list];
    }
    tree.children(list)
        .iter()
        .copied()
        .filter(|&c| tree.grammar_kind(c) == "identifier")
        .collect()
}

fn values(tree: &SyntaxTree, list: Option<NodeId>) -> Vec<NodeId> {
    match list {
        Some(l) if tree.grammar_kind(l) == "expression_list" => tree.children(l).to_vec(),
        Some(l) => vec![l],
        None => Vec::new(),
    }
}

fn push_matched(
    out: &mut Vec<Declaration>,
    kind: DeclKind,
    names: &[NodeId],
    values: &[NodeId],
    type_expr: Option<NodeId>,
    site: NodeId,
) {
    let paired = names.len() == values.len();
    for (i, &name) in names.iter().enumerate() {
        out.push(Declaration {
            kind,
            name,
            type_expr,
            value: if paired { Some(values[i]) } else { None },
            site,
        });
    }
}

fn spec_declarations(tree: &SyntaxTree, spec: NodeId, kind: DeclKind, out: &mut Vec<Declaration>) {
    let names: Vec<NodeId> = tree.children_by_field(spec, "name").collect();
    let type_expr = tree.child_by_field(spec, "type");
    let vals = values(tree, tree.child_by_field(spec, "value"));
    push_matched(out, kind, &names, &vals, type_expr, spec);
}

/// Declarations introduced directly by one statement or top-level declaration.
pub fn declarations_of(tree: &SyntaxTree, stmt: NodeId) -> Vec<Declaration> {
    let mut out = Vec::new();
    match tree.grammar_kind(stmt) {
        "short_var_declaration" => {
            let names = tree
                .child_by_field(stmt, "left")
                .map(|l| identifiers(tree, l))
                .unwrap_or_default();
            let vals = values(tree, tree.child_by_field(stmt, "right"));
            push_matched(&mut out, DeclKind::ShortVar, &names, &vals, None, stmt);
        }
        "var_declaration" | "const_declaration" => {
            let kind = if tree.grammar_kind(stmt) == "var_declaration" {
                DeclKind::Var
            } else {
                DeclKind::Const
            };
            for spec in tree.descendants(stmt) {
                if matches!(tree.grammar_kind(spec), "var_spec" | "const_spec")
                    && tree.ancestors(spec).take_while(|&a| a != stmt).all(|a| {
                        matches!(tree.grammar_kind(a), "var_spec_list" | "const_spec_list")
                    })
                {
                    spec_declarations(tree, spec, kind, &mut out);
                }
            }
        }
        "type_declaration" => {
            for &spec in tree.children(stmt) {
                if let Some(name) = tree.child_by_field(spec, "name") {
                    out.push(Declaration {
                        kind: DeclKind::Type,
                        name,
                        type_expr: tree.child_by_field(spec, "type"),
                        value: None,
                        site: spec,
                    });
                }
            }
        }
        "function_declaration" => {
            if let Some(name) = tree.child_by_field(stmt, "name") {
                out.push(Declaration {
                    kind: DeclKind::Func,
                    name,
                    type_expr: None,
                    value: None,
                    site: stmt,
                });
            }
        }
        "labeled_statement" => {
            if let Some(&inner) = tree.children(stmt).last() {
                out.extend(declarations_of(tree, inner));
            }
        }
        "range_clause" => {
            if let Some(left) = tree.child_by_field(stmt, "left") {
                let between = tree.source()[tree.node(left).span.end()..tree.node(stmt).span.end()]
                    .trim_start();
                if between.starts_with(":=") {
                    let names = identifiers(tree, left);
                    push_matched(&mut out, DeclKind::Range, &names, &[], None, stmt);
                }
            }
        }
        _ => {}
    }
    out
}

/// Parameter, receiver, type-parameter and named-result declarations.
pub fn signature_declarations(tree: &SyntaxTree, func: NodeId) -> Vec<Declaration> {
    let mut out = Vec::new();
    for &list in tree.children(func) {
        if !matches!(tree.kind(list), NodeKind::ParamList | NodeKind::ResultList) {
            continue;
        }
        for &param in tree.children(list) {
            let type_expr = tree.child_by_field(param, "type");
            for name in tree.children_by_field(param, "name") {
                if tree.grammar_kind(name) == "identifier" {
                    out.push(Declaration {
                        kind: DeclKind::Param,
                        name,
                        type_expr,
                        value: None,
                        site: param,
                    });
                }
            }
        }
    }
    out
}

/// Top-level declarations of one file.
pub fn file_declarations(tree: &SyntaxTree) -> Vec<Declaration> {
    tree.children(tree.root())
        .iter()
        .flat_map(|&c| declarations_of(tree, c))
        .collect()
}

fn initializer_declarations(tree: &SyntaxTree, stmt: NodeId, use_site: NodeId) -> Vec<Declaration> {
    let mut out = Vec::new();
    let mut consider = |n: NodeId| {
        if n != use_site && !tree.is_ancestor(n, use_site) {
            out.extend(declarations_of(tree, n));
        }
    };
    match tree.grammar_kind(stmt) {
        "if_statement" | "expression_switch_statement" | "type_switch_statement" => {
            if let Some(init) = tree.child_by_field(stmt, "initializer") {
                consider(init);
            }
            if tree.grammar_kind(stmt) == "type_switch_statement" {
                if let Some(alias) = tree.child_by_field(stmt, "alias") {
                    if !tree.is_ancestor(alias, use_site) {
                        for name in identifiers(tree, alias) {
                            out.push(Declaration {
                                kind: DeclKind::TypeSwitchAlias,
                                name,
                                type_expr: None,
                                value: None,
                                site: stmt,
                            });
                        }
                    }
                }
            }
        }
        "for_statement" => {
            for &c in tree.children(stmt) {
                match tree.grammar_kind(c) {
                    "for_clause" => {
                        if let Some(init) = tree.child_by_field(c, "initializer") {
                            consider(init);
                        }
                    }
                    "range_clause" => consider(c),
                    _ => {}
                }
            }
        }
        _ => {}
    }
    out
}

/// Whether `id` is the declaring occurrence of a name rather than a use.
pub fn is_declaring_ident(tree: &SyntaxTree, id: NodeId) -> bool {
    let node = tree.node(id);
    let Some(parent) = node.parent else {
        return false;
    };
    let parent_kind = tree.grammar_kind(parent);
    if node.field == Some("name") {
        return matches!(
            parent_kind,
            "var_spec"
                | "const_spec"
                | "type_spec"
                | "type_alias"
                | "parameter_declaration"
                | "variadic_parameter_declaration"
                | "function_declaration"
                | "method_declaration"
                | "type_parameter_declaration"
                | "field_declaration"
        );
    }
    if parent_kind == "expression_list" && tree.node(parent).field.is_some() {
        let Some(grand) = tree.parent(parent) else {
            return false;
        };
        return declarations_of(tree, grand).iter().any(|d| d.name == id)
            || initializer_declarations_for_alias(tree, grand, id);
    }
    false
}

fn initializer_declarations_for_alias(tree: &SyntaxTree, stmt: NodeId, id: NodeId) -> bool {
    tree.grammar_kind(stmt) == "type_switch_statement"
        && tree
            .child_by_field(stmt, "alias")
            .is_some_and(|alias| identifiers(tree, alias).contains(&id))
}

/// Nearest function-local or file-level declaration of `name` visible at
/// `use_site`. Declarations in other files of the package are not seen.
pub fn lookup(tree: &SyntaxTree, use_site: NodeId, name: &str) -> Option<Declaration> {
    let use_offset = tree.node(use_site).span.offset;
    let matches = |d: &Declaration| tree.text(d.name) == name && d.name != use_site;
    let mut child = use_site;
    for scope in tree.ancestors(use_site) {
        let found = match tree.kind(scope) {
            NodeKind::Block | NodeKind::OtherStmt if scope != tree.root() => tree
                .children(scope)
                .iter()
                .filter(|&&c| tree.node(c).span.end() <= use_offset)
                .flat_map(|&c| declarations_of(tree, c))
                .rfind(matches),
            NodeKind::IfStmt | NodeKind::ForStmt | NodeKind::SwitchStmt => {
                initializer_declarations(tree, scope, use_site)
                    .into_iter()
                    .rfind(matches)
            }
            NodeKind::FuncDecl if tree.node(child).field == Some("body") => {
                signature_declarations(tree, scope)
                    .into_iter()
                    .find(matches)
            }
            _ if scope == tree.root() => file_declarations(tree).into_iter().find(matches),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
        child = scope;
    }
    None
}
