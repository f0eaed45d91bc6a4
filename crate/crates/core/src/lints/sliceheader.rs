//! Flags slice and string headers that are not derived from a real slice or
//! string by an in-place cast.

use std::collections::{HashSet, VecDeque};

use super::cfg::{build_cfg, functions, Cfg};
use super::types::{HeaderKind, TypeEnv, TypeRef};
use super::{
    conversion_parts, in_broken_declaration, unsafe_pointer_operand, Diagnostic, Pass, Severity,
};
use crate::frontend::scope::{self, DeclKind, Declaration};
use crate::frontend::{NodeId, NodeKind, SyntaxTree};

const MAX_CHAIN: u32 = 8;

/// Where the value of a header variable came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Origin {
    SafeCast,
    ZeroValue,
    CompositeLiteral,
    Parameter,
    CallResult,
    DerefCopy,
    Unknown(&'static str),
    Missing,
    BoundExceeded,
}

impl Origin {
    fn reason(self) -> &'static str {
        match self {
            Origin::SafeCast => "derived by cast",
            Origin::ZeroValue => "defined by a zero-value declaration",
            Origin::CompositeLiteral => "defined by a composite literal",
            Origin::Parameter => "received as a parameter",
            Origin::CallResult => "returned from a call",
            Origin::DerefCopy => "a dereferenced copy of a cast header",
            Origin::Unknown(why) => why,
            Origin::Missing => "no reaching definition found",
            Origin::BoundExceeded => "definition search bound exceeded",
        }
    }
}

enum Def {
    Decl(Declaration),
    Value(Option<NodeId>),
}

fn assignment_operator(tree: &SyntaxTree, stmt: NodeId) -> Option<&str> {
    let left = tree.child_by_field(stmt, "left")?;
    let right = tree.child_by_field(stmt, "right")?;
    let between = &tree.source()[tree.node(left).span.end()..tree.node(right).span.offset];
    Some(between.trim())
}

fn expr_list(tree: &SyntaxTree, list: Option<NodeId>) -> Vec<NodeId> {
    match list {
        Some(l) if tree.grammar_kind(l) == "expression_list" => tree.children(l).to_vec(),
        Some(l) => vec![l],
        None => Vec::new(),
    }
}

/// The definition of `name` made by `stmt`, if any.
fn definition_in(tree: &SyntaxTree, stmt: NodeId, name: &str) -> Option<Def> {
    match tree.grammar_kind(stmt) {
        "short_var_declaration" | "var_declaration" | "const_declaration" => {
            scope::declarations_of(tree, stmt)
                .into_iter()
                .find(|d| tree.text(d.name) == name)
                .map(Def::Decl)
        }
        "assignment_statement" if assignment_operator(tree, stmt) == Some("=") => {
            let left = expr_list(tree, tree.child_by_field(stmt, "left"));
            let right = expr_list(tree, tree.child_by_field(stmt, "right"));
            let i = left.iter().position(|&l| {
                let l = tree.unparen(l);
                tree.grammar_kind(l) == "identifier" && tree.text(l) == name
            })?;
            Some(Def::Value((left.len() == right.len()).then(|| right[i])))
        }
        "for_statement" => {
            let clause = tree
                .children(stmt)
                .iter()
                .copied()
                .find(|&c| tree.grammar_kind(c) == "range_clause")?;
            let left = tree.child_by_field(clause, "left")?;
            expr_list(tree, Some(left))
                .iter()
                .any(|&l| tree.text(l) == name)
                .then_some(Def::Decl(Declaration {
                    kind: DeclKind::Range,
                    name: left,
                    type_expr: None,
                    value: None,
                    site: clause,
                }))
        }
        _ => None,
    }
}

struct Checker<'e, 'a> {
    env: &'e TypeEnv<'a>,
    file: usize,
    bound: usize,
}

impl Checker<'_, '_> {
    fn tree(&self) -> &SyntaxTree {
        self.env.tree(self.file)
    }

    fn header_of(&self, ty: &TypeRef) -> Option<HeaderKind> {
        self.env.header_kind(ty.pointee_or_self())
    }

    /// `(*H)(unsafe.Pointer(&v))` with v a slice or string is the only safe
    /// way to obtain a header.
    fn classify_value(&self, value: NodeId, depth: u32) -> Origin {
        let tree = self.tree();
        let v = tree.unparen(value);
        if depth > MAX_CHAIN {
            return Origin::Unknown("definition chain too long");
        }
        match tree.kind(v) {
            NodeKind::CompositeLit => return Origin::CompositeLiteral,
            NodeKind::UnaryAddrExpr => {
                let inner = tree.child_by_field(v, "operand").map(|o| tree.unparen(o));
                if inner.is_some_and(|o| tree.kind(o) == NodeKind::CompositeLit) {
                    return Origin::CompositeLiteral;
                }
                return Origin::Unknown("address of a value that is not a cast header");
            }
            NodeKind::StarExpr => {
                let inner = tree.child_by_field(v, "operand");
                if inner.is_some_and(|o| self.classify_value(o, depth + 1) == Origin::SafeCast) {
                    return Origin::DerefCopy;
                }
                return Origin::Unknown("dereference of a value of unknown origin");
            }
            _ => {}
        }
        match tree.grammar_kind(v) {
            "identifier" => {
                let name = tree.text(v);
                match scope::lookup(tree, value, name) {
                    Some(d) => self.classify_decl(&d, depth + 1),
                    None => Origin::Unknown("package-level variable"),
                }
            }
            "call_expression" | "type_conversion_expression" => {
                let Some((ty, operand)) = conversion_parts(self.env, self.file, v) else {
                    return Origin::CallResult;
                };
                let target = self.env.type_of(self.file, ty);
                if !matches!(target, TypeRef::Pointer(_)) || self.header_of(&target).is_none() {
                    return Origin::Unknown("conversion to a non-header type");
                }
                match self.cast_source(operand, depth) {
                    Some(src) => self.classify_source(src),
                    None => Origin::Unknown("not converted from unsafe.Pointer(&x)"),
                }
            }
            _ => Origin::Unknown("unrecognized definition"),
        }
    }

    /// The `x` of `unsafe.Pointer(x)`, possibly through one variable holding
    /// the `unsafe.Pointer`.
    fn cast_source(&self, operand: NodeId, depth: u32) -> Option<NodeId> {
        let tree = self.tree();
        if let Some(x) = unsafe_pointer_operand(self.env, self.file, operand) {
            return Some(x);
        }
        let op = tree.unparen(operand);
        if tree.grammar_kind(op) != "identifier" || depth > MAX_CHAIN {
            return None;
        }
        let decl = scope::lookup(tree, op, tree.text(op))?;
        self.cast_source(decl.value?, depth + 1)
    }

    fn classify_source(&self, src: NodeId) -> Origin {
        let tree = self.tree();
        let src = tree.unparen(src);
        if tree.kind(src) != NodeKind::UnaryAddrExpr {
            return Origin::Unknown("cast source is not an address");
        }
        let Some(target) = tree.child_by_field(src, "operand") else {
            return Origin::Unknown("cast source is not an address");
        };
        match self.env.underlying(&self.env.expr_type(self.file, target)) {
            TypeRef::Slice(_) => Origin::SafeCast,
            TypeRef::Basic(b) if b == "string" => Origin::SafeCast,
            TypeRef::Unknown => Origin::Unknown("cast source has unknown type"),
            _ => Origin::Unknown("cast source is not a slice or string"),
        }
    }

    fn classify_decl(&self, decl: &Declaration, depth: u32) -> Origin {
        match decl.kind {
            DeclKind::Param => Origin::Parameter,
            DeclKind::Range => Origin::Unknown("range variable"),
            DeclKind::Var | DeclKind::ShortVar => match decl.value {
                Some(v) => self.classify_value(v, depth),
                None if decl.kind == DeclKind::Var && decl.type_expr.is_some() => Origin::ZeroValue,
                None => Origin::Unknown("multi-value definition"),
            },
            _ => Origin::Unknown("unsupported declaration"),
        }
    }

    fn classify_def(&self, def: Def) -> Origin {
        match def {
            Def::Decl(d) => self.classify_decl(&d, 0),
            Def::Value(Some(v)) => self.classify_value(v, 0),
            Def::Value(None) => Origin::Unknown("multi-value assignment"),
        }
    }

    /// Reaching definitions of `name` at `stmt`, one per CFG path, found by
    /// walking predecessors until each path meets a definition.
    fn reaching_origins(&self, cfg: &Cfg, stmt: NodeId, base: NodeId) -> Vec<Origin> {
        let tree = self.tree();
        let name = tree.text(base);
        let Some((start, index)) = cfg.locate(stmt) else {
            return vec![Origin::Missing];
        };
        let mut origins = Vec::new();
        let mut visited = HashSet::new();
        let mut queue = VecDeque::from([(start, Some(index))]);
        while let Some((block, limit)) = queue.pop_front() {
            let stmts = &cfg.blocks[block].stmts;
            let upto = limit.unwrap_or(stmts.len());
            if let Some(def) = stmts[..upto]
                .iter()
                .rev()
                .find_map(|&s| definition_in(tree, s, name))
            {
                origins.push(self.classify_def(def));
                continue;
            }
            let preds = cfg.predecessors(block);
            if preds.is_empty() {
                // Defined outside this function body: parameters, captured
                // variables of an enclosing function, package variables.
                origins.push(match scope::lookup(tree, base, name) {
                    Some(d) => self.classify_decl(&d, 0),
                    None if block == cfg.entry => Origin::Unknown("package-level variable"),
                    None => Origin::Missing,
                });
                continue;
            }
            for &p in preds {
                if visited.insert(p) {
                    if visited.len() > self.bound {
                        log::warn!(
                            "{}:{}: definition search bound reached",
                            tree.file_path(),
                            tree.node(stmt).line
                        );
                        origins.push(Origin::BoundExceeded);
                        return origins;
                    }
                    queue.push_back((p, None));
                }
            }
        }
        origins
    }

    fn written_targets(&self, stmt: NodeId) -> Vec<NodeId> {
        let tree = self.tree();
        match tree.grammar_kind(stmt) {
            "assignment_statement" => expr_list(tree, tree.child_by_field(stmt, "left")),
            "inc_statement" | "dec_statement" => tree.children(stmt).to_vec(),
            _ => Vec::new(),
        }
    }

    /// (receiver expression, written field) for writes through a header.
    fn header_write(&self, target: NodeId) -> Option<(NodeId, HeaderKind, String)> {
        let tree = self.tree();
        let target = tree.unparen(target);
        let (receiver, field) = match tree.grammar_kind(target) {
            "selector_expression" => (
                tree.child_by_field(target, "operand")?,
                tree.text(tree.child_by_field(target, "field")?).to_string(),
            ),
            "unary_expression" if tree.kind(target) == NodeKind::StarExpr => {
                let operand = tree.child_by_field(target, "operand")?;
                if !matches!(self.env.expr_type(self.file, operand), TypeRef::Pointer(_)) {
                    return None;
                }
                (operand, String::from("*"))
            }
            _ => return None,
        };
        let kind = self.header_of(&self.env.expr_type(self.file, receiver))?;
        Some((receiver, kind, field))
    }

    fn check_function(&self, func: NodeId, out: &mut Vec<Diagnostic>) {
        let tree = self.tree();
        let cfg = build_cfg(tree, func);
        for block in &cfg.blocks {
            for &stmt in &block.stmts {
                for target in self.written_targets(stmt) {
                    let Some((receiver, kind, field)) = self.header_write(target) else {
                        continue;
                    };
                    let mut base = tree.unparen(receiver);
                    if tree.kind(base) == NodeKind::StarExpr {
                        if let Some(o) = tree.child_by_field(base, "operand") {
                            base = tree.unparen(o);
                        }
                    }
                    let origin = if tree.grammar_kind(base) == "identifier" {
                        self.reaching_origins(&cfg, stmt, base)
                            .into_iter()
                            .find(|o| *o != Origin::SafeCast)
                    } else {
                        Some(Origin::Unknown("receiver is not a local variable"))
                    };
                    if let Some(origin) = origin {
                        let what = if field == "*" {
                            format!(
                                "write through {} pointer `{}`",
                                kind.name(),
                                tree.text(receiver)
                            )
                        } else {
                            format!(
                                "write to {} field `{}` of `{}`",
                                kind.name(),
                                field,
                                tree.text(receiver)
                            )
                        };
                        out.push(Diagnostic::at(
                            tree,
                            target,
                            Pass::SliceheaderPass,
                            Severity::Warning,
                            format!(
                                "{what}: header is not derived from a slice or string by cast ({})",
                                origin.reason()
                            ),
                        ));
                    }
                }
            }
        }
    }
}

/// Composite literals of header type, and header field writes whose
/// receiver cannot be shown to come from `(*H)(unsafe.Pointer(&v))` with a
/// slice or string `v`.
pub fn sliceheader_check(env: &TypeEnv<'_>, walk_bound: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (file, tree) in env.files.iter().enumerate() {
        let checker = Checker {
            env,
            file,
            bound: walk_bound,
        };
        for id in tree.ids() {
            if tree.kind(id) != NodeKind::CompositeLit || in_broken_declaration(tree, id) {
                continue;
            }
            let Some(ty) = tree.child_by_field(id, "type") else {
                continue;
            };
            if let Some(kind) = env.header_kind(&env.type_of(file, ty)) {
                out.push(Diagnostic::at(
                    tree,
                    id,
                    Pass::SliceheaderPass,
                    Severity::Warning,
                    format!(
                        "{} composite literal: a manually built header does not keep its data alive",
                        kind.name()
                    ),
                ));
            }
        }
        for func in functions(tree) {
            if tree.contains_error(func) {
                log::debug!("{}: skipping function with parse errors", tree.file_path());
                continue;
            }
            checker.check_function(func, &mut out);
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_file, resolve_imports};

    fn check(body: &str) -> Vec<Diagnostic> {
        check_bound(body, 64)
    }

    fn check_bound(body: &str, bound: usize) -> Vec<Diagnostic> {
        let src = format!(
            "package p\n\nimport (\n\t\"reflect\"\n\t\"unsafe\"\n)\n\ntype myHdr struct {{ Data uintptr; Len int; Cap int }}\n\n{body}\n"
        );
        let tree = parse_file(&src, "p.go");
        let imports = vec![resolve_imports(&tree)];
        let files = vec![tree];
        let env = TypeEnv::new(&files, &imports);
        sliceheader_check(&env, bound)
    }

    const STRING_TO_BYTES: &str = "func StringToBytes(s string) []byte {
	strHeader := (*reflect.StringHeader)(unsafe.Pointer(&s))
	bytesHeader := reflect.SliceHeader{
		Data: strHeader.Data,
		Cap:  strHeader.Len,
		Len:  strHeader.Len,
	}
	return *(*[]byte)(unsafe.Pointer(&bytesHeader))
}";

    #[test]
    fn composite_literal_header() {
        let d = check(STRING_TO_BYTES);
        assert_eq!(d.len(), 1, "{d:#?}");
        // Line 3 of the function; the function starts on line 10.
        assert_eq!((d[0].line, d[0].column), (12, 17));
        assert!(d[0].message.starts_with("SliceHeader composite literal"));
    }

    #[test]
    fn safe_cast_then_field_writes() {
        let d = check(
            "func f(b []byte, n int) {\n\th := (*reflect.SliceHeader)(unsafe.Pointer(&b))\n\th.Len = n\n\th.Cap = n\n}",
        );
        assert!(d.is_empty(), "{d:#?}");
    }

    #[test]
    fn zero_value_declaration() {
        let d = check("func f(p uintptr) {\n\tvar h reflect.SliceHeader\n\th.Data = p\n}");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("zero-value"), "{}", d[0].message);
    }

    #[test]
    fn call_result_and_parameter_warn() {
        let d = check(
            "func mk() *reflect.SliceHeader { return nil }\nfunc f(n int, q *reflect.StringHeader) {\n\th := mk()\n\th.Len = n\n\tq.Len = n\n}",
        );
        assert_eq!(d.len(), 2, "{d:#?}");
        assert!(d.iter().any(|x| x.message.contains("returned from a call")));
        assert!(d.iter().any(|x| x.message.contains("parameter")));
    }

    #[test]
    fn derived_type_and_intermediate_pointer() {
        let safe = check(
            "func f(s string, n int) {\n\tp := unsafe.Pointer(&s)\n\th := (*myHdr)(p)\n\th.Len = n\n}",
        );
        assert!(safe.is_empty(), "{safe:#?}");
        let lit = check("func f() { _ = myHdr{} }");
        assert_eq!(lit.len(), 1);
    }

    #[test]
    fn cast_from_non_slice_warns() {
        let d = check(
            "func f(x int, n int) {\n\th := (*reflect.SliceHeader)(unsafe.Pointer(&x))\n\th.Len = n\n}",
        );
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn one_unsafe_path_is_enough() {
        let d = check(
            "func f(b []byte, c bool, n int) {\n\th := (*reflect.SliceHeader)(unsafe.Pointer(&b))\n\tif c {\n\t\th = &reflect.SliceHeader{}\n\t}\n\th.Len = n\n}",
        );
        // The literal itself plus the write reached by the literal's path.
        assert_eq!(d.len(), 2, "{d:#?}");
        let safe_both = check(
            "func f(b, e []byte, c bool, n int) {\n\th := (*reflect.SliceHeader)(unsafe.Pointer(&b))\n\tif c {\n\t\th = (*reflect.SliceHeader)(unsafe.Pointer(&e))\n\t}\n\th.Len++\n}",
        );
        assert!(safe_both.is_empty(), "{safe_both:#?}");
    }

    #[test]
    fn deref_copy_warns() {
        let d = check(
            "func f(b []byte, n int) {\n\th := *(*reflect.SliceHeader)(unsafe.Pointer(&b))\n\th.Len = n\n}",
        );
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("dereferenced copy"));
    }

    #[test]
    fn bound_exceeded_warns() {
        let body = "func f(b []byte, c bool, n int) {\n\th := (*reflect.SliceHeader)(unsafe.Pointer(&b))\n\tif c { n++ }\n\tif c { n++ }\n\tif c { n++ }\n\th.Len = n\n}";
        assert!(check(body).is_empty());
        let d = check_bound(body, 2);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("bound"));
    }

    #[test]
    fn closure_captures_safe_header() {
        let d = check(
            "func f(b []byte, n int) {\n\th := (*reflect.SliceHeader)(unsafe.Pointer(&b))\n\tfunc() { h.Len = n }()\n}",
        );
        assert!(d.is_empty(), "{d:#?}");
    }

    #[test]
    fn broken_function_is_skipped() {
        let d = check("func f() {\n\tvar h reflect.SliceHeader\n\th.Data = )\n}\nfunc g() { _ = reflect.StringHeader{} }");
        assert_eq!(d.len(), 1, "{d:#?}");
        assert!(d[0].message.starts_with("StringHeader"));
    }
}
