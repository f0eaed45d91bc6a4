//! Package-local type recovery: just enough typing for the two lint passes.
//!
//! Named types declared in the package are followed to their definitions;
//! types from other packages stay opaque except for the reflect header
//! structs.

use std::cell::Cell;
use std::collections::HashMap;

use crate::census::is_predeclared_type;
use crate::frontend::scope::{self, DeclKind, Declaration};
use crate::frontend::{ImportTable, NodeId, NodeKind, SyntaxTree};

/// A syntax node in one of the package's files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Loc {
    pub file: usize,
    pub node: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeRef {
    /// Predeclared type such as `int` or `string`.
    Basic(String),
    /// Named type declared in the package; `def` is its type expression.
    Named {
        name: String,
        def: Loc,
    },
    External {
        package: String,
        name: String,
    },
    Pointer(Box<TypeRef>),
    Slice(Box<TypeRef>),
    Array(Option<u64>, Box<TypeRef>),
    Struct(Loc),
    /// Map, channel, function, interface or `unsafe.Pointer`.
    Other,
    Unknown,
}

impl TypeRef {
    pub fn pointee_or_self(&self) -> &TypeRef {
        match self {
            TypeRef::Pointer(inner) => inner,
            other => other,
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, TypeRef::External { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeaderKind {
    SliceHeader,
    StringHeader,
}

impl HeaderKind {
    pub fn name(self) -> &'static str {
        match self {
            HeaderKind::SliceHeader => "SliceHeader",
            HeaderKind::StringHeader => "StringHeader",
        }
    }

    fn signature(self) -> &'static [(&'static str, &'static str)] {
        match self {
            HeaderKind::SliceHeader => &[("Cap", "int"), ("Data", "uintptr"), ("Len", "int")],
            HeaderKind::StringHeader => &[("Data", "uintptr"), ("Len", "int")],
        }
    }
}

/// Number of `int`, `uint` and `uintptr` fields in a struct.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArchCount {
    pub count: u64,
    /// Some field type could not be resolved, so `count` is a lower bound.
    pub incomplete: bool,
}

const MAX_DEPTH: u32 = 16;

pub struct TypeEnv<'a> {
    pub files: &'a [SyntaxTree],
    pub imports: &'a [ImportTable],
    types: HashMap<String, Loc>,
    funcs: HashMap<String, Loc>,
    vars: HashMap<String, (usize, Declaration)>,
    unresolved: Cell<u64>,
}

fn parse_int(text: &str) -> Option<u64> {
    let t = text.replace('_', "");
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok()
    } else if let Some(bin) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u64::from_str_radix(bin, 2).ok()
    } else if let Some(oct) = t.strip_prefix("0o").or_else(|| t.strip_prefix("0O")) {
        u64::from_str_radix(oct, 8).ok()
    } else if t.len() > 1 && t.starts_with('0') {
        u64::from_str_radix(&t[1..], 8).ok()
    } else {
        t.parse().ok()
    }
}

impl<'a> TypeEnv<'a> {
    pub fn new(files: &'a [SyntaxTree], imports: &'a [ImportTable]) -> Self {
        let mut env = TypeEnv {
            files,
            imports,
            types: HashMap::new(),
            funcs: HashMap::new(),
            vars: HashMap::new(),
            unresolved: Cell::new(0),
        };
        for (file, tree) in files.iter().enumerate() {
            for decl in scope::file_declarations(tree) {
                let name = tree.text(decl.name).to_string();
                match decl.kind {
                    DeclKind::Type => {
                        if let Some(t) = decl.type_expr {
                            env.types.insert(name, Loc { file, node: t });
                        }
                    }
                    DeclKind::Func => {
                        if let Some(r) = tree.child_by_field(decl.site, "result") {
                            env.funcs.insert(name, Loc { file, node: r });
                        }
                    }
                    DeclKind::Var | DeclKind::Const => {
                        env.vars.insert(name, (file, decl));
                    }
                    _ => {}
                }
            }
        }
        env
    }

    pub fn tree(&self, file: usize) -> &SyntaxTree {
        &self.files[file]
    }

    /// Cross-package named types met while matching header signatures.
    pub fn unresolved_types(&self) -> u64 {
        self.unresolved.get()
    }

    fn type_decl(&self, file: usize, at: NodeId, name: &str) -> Option<Loc> {
        let tree = &self.files[file];
        match scope::lookup(tree, at, name) {
            Some(d) if d.kind == DeclKind::Type => d.type_expr.map(|node| Loc { file, node }),
            Some(_) => None,
            None => self.types.get(name).copied(),
        }
    }

    fn is_value_name(&self, file: usize, at: NodeId, name: &str) -> bool {
        let tree = &self.files[file];
        match scope::lookup(tree, at, name) {
            Some(d) => d.kind != DeclKind::Type,
            None => self.vars.contains_key(name) || self.funcs.contains_key(name),
        }
    }

    /// Interprets a type expression, also accepting the expression forms a
    /// type takes in conversion callee position (`(*T)`, `pkg.T`).
    pub fn type_of(&self, file: usize, node: NodeId) -> TypeRef {
        let tree = &self.files[file];
        let node = tree.unparen(node);
        match tree.grammar_kind(node) {
            "type_identifier" | "identifier" => {
                let name = tree.text(node);
                if let Some(def) = self.type_decl(file, node, name) {
                    return TypeRef::Named {
                        name: name.to_string(),
                        def,
                    };
                }
                if self.is_value_name(file, node, name) {
                    return TypeRef::Unknown;
                }
                if is_predeclared_type(name) {
                    return TypeRef::Basic(name.to_string());
                }
                if self.imports[file].is_dot_imported("reflect")
                    && matches!(name, "SliceHeader" | "StringHeader")
                {
                    return TypeRef::External {
                        package: "reflect".into(),
                        name: name.to_string(),
                    };
                }
                TypeRef::Unknown
            }
            "qualified_type" | "selector_expression" => {
                let Some((qualifier, member)) = crate::census::selector_parts(tree, node) else {
                    return TypeRef::Unknown;
                };
                match self.imports[file].path_of(tree.text(qualifier)) {
                    Some("unsafe") if tree.text(member) == "Pointer" => TypeRef::Other,
                    Some(path)
                        if scope::lookup(tree, qualifier, tree.text(qualifier)).is_none() =>
                    {
                        TypeRef::External {
                            package: path.to_string(),
                            name: tree.text(member).to_string(),
                        }
                    }
                    _ => TypeRef::Unknown,
                }
            }
            "pointer_type" => match tree.children(node).first() {
                Some(&inner) => TypeRef::Pointer(Box::new(self.type_of(file, inner))),
                None => TypeRef::Unknown,
            },
            "unary_expression" if tree.kind(node) == NodeKind::StarExpr => {
                match tree.child_by_field(node, "operand") {
                    Some(inner) => TypeRef::Pointer(Box::new(self.type_of(file, inner))),
                    None => TypeRef::Unknown,
                }
            }
            "slice_type" => match tree.child_by_field(node, "element") {
                Some(e) => TypeRef::Slice(Box::new(self.type_of(file, e))),
                None => TypeRef::Unknown,
            },
            "array_type" => {
                let len = tree
                    .child_by_field(node, "length")
                    .and_then(|l| self.const_int(file, l, 0));
                match tree.child_by_field(node, "element") {
                    Some(e) => TypeRef::Array(len, Box::new(self.type_of(file, e))),
                    None => TypeRef::Unknown,
                }
            }
            "struct_type" => TypeRef::Struct(Loc { file, node }),
            "map_type" | "channel_type" | "function_type" | "interface_type" => TypeRef::Other,
            _ => TypeRef::Unknown,
        }
    }

    fn const_int(&self, file: usize, node: NodeId, depth: u32) -> Option<u64> {
        let tree = &self.files[file];
        let node = tree.unparen(node);
        match tree.grammar_kind(node) {
            "int_literal" => parse_int(tree.text(node)),
            "identifier" if depth < MAX_DEPTH => {
                let name = tree.text(node);
                let (f, decl) = match scope::lookup(tree, node, name) {
                    Some(d) => (file, d),
                    None => *self.vars.get(name)?,
                };
                if decl.kind != DeclKind::Const {
                    return None;
                }
                self.const_int(f, decl.value?, depth + 1)
            }
            _ => None,
        }
    }

    /// Follows package-local named types to their definition.
    pub fn underlying(&self, ty: &TypeRef) -> TypeRef {
        let mut ty = ty.clone();
        for _ in 0..MAX_DEPTH {
            match ty {
                TypeRef::Named { def, .. } => ty = self.type_of(def.file, def.node),
                other => return other,
            }
        }
        TypeRef::Unknown
    }

    /// Type of a value expression, as far as it can be recovered locally.
    pub fn expr_type(&self, file: usize, node: NodeId) -> TypeRef {
        self.expr_type_at(file, node, 0)
    }

    fn decl_type(&self, file: usize, decl: &Declaration, depth: u32) -> TypeRef {
        if let Some(t) = decl.type_expr {
            return self.type_of(file, t);
        }
        match (decl.kind, decl.value) {
            (DeclKind::ShortVar | DeclKind::Var | DeclKind::Const, Some(v)) => {
                self.expr_type_at(file, v, depth + 1)
            }
            _ => TypeRef::Unknown,
        }
    }

    pub fn is_type_expr(&self, file: usize, node: NodeId) -> bool {
        let tree = &self.files[file];
        let node = tree.unparen(node);
        match tree.grammar_kind(node) {
            "identifier" | "type_identifier" => {
                let name = tree.text(node);
                self.type_decl(file, node, name).is_some()
                    || (is_predeclared_type(name) && !self.is_value_name(file, node, name))
            }
            "pointer_type" | "slice_type" | "array_type" | "map_type" | "channel_type"
            | "function_type" | "struct_type" | "interface_type" | "qualified_type" => true,
            "unary_expression" => tree.kind(node) == NodeKind::StarExpr,
            _ => false,
        }
    }

    fn expr_type_at(&self, file: usize, node: NodeId, depth: u32) -> TypeRef {
        if depth > MAX_DEPTH {
            return TypeRef::Unknown;
        }
        let tree = &self.files[file];
        let raw = node;
        let node = tree.unparen(node);
        match tree.grammar_kind(node) {
            "composite_literal" => match tree.child_by_field(node, "type") {
                Some(t) => self.type_of(file, t),
                None => TypeRef::Unknown,
            },
            "type_conversion_expression" => match tree.child_by_field(node, "type") {
                Some(t) => self.type_of(file, t),
                None => TypeRef::Unknown,
            },
            "call_expression" => {
                let Some(callee) = tree.child_by_field(node, "function") else {
                    return TypeRef::Unknown;
                };
                let first_arg = tree
                    .child_by_field(node, "arguments")
                    .and_then(|a| tree.children(a).first().copied());
                if tree.grammar_kind(callee) == "parenthesized_expression"
                    || self.is_type_expr(file, callee)
                {
                    return self.type_of(file, callee);
                }
                if tree.grammar_kind(callee) == "selector_expression" {
                    if let TypeRef::Other = self.type_of(file, callee) {
                        return TypeRef::Other;
                    }
                }
                if tree.grammar_kind(callee) == "identifier" {
                    let name = tree.text(callee);
                    let shadowed =
                        self.is_value_name(file, callee, name) && !self.funcs.contains_key(name);
                    match (name, first_arg) {
                        ("new", Some(a)) if !shadowed => {
                            return TypeRef::Pointer(Box::new(self.type_of(file, a)))
                        }
                        ("make", Some(a)) if !shadowed => return self.type_of(file, a),
                        _ => {}
                    }
                    if scope::lookup(tree, callee, name).is_none_or(|d| d.kind == DeclKind::Func) {
                        if let Some(result) = self.funcs.get(name) {
                            return self.single_result(*result);
                        }
                    }
                }
                TypeRef::Unknown
            }
            "unary_expression" => {
                let Some(operand) = tree.child_by_field(node, "operand") else {
                    return TypeRef::Unknown;
                };
                match tree.kind(node) {
                    NodeKind::UnaryAddrExpr => {
                        TypeRef::Pointer(Box::new(self.expr_type_at(file, operand, depth + 1)))
                    }
                    NodeKind::StarExpr => match self.expr_type_at(file, operand, depth + 1) {
                        TypeRef::Pointer(inner) => *inner,
                        _ => TypeRef::Unknown,
                    },
                    _ => TypeRef::Unknown,
                }
            }
            "identifier" => {
                let name = tree.text(node);
                match scope::lookup(tree, raw, name) {
                    Some(d) => self.decl_type(file, &d, depth),
                    None => match self.vars.get(name) {
                        Some((f, d)) => self.decl_type(*f, d, depth),
                        None => TypeRef::Unknown,
                    },
                }
            }
            "selector_expression" => {
                let (Some(operand), Some(field)) = (
                    tree.child_by_field(node, "operand"),
                    tree.child_by_field(node, "field"),
                ) else {
                    return TypeRef::Unknown;
                };
                let base = self.expr_type_at(file, operand, depth + 1);
                let TypeRef::Struct(loc) = self.underlying(base.pointee_or_self()) else {
                    return TypeRef::Unknown;
                };
                self.field_type(loc, tree.text(field))
                    .unwrap_or(TypeRef::Unknown)
            }
            "index_expression" => match tree.child_by_field(node, "operand") {
                Some(o) => match self.underlying(&self.expr_type_at(file, o, depth + 1)) {
                    TypeRef::Slice(e) | TypeRef::Array(_, e) => *e,
                    TypeRef::Basic(s) if s == "string" => TypeRef::Basic("byte".into()),
                    _ => TypeRef::Unknown,
                },
                None => TypeRef::Unknown,
            },
            "slice_expression" => match tree.child_by_field(node, "operand") {
                Some(o) => match self.underlying(&self.expr_type_at(file, o, depth + 1)) {
                    TypeRef::Array(_, e) => TypeRef::Slice(e),
                    other => other,
                },
                None => TypeRef::Unknown,
            },
            "interpreted_string_literal" | "raw_string_literal" => TypeRef::Basic("string".into()),
            _ => TypeRef::Unknown,
        }
    }

    fn single_result(&self, result: Loc) -> TypeRef {
        let tree = &self.files[result.file];
        match tree.kind(result.node) {
            NodeKind::ResultList if tree.grammar_kind(result.node) == "result" => {
                match tree.children(result.node).first() {
                    Some(&t) => self.type_of(result.file, t),
                    None => TypeRef::Unknown,
                }
            }
            _ => {
                let params = tree.children(result.node);
                match params {
                    [p] if tree.children_by_field(*p, "name").count() <= 1 => {
                        match tree.child_by_field(*p, "type") {
                            Some(t) => self.type_of(result.file, t),
                            None => TypeRef::Unknown,
                        }
                    }
                    _ => TypeRef::Unknown,
                }
            }
        }
    }

    /// (name, type, embedded) for each field; embedded fields are named after
    /// their type.
    fn fields(&self, loc: Loc) -> Vec<(String, NodeId, bool)> {
        let tree = &self.files[loc.file];
        let mut out = Vec::new();
        for list in tree.children(loc.node) {
            for &decl in tree.children(*list) {
                if tree.kind(decl) != NodeKind::Field {
                    continue;
                }
                let Some(ty) = tree.child_by_field(decl, "type") else {
                    continue;
                };
                let names: Vec<NodeId> = tree.children_by_field(decl, "name").collect();
                if names.is_empty() {
                    let name = tree.text(ty).rsplit('.').next().unwrap_or("").to_string();
                    out.push((name, decl, true));
                } else {
                    out.extend(
                        names
                            .into_iter()
                            .map(|n| (tree.text(n).to_string(), ty, false)),
                    );
                }
            }
        }
        out
    }

    fn field_type(&self, loc: Loc, name: &str) -> Option<TypeRef> {
        let (_, node, embedded) = self.fields(loc).into_iter().find(|f| f.0 == name)?;
        Some(self.field_decl_type(loc.file, node, embedded))
    }

    fn field_decl_type(&self, file: usize, node: NodeId, embedded: bool) -> TypeRef {
        let tree = &self.files[file];
        if !embedded {
            return self.type_of(file, node);
        }
        let Some(ty) = tree.child_by_field(node, "type") else {
            return TypeRef::Unknown;
        };
        let inner = self.type_of(file, ty);
        if tree.text(node).trim_start().starts_with('*') {
            TypeRef::Pointer(Box::new(inner))
        } else {
            inner
        }
    }

    /// The header kind a type matches: the reflect header structs themselves
    /// or any struct with exactly the same field names and types.
    pub fn header_kind(&self, ty: &TypeRef) -> Option<HeaderKind> {
        match ty {
            TypeRef::External { package, name } if package == "reflect" => match name.as_str() {
                "SliceHeader" => Some(HeaderKind::SliceHeader),
                "StringHeader" => Some(HeaderKind::StringHeader),
                _ => None,
            },
            TypeRef::External { .. } => {
                self.unresolved.set(self.unresolved.get() + 1);
                None
            }
            TypeRef::Named { .. } => self.header_kind(&self.underlying(ty)),
            TypeRef::Struct(loc) => {
                let mut fields: Vec<(String, String)> = Vec::new();
                for (name, node, embedded) in self.fields(*loc) {
                    if embedded {
                        return None;
                    }
                    match self.type_of(loc.file, node) {
                        TypeRef::Basic(b) => fields.push((name, b)),
                        _ => return None,
                    }
                }
                fields.sort();
                [HeaderKind::SliceHeader, HeaderKind::StringHeader]
                    .into_iter()
                    .find(|k| {
                        fields.len() == k.signature().len()
                            && fields
                                .iter()
                                .zip(k.signature())
                                .all(|((n, t), (sn, st))| n == sn && t == st)
                    })
            }
            _ => None,
        }
    }

    /// Counts fields typed exactly `int`, `uint` or `uintptr`.
    ///
    /// Nested and embedded structs declared in the package are counted
    /// recursively and arrays contribute their length times the element
    /// count. With `flat` only direct fields are counted.
    pub fn count_arch_dependent_fields(&self, ty: &TypeRef, flat: bool) -> ArchCount {
        let mut acc = ArchCount::default();
        match self.underlying(ty) {
            TypeRef::Struct(loc) => self.count_struct(loc, flat, 0, &mut acc),
            _ => acc.incomplete = true,
        }
        acc
    }

    fn count_struct(&self, loc: Loc, flat: bool, depth: u32, acc: &mut ArchCount) {
        if depth > MAX_DEPTH {
            acc.incomplete = true;
            return;
        }
        for (_, node, embedded) in self.fields(loc) {
            let ty = self.field_decl_type(loc.file, node, embedded);
            self.count_field(&ty, 1, flat, depth, acc);
        }
    }

    fn count_field(&self, ty: &TypeRef, times: u64, flat: bool, depth: u32, acc: &mut ArchCount) {
        match ty {
            TypeRef::Basic(b) => {
                if matches!(b.as_str(), "int" | "uint" | "uintptr") {
                    acc.count += times;
                }
            }
            _ if flat => {}
            TypeRef::Named { .. } => match self.underlying(ty) {
                s @ (TypeRef::Struct(_) | TypeRef::Array(..)) => {
                    self.count_field(&s, times, flat, depth + 1, acc)
                }
                TypeRef::Unknown => acc.incomplete = true,
                _ => {}
            },
            TypeRef::Struct(loc) => {
                let mut inner = ArchCount::default();
                self.count_struct(*loc, flat, depth + 1, &mut inner);
                acc.count += inner.count * times;
                acc.incomplete |= inner.incomplete;
            }
            TypeRef::Array(len, elem) => match len {
                Some(n) => self.count_field(elem, times * n, flat, depth + 1, acc),
                None => acc.incomplete = true,
            },
            TypeRef::External { .. } | TypeRef::Unknown => acc.incomplete = true,
            TypeRef::Pointer(_) | TypeRef::Slice(_) | TypeRef::Other => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_file, resolve_imports};

    fn env_for(src: &str) -> (Vec<SyntaxTree>, Vec<ImportTable>) {
        let tree = parse_file(src, "t.go");
        let imports = vec![resolve_imports(&tree)];
        (vec![tree], imports)
    }

    fn named(env: &TypeEnv<'_>, name: &str) -> TypeRef {
        let loc = env.types[name];
        TypeRef::Named {
            name: name.into(),
            def: loc,
        }
    }

    #[test]
    fn header_signatures() {
        let (files, imports) = env_for(
            "package p\nimport \"reflect\"\n\
             type myHdr struct { Data uintptr; Len int; Cap int }\n\
             type strHdr struct { Len int; Data uintptr }\n\
             type extra struct { Data uintptr; Len int; Cap int; Extra bool }\n\
             type alias = myHdr\n\
             var _ reflect.SliceHeader\n",
        );
        let env = TypeEnv::new(&files, &imports);
        assert_eq!(
            env.header_kind(&named(&env, "myHdr")),
            Some(HeaderKind::SliceHeader)
        );
        assert_eq!(
            env.header_kind(&named(&env, "alias")),
            Some(HeaderKind::SliceHeader)
        );
        assert_eq!(
            env.header_kind(&named(&env, "strHdr")),
            Some(HeaderKind::StringHeader)
        );
        assert_eq!(env.header_kind(&named(&env, "extra")), None);
        let reflect = TypeRef::External {
            package: "reflect".into(),
            name: "SliceHeader".into(),
        };
        assert_eq!(env.header_kind(&reflect), Some(HeaderKind::SliceHeader));
        let other = TypeRef::External {
            package: "example.com/x".into(),
            name: "Hdr".into(),
        };
        assert_eq!(env.header_kind(&other), None);
        assert_eq!(env.unresolved_types(), 1);
    }

    fn count(src_types: &str, name: &str, flat: bool) -> ArchCount {
        let (files, imports) = env_for(&format!("package p\nimport \"ext\"\n{src_types}\n"));
        let env = TypeEnv::new(&files, &imports);
        env.count_arch_dependent_fields(&named(&env, name), flat)
    }

    #[test]
    fn arch_dependent_counts() {
        let c = |s, flat| count(&format!("type T {s}"), "T", flat);
        assert_eq!(
            c("struct { a int; b int64 }", false),
            ArchCount {
                count: 1,
                incomplete: false
            }
        );
        assert_eq!(c("struct { a [4]uintptr }", false).count, 4);
        assert_eq!(
            c("struct { inner struct { n uint }; m int64 }", false).count,
            1
        );
        assert_eq!(
            c(
                "struct { a, b int; c uint; d uintptr; e *int; f []int }",
                false
            )
            .count,
            4
        );
        assert_eq!(c("struct { a [2][3]int }", false).count, 6);
        assert_eq!(
            c("struct { a [4]uintptr; inner struct { n uint } }", true).count,
            0
        );
        let ext = c("struct { a int; x ext.T }", false);
        assert_eq!(
            ext,
            ArchCount {
                count: 1,
                incomplete: true
            }
        );
        let missing = c("struct { a int; x Missing }", false);
        assert!(missing.incomplete);
    }

    #[test]
    fn recursion_through_named_and_embedded() {
        let src = "const N = 3\ntype In struct { a uint; b uint8 }\ntype Out struct { In; x [N]In; p *In }";
        assert_eq!(
            count(src, "Out", false),
            ArchCount {
                count: 4,
                incomplete: false
            }
        );
        assert_eq!(count(src, "Out", true).count, 0);
    }

    #[test]
    fn expression_types() {
        let (files, imports) = env_for(
            "package p\nimport (\"reflect\"; \"unsafe\")\n\
             type H struct { Data uintptr; Len int; Cap int }\n\
             type W struct { h H }\n\
             func mk() *H { return nil }\n\
             func f(b []byte, s string, w *W) {\n\
             \tp := (*reflect.SliceHeader)(unsafe.Pointer(&b))\n\
             \tq := mk()\n\
             \tr := w.h\n\
             \tvar z H\n\
             \tn := new(H)\n\
             \t_ = p; _ = q; _ = r; _ = z; _ = n; _ = b; _ = s\n}\n",
        );
        let env = TypeEnv::new(&files, &imports);
        let tree = &files[0];
        let use_of = |name: &str| {
            tree.ids()
                .filter(|&i| tree.grammar_kind(i) == "identifier" && tree.text(i) == name)
                .last()
                .unwrap()
        };
        let kind = |name: &str| env.header_kind(env.expr_type(0, use_of(name)).pointee_or_self());
        assert_eq!(kind("p"), Some(HeaderKind::SliceHeader));
        assert_eq!(kind("q"), Some(HeaderKind::SliceHeader));
        assert_eq!(kind("r"), Some(HeaderKind::SliceHeader));
        assert_eq!(kind("z"), Some(HeaderKind::SliceHeader));
        assert_eq!(kind("n"), Some(HeaderKind::SliceHeader));
        assert!(matches!(
            env.underlying(&env.expr_type(0, use_of("b"))),
            TypeRef::Slice(_)
        ));
        assert_eq!(
            env.expr_type(0, use_of("s")),
            TypeRef::Basic("string".into())
        );
    }
}
