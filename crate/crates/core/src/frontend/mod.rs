//! Go source frontend: positioned syntax trees, package enumeration and
//! import tables.
//!
//! Parsing is delegated to the tree-sitter Go grammar; the concrete syntax
//! tree is then lowered into an immutable arena ([`SyntaxTree`]) that uses a
//! small node vocabulary ([`NodeKind`]) sufficient for the unsafe census and
//! the lint passes. The original grammar kind and field name of every node
//! are kept so that analyses can make finer distinctions when they need to.

mod imports;
mod package;
pub mod scope;

pub use imports::{default_package_name, resolve_imports, ImportTable};
pub use package::{enumerate_package, EnumerateOptions};

use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Index of a node inside its [`SyntaxTree`] arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    PackageClause,
    ImportDecl,
    FuncDecl,
    ParamList,
    ResultList,
    TypeDecl,
    StructType,
    Field,
    VarDecl,
    AssignStmt,
    ReturnStmt,
    CompositeLit,
    CallExpr,
    SelectorExpr,
    StarExpr,
    UnaryAddrExpr,
    Ident,
    BasicLit,
    IfStmt,
    ForStmt,
    SwitchStmt,
    Block,
    OtherExpr,
    OtherStmt,
}

impl NodeKind {
    pub fn is_statement_boundary(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::IfStmt
                | NodeKind::ForStmt
                | NodeKind::SwitchStmt
                | NodeKind::FuncDecl
                | NodeKind::OtherStmt
        )
    }
}

/// Byte span of a node: offset and length, in bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub offset: usize,
    pub len: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.end()
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.offset <= other.offset && other.end() <= self.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    /// Kind name in the underlying Go grammar (e.g. `short_var_declaration`).
    pub grammar_kind: &'static str,
    /// Field name this node occupies in its parent, if any.
    pub field: Option<&'static str>,
    pub span: Span,
    /// 1-based line of the first byte.
    pub line: u32,
    /// 1-based byte column of the first byte.
    pub column: u32,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Set on error-recovery nodes produced for malformed input.
    pub is_error: bool,
    end: u32,
}

/// Positioned parse tree of one Go source file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxTree {
    file_path: String,
    package_name: String,
    source: String,
    nodes: Vec<SyntaxNode>,
    had_parse_errors: bool,
}

impl SyntaxTree {
    pub fn file_path(&self) -> &str {
        &self.file_path
    }

    pub fn package_name(&self) -> &str {
        &self.package_name
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn had_parse_errors(&self) -> bool {
        self.had_parse_errors
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SyntaxNode {
        &self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.node(id).kind
    }

    pub fn grammar_kind(&self, id: NodeId) -> &'static str {
        self.node(id).grammar_kind
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    pub fn text(&self, id: NodeId) -> &str {
        &self.source[self.node(id).span.range()]
    }

    /// First child occupying the given grammar field.
    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<NodeId> {
        self.children(id)
            .iter()
            .copied()
            .find(|&c| self.node(c).field == Some(field))
    }

    pub fn children_by_field<'a>(
        &'a self,
        id: NodeId,
        field: &'a str,
    ) -> impl Iterator<Item = NodeId> + 'a {
        self.children(id)
            .iter()
            .copied()
            .filter(move |&c| self.node(c).field == Some(field))
    }

    /// All node ids in pre-order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Strict descendants of `id` in pre-order.
    pub fn descendants(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (id.0 + 1..self.node(id).end).map(NodeId)
    }

    pub fn is_ancestor(&self, ancestor: NodeId, id: NodeId) -> bool {
        ancestor.0 < id.0 && id.0 < self.node(ancestor).end
    }

    /// Proper ancestors from the parent upwards.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    /// Whether the subtree rooted at `id` contains an error-recovery node.
    pub fn contains_error(&self, id: NodeId) -> bool {
        self.node(id).is_error || self.descendants(id).any(|d| self.node(d).is_error)
    }

    /// Skips parenthesized expressions and types.
    pub fn unparen(&self, mut id: NodeId) -> NodeId {
        while matches!(
            self.grammar_kind(id),
            "parenthesized_expression" | "parenthesized_type"
        ) {
            match self.children(id).first() {
                Some(&inner) => id = inner,
                None => break,
            }
        }
        id
    }

    /// Nearest enclosing function declaration or function literal.
    pub fn enclosing_function(&self, id: NodeId) -> Option<NodeId> {
        self.ancestors(id)
            .find(|&a| self.kind(a) == NodeKind::FuncDecl)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn kind_for(grammar_kind: &str, operator: Option<&str>) -> NodeKind {
    match grammar_kind {
        "package_clause" => NodeKind::PackageClause,
        "import_declaration" => NodeKind::ImportDecl,
        "function_declaration" | "method_declaration" | "func_literal" => NodeKind::FuncDecl,
        "parameter_list" | "type_parameter_list" => NodeKind::ParamList,
        "type_declaration" => NodeKind::TypeDecl,
        "struct_type" => NodeKind::StructType,
        "field_declaration" => NodeKind::Field,
        "var_declaration" | "const_declaration" => NodeKind::VarDecl,
        "assignment_statement" | "short_var_declaration" => NodeKind::AssignStmt,
        "return_statement" => NodeKind::ReturnStmt,
        "composite_literal" => NodeKind::CompositeLit,
        "call_expression" | "type_conversion_expression" => NodeKind::CallExpr,
        "selector_expression" | "qualified_type" => NodeKind::SelectorExpr,
        "pointer_type" => NodeKind::StarExpr,
        "unary_expression" => match operator {
            Some("*") => NodeKind::StarExpr,
            Some("&") => NodeKind::UnaryAddrExpr,
            _ => NodeKind::OtherExpr,
        },
        "identifier" | "type_identifier" | "field_identifier" | "package_identifier"
        | "label_name" | "blank_identifier" => NodeKind::Ident,
        "int_literal"
        | "float_literal"
        | "imaginary_literal"
        | "rune_literal"
        | "interpreted_string_literal"
        | "raw_string_literal" => NodeKind::BasicLit,
        "if_statement" => NodeKind::IfStmt,
        "for_statement" => NodeKind::ForStmt,
        "expression_switch_statement" | "type_switch_statement" | "select_statement" => {
            NodeKind::SwitchStmt
        }
        "block" => NodeKind::Block,
        "source_file"
        | "ERROR"
        | "expression_statement"
        | "send_statement"
        | "inc_statement"
        | "dec_statement"
        | "go_statement"
        | "defer_statement"
        | "break_statement"
        | "continue_statement"
        | "goto_statement"
        | "fallthrough_statement"
        | "labeled_statement"
        | "empty_statement"
        | "expression_case"
        | "default_case"
        | "type_case"
        | "communication_case" => NodeKind::OtherStmt,
        _ => NodeKind::OtherExpr,
    }
}

fn is_atomic_literal(grammar_kind: &str) -> bool {
    matches!(
        grammar_kind,
        "interpreted_string_literal" | "raw_string_literal" | "rune_literal"
    )
}

struct Lowering<'s> {
    source: &'s str,
    nodes: Vec<SyntaxNode>,
    saw_missing: bool,
}

impl Lowering<'_> {
    fn push(
        &mut self,
        kind: NodeKind,
        grammar_kind: &'static str,
        field: Option<&'static str>,
        ts: &tree_sitter::Node<'_>,
        parent: Option<NodeId>,
    ) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let pos = ts.start_position();
        self.nodes.push(SyntaxNode {
            kind,
            grammar_kind,
            field,
            span: Span {
                offset: ts.start_byte(),
                len: ts.end_byte() - ts.start_byte(),
            },
            line: pos.row as u32 + 1,
            column: pos.column as u32 + 1,
            parent,
            children: Vec::new(),
            is_error: ts.is_error(),
            end: id.0 + 1,
        });
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        id
    }

    fn finish(&mut self, id: NodeId) {
        self.nodes[id.index()].end = self.nodes.len() as u32;
    }

    fn lower(
        &mut self,
        ts: tree_sitter::Node<'_>,
        field: Option<&'static str>,
        parent: Option<NodeId>,
    ) {
        if ts.is_missing() {
            self.saw_missing = true;
            return;
        }
        let grammar_kind = if ts.is_error() {
            "ERROR"
        } else {
            kind_name(&ts)
        };
        if !ts.is_named() || grammar_kind == "comment" {
            return;
        }
        if grammar_kind == "statement_list" {
            self.lower_children(ts, parent);
            return;
        }
        // A bare result type is wrapped so that every signature result sits
        // under a ResultList node.
        if field == Some("result") && grammar_kind != "parameter_list" {
            let wrapper = self.push(NodeKind::ResultList, "result", Some("result"), &ts, parent);
            self.lower(ts, None, Some(wrapper));
            self.finish(wrapper);
            return;
        }
        let operator = if grammar_kind == "unary_expression" {
            ts.child_by_field_name("operator")
                .and_then(|op| self.source.get(op.byte_range()))
        } else {
            None
        };
        let mut kind = kind_for(grammar_kind, operator);
        if kind == NodeKind::ParamList && field == Some("result") {
            kind = NodeKind::ResultList;
        }
        let id = self.push(kind, grammar_kind, field, &ts, parent);
        if !is_atomic_literal(grammar_kind) {
            self.lower_children(ts, Some(id));
        }
        self.finish(id);
    }

    fn lower_children(&mut self, ts: tree_sitter::Node<'_>, parent: Option<NodeId>) {
        let mut cursor = ts.walk();
        if !cursor.goto_first_child() {
            return;
        }
        loop {
            let child = cursor.node();
            let field = cursor
                .field_id()
                .and_then(|f| GO.field_name_for_id(f.get()));
            self.lower(child, field, parent);
            if !cursor.goto_next_sibling() {
                break;
            }
        }
    }
}

static GO: LazyLock<tree_sitter::Language> = LazyLock::new(|| tree_sitter_go::LANGUAGE.into());

fn kind_name(ts: &tree_sitter::Node<'_>) -> &'static str {
    GO.node_kind_for_id(ts.kind_id()).unwrap_or("ERROR")
}

/// Parses one Go source file into a positioned syntax tree.
///
/// Never fails: malformed input yields a best-effort tree with
/// `had_parse_errors` set.
pub fn parse_file(source: &str, file_path: &str) -> SyntaxTree {
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&GO)
        .expect("tree-sitter Go grammar is ABI compatible");
    let Some(ts_tree) = parser.parse(source, None) else {
        log::warn!("{file_path}: parser produced no tree");
        return SyntaxTree {
            file_path: file_path.to_string(),
            package_name: String::new(),
            source: source.to_string(),
            nodes: vec![SyntaxNode {
                kind: NodeKind::OtherStmt,
                grammar_kind: "source_file",
                field: None,
                span: Span {
                    offset: 0,
                    len: source.len(),
                },
                line: 1,
                column: 1,
                parent: None,
                children: Vec::new(),
                is_error: true,
                end: 1,
            }],
            had_parse_errors: true,
        };
    };
    let ts_root = ts_tree.root_node();
    let mut lowering = Lowering {
        source,
        nodes: Vec::new(),
        saw_missing: false,
    };
    lowering.lower(ts_root, None, None);
    let had_parse_errors = ts_root.has_error() || lowering.saw_missing;
    let nodes = lowering.nodes;

    let package_name = nodes
        .first()
        .map(|root| {
            root.children
                .iter()
                .map(|c| &nodes[c.index()])
                .find(|n| n.kind == NodeKind::PackageClause)
        })
        .and_then(|clause| clause)
        .and_then(|clause| {
            clause
                .children
                .iter()
                .map(|c| &nodes[c.index()])
                .find(|n| n.grammar_kind == "package_identifier")
        })
        .map(|ident| source[ident.span.range()].to_string())
        .unwrap_or_default();

    SyntaxTree {
        file_path: file_path.to_string(),
        package_name,
        source: source.to_string(),
        nodes,
        had_parse_errors,
    }
}

/// Reads and parses a file from disk.
pub fn parse_path(path: &std::path::Path) -> Result<SyntaxTree, FrontendError> {
    let source = std::fs::read(path).map_err(|source| FrontendError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let source = String::from_utf8_lossy(&source);
    Ok(parse_file(&source, &path.display().to_string()))
}
