//! Intra-procedural control-flow graphs over statement nodes.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::frontend::{NodeId, NodeKind, SyntaxTree};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BasicBlock {
    pub stmts: Vec<NodeId>,
    /// Not reachable from the entry block.
    pub dead: bool,
}

#[derive(Clone, Debug)]
pub struct Cfg {
    pub function: NodeId,
    pub blocks: Vec<BasicBlock>,
    pub entry: usize,
    pub edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    location: HashMap<NodeId, (usize, usize)>,
}

impl Cfg {
    pub fn predecessors(&self, block: usize) -> &[usize] {
        &self.preds[block]
    }

    /// (block, index within block) of a statement recorded in the graph.
    pub fn locate(&self, stmt: NodeId) -> Option<(usize, usize)> {
        self.location.get(&stmt).copied()
    }

    /// The innermost statement recorded in the graph that encloses `node`.
    pub fn statement_of(&self, tree: &SyntaxTree, node: NodeId) -> Option<NodeId> {
        std::iter::once(node)
            .chain(tree.ancestors(node))
            .take_while(|&a| a != self.function)
            .find(|a| self.location.contains_key(a))
    }
}

#[derive(Clone)]
struct Jump {
    label: Option<String>,
    break_to: usize,
    continue_to: Option<usize>,
}

struct Builder<'t> {
    tree: &'t SyntaxTree,
    blocks: Vec<BasicBlock>,
    edges: BTreeSet<(usize, usize)>,
    jumps: Vec<Jump>,
    labels: HashMap<String, usize>,
    gotos: Vec<(usize, String)>,
    unresolved_jump: Vec<usize>,
}

impl<'t> Builder<'t> {
    fn new_block(&mut self) -> usize {
        self.blocks.push(BasicBlock::default());
        self.blocks.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize) {
        self.edges.insert((from, to));
    }

    fn push(&mut self, block: usize, stmt: NodeId) {
        self.blocks[block].stmts.push(stmt);
    }

    fn body_statements(&self, node: NodeId) -> Vec<NodeId> {
        self.tree
            .children(node)
            .iter()
            .copied()
            .filter(|&c| self.tree.node(c).field.is_none())
            .collect()
    }

    /// Lowers a statement list; `None` means control cannot fall through.
    fn stmts(&mut self, list: &[NodeId], mut cur: Option<usize>) -> Option<usize> {
        for &s in list {
            let block = match cur {
                Some(b) => b,
                None => self.new_block(),
            };
            cur = self.stmt(s, block, None);
        }
        cur
    }

    fn block_stmt(&mut self, block: Option<NodeId>, cur: usize) -> Option<usize> {
        match block {
            Some(b) => {
                let list = self.body_statements(b);
                self.stmts(&list, Some(cur))
            }
            None => Some(cur),
        }
    }

    fn label_text(&self, stmt: NodeId) -> Option<String> {
        self.tree
            .children(stmt)
            .iter()
            .find(|&&c| self.tree.grammar_kind(c) == "label_name")
            .map(|&c| self.tree.text(c).to_string())
    }

    fn stmt(&mut self, s: NodeId, cur: usize, label: Option<String>) -> Option<usize> {
        let tree = self.tree;
        match tree.grammar_kind(s) {
            "block" => self.block_stmt(Some(s), cur),
            "labeled_statement" => {
                let target = self.new_block();
                self.edge(cur, target);
                let name = tree
                    .child_by_field(s, "label")
                    .map(|l| tree.text(l).to_string())
                    .unwrap_or_default();
                self.labels.insert(name.clone(), target);
                self.push(target, s);
                match self.body_statements(s).first() {
                    Some(&inner) => self.stmt(inner, target, Some(name)),
                    None => Some(target),
                }
            }
            "if_statement" => {
                if let Some(init) = tree.child_by_field(s, "initializer") {
                    self.push(cur, init);
                }
                self.push(cur, s);
                let then_block = self.new_block();
                self.edge(cur, then_block);
                let then_end = self.block_stmt(tree.child_by_field(s, "consequence"), then_block);
                let else_end = match tree.child_by_field(s, "alternative") {
                    Some(alt) => {
                        let else_block = self.new_block();
                        self.edge(cur, else_block);
                        if tree.kind(alt) == NodeKind::IfStmt {
                            self.stmt(alt, else_block, None)
                        } else {
                            self.block_stmt(Some(alt), else_block)
                        }
                    }
                    None => Some(cur),
                };
                let join = self.new_block();
                for end in [then_end, else_end].into_iter().flatten() {
                    self.edge(end, join);
                }
                Some(join)
            }
            "for_statement" => {
                let clause = tree
                    .children(s)
                    .iter()
                    .copied()
                    .find(|&c| tree.node(c).field != Some("body"));
                let mut infinite = clause.is_none();
                if let Some(c) = clause.filter(|&c| tree.grammar_kind(c) == "for_clause") {
                    if let Some(init) = tree.child_by_field(c, "initializer") {
                        self.push(cur, init);
                    }
                    infinite = tree.child_by_field(c, "condition").is_none();
                }
                let header = self.new_block();
                self.edge(cur, header);
                self.push(header, s);
                let body = self.new_block();
                let exit = self.new_block();
                self.edge(header, body);
                if !infinite {
                    self.edge(header, exit);
                }
                self.jumps.push(Jump {
                    label,
                    break_to: exit,
                    continue_to: Some(header),
                });
                let end = self.block_stmt(tree.child_by_field(s, "body"), body);
                self.jumps.pop();
                if let Some(end) = end {
                    self.edge(end, header);
                }
                Some(exit)
            }
            "expression_switch_statement" | "type_switch_statement" | "select_statement" => {
                if let Some(init) = tree.child_by_field(s, "initializer") {
                    self.push(cur, init);
                }
                self.push(cur, s);
                let exit = self.new_block();
                let cases: Vec<NodeId> = tree
                    .children(s)
                    .iter()
                    .copied()
                    .filter(|&c| tree.grammar_kind(c).ends_with("_case"))
                    .collect();
                let case_blocks: Vec<usize> = cases.iter().map(|_| self.new_block()).collect();
                let has_default = cases
                    .iter()
                    .any(|&c| tree.grammar_kind(c) == "default_case");
                if !has_default {
                    self.edge(cur, exit);
                }
                self.jumps.push(Jump {
                    label,
                    break_to: exit,
                    continue_to: None,
                });
                for (i, (&case, &block)) in cases.iter().zip(&case_blocks).enumerate() {
                    self.edge(cur, block);
                    self.push(block, case);
                    let list = self.body_statements(case);
                    let falls = list
                        .last()
                        .is_some_and(|&l| tree.grammar_kind(l) == "fallthrough_statement");
                    if let Some(end) = self.stmts(&list, Some(block)) {
                        let target = match case_blocks.get(i + 1) {
                            Some(&next) if falls => next,
                            _ => exit,
                        };
                        self.edge(end, target);
                    }
                }
                self.jumps.pop();
                Some(exit)
            }
            "return_statement" => {
                self.push(cur, s);
                None
            }
            "break_statement" | "continue_statement" => {
                self.push(cur, s);
                let is_break = tree.grammar_kind(s) == "break_statement";
                let wanted = self.label_text(s);
                let target = self
                    .jumps
                    .iter()
                    .rev()
                    .filter(|j| wanted.is_none() || j.label == wanted)
                    .find_map(|j| {
                        if is_break {
                            Some(j.break_to)
                        } else {
                            j.continue_to
                        }
                    });
                match target {
                    Some(t) => self.edge(cur, t),
                    None => self.unresolved_jump.push(cur),
                }
                None
            }
            "goto_statement" => {
                self.push(cur, s);
                match self.label_text(s) {
                    Some(l) => self.gotos.push((cur, l)),
                    None => self.unresolved_jump.push(cur),
                }
                None
            }
            _ => {
                self.push(cur, s);
                Some(cur)
            }
        }
    }
}

/// Builds the control-flow graph of a function declaration or literal.
///
/// Straight-line statements share a block. `if`, `for` and `switch` split
/// blocks with one edge per branch and a back-edge per loop; jumps to labels
/// that cannot be resolved over-connect to every block.
pub fn build_cfg(tree: &SyntaxTree, function: NodeId) -> Cfg {
    let mut b = Builder {
        tree,
        blocks: Vec::new(),
        edges: BTreeSet::new(),
        jumps: Vec::new(),
        labels: HashMap::new(),
        gotos: Vec::new(),
        unresolved_jump: Vec::new(),
    };
    let entry = b.new_block();
    b.block_stmt(tree.child_by_field(function, "body"), entry);

    for (from, label) in std::mem::take(&mut b.gotos) {
        match b.labels.get(&label) {
            Some(&to) => b.edge(from, to),
            None => b.unresolved_jump.push(from),
        }
    }
    let all = b.blocks.len();
    for from in std::mem::take(&mut b.unresolved_jump) {
        for to in 1..all {
            b.edge(from, to);
        }
    }

    let n = b.blocks.len();
    let edges: Vec<(usize, usize)> = b.edges.into_iter().collect();
    let mut succs = vec![Vec::new(); n];
    let mut preds = vec![Vec::new(); n];
    for &(from, to) in &edges {
        succs[from].push(to);
        preds[to].push(from);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([entry]);
    seen[entry] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &succs[x] {
            if !std::mem::replace(&mut seen[y], true) {
                queue.push_back(y);
            }
        }
    }
    let mut blocks = b.blocks;
    let mut location = HashMap::new();
    for (i, block) in blocks.iter_mut().enumerate() {
        block.dead = !seen[i];
        for (k, &s) in block.stmts.iter().enumerate() {
            location.insert(s, (i, k));
        }
    }
    Cfg {
        function,
        blocks,
        entry,
        edges,
        preds,
        location,
    }
}

/// Every function declaration, method and function literal in the tree.
pub fn functions(tree: &SyntaxTree) -> Vec<NodeId> {
    tree.ids()
        .filter(|&id| {
            tree.kind(id) == NodeKind::FuncDecl && tree.child_by_field(id, "body").is_some()
        })
        .collect()
}
