//! Derivation trees for linear core grammars.
//!
//! A tree is grown from a one-node tree by replaying a derivation: a
//! context-free step replaces the i-th non-ε leaf by the rule tree of the
//! applied rule, and an `AB -> CD` step gives the i-th and (i+1)-th non-ε
//! leaves one child each and links the two rewritten nodes as a
//! context-dependent pair. ε-leaves are kept in the tree.

use std::collections::BTreeMap;

use crate::derive::{Derivation, Form};
use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule, RuleForm, RuleId, SymbolId};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Terminal(SymbolId),
    Nonterminal(SymbolId),
    Epsilon,
}

impl Label {
    pub fn of(grammar: &Grammar, symbol: SymbolId) -> Self {
        if grammar.is_terminal(symbol) {
            Label::Terminal(symbol)
        } else {
            Label::Nonterminal(symbol)
        }
    }

    pub fn symbol(self) -> Option<SymbolId> {
        match self {
            Label::Terminal(s) | Label::Nonterminal(s) => Some(s),
            Label::Epsilon => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Label::Terminal(_))
    }

    pub fn is_nonterminal(self) -> bool {
        matches!(self, Label::Nonterminal(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub id: NodeId,
    pub label: Label,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
}

/// Two nodes rewritten together by one `AB -> CD` step. `left` is the node
/// that was labeled A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dependency {
    pub left: NodeId,
    pub right: NodeId,
    pub rule: RuleId,
}

impl Dependency {
    /// The pair as (smaller id, larger id).
    pub fn key(&self) -> (NodeId, NodeId) {
        (self.left.min(self.right), self.left.max(self.right))
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.left == node || self.right == node
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    nodes: Vec<TreeNode>,
    root: NodeId,
    dependencies: Vec<Dependency>,
    rule_of: BTreeMap<NodeId, RuleId>,
    grammar: Option<u64>,
}

impl DerivationTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, id: NodeId) -> Label {
        self.nodes[id].label
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Dependency pairs sorted by their `(smaller, larger)` key.
    pub fn dependencies(&self) -> &[Dependency] {
        &self.dependencies
    }

    pub fn dependency_of(&self, node: NodeId) -> Option<&Dependency> {
        self.dependencies.iter().find(|d| d.contains(node))
    }

    /// Two nodes are context-independent iff no dependency links them.
    pub fn context_dependent(&self, a: NodeId, b: NodeId) -> bool {
        self.dependencies
            .iter()
            .any(|d| d.key() == (a.min(b), a.max(b)))
    }

    pub fn rule_of(&self, node: NodeId) -> Option<RuleId> {
        self.rule_of.get(&node).copied()
    }

    pub fn rules_applied(&self) -> &BTreeMap<NodeId, RuleId> {
        &self.rule_of
    }

    /// Fingerprint of the grammar the tree was built from, if any.
    pub fn grammar_fingerprint(&self) -> Option<u64> {
        self.grammar
    }

    pub fn depth(&self, mut id: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[id].parent {
            d += 1;
            id = p;
        }
        d
    }

    /// Leaves in left-to-right order, including ε-leaves.
    pub fn leaves(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            let children = &self.nodes[n].children;
            if children.is_empty() {
                out.push(n);
            } else {
                stack.extend(children.iter().rev());
            }
        }
        out
    }

    /// Leaf labels left to right, ε-leaves contributing nothing.
    pub fn frontier(&self) -> Form {
        self.leaves()
            .into_iter()
            .filter_map(|n| self.nodes[n].label.symbol())
            .collect()
    }
}

/// Builds arbitrary labeled ordered trees, for trees that do not come from a
/// derivation.
#[derive(Debug, Clone)]
pub struct TreeBuilder {
    tree: DerivationTree,
}

impl TreeBuilder {
    pub fn new(root: Label) -> Self {
        TreeBuilder {
            tree: DerivationTree {
                nodes: vec![TreeNode {
                    id: 0,
                    label: root,
                    children: Vec::new(),
                    parent: None,
                }],
                root: 0,
                dependencies: Vec::new(),
                rule_of: BTreeMap::new(),
                grammar: None,
            },
        }
    }

    pub fn root(&self) -> NodeId {
        self.tree.root
    }

    pub fn add_child(&mut self, parent: NodeId, label: Label) -> NodeId {
        let id = self.tree.nodes.len();
        self.tree.nodes.push(TreeNode {
            id,
            label,
            children: Vec::new(),
            parent: Some(parent),
        });
        self.tree.nodes[parent].children.push(id);
        id
    }

    pub fn set_rule(&mut self, node: NodeId, rule: RuleId) {
        self.tree.rule_of.insert(node, rule);
    }

    pub fn add_dependency(&mut self, left: NodeId, right: NodeId, rule: RuleId) {
        self.tree.rule_of.insert(left, rule);
        self.tree.rule_of.insert(right, rule);
        self.tree.dependencies.push(Dependency { left, right, rule });
    }

    pub fn build(mut self) -> DerivationTree {
        self.tree.dependencies.sort_by_key(|d| (d.key(), d.rule));
        self.tree
    }
}

/// The tree `A<x>` for a context-free rule `A -> x`; an ε right-hand side
/// yields a single ε-leaf.
pub fn rule_tree(grammar: &Grammar, rule: &Rule) -> Result<DerivationTree> {
    if !rule.is_context_free() {
        return Err(Error::NotContextFreeRule(rule.id));
    }
    let mut b = TreeBuilder::new(Label::of(grammar, rule.lhs[0]));
    expand(&mut b, grammar, 0, rule);
    let mut tree = b.build();
    tree.grammar = Some(grammar.fingerprint());
    Ok(tree)
}

fn expand(b: &mut TreeBuilder, grammar: &Grammar, node: NodeId, rule: &Rule) -> Vec<NodeId> {
    b.set_rule(node, rule.id);
    if rule.rhs.is_empty() {
        b.add_child(node, Label::Epsilon);
        return Vec::new();
    }
    rule.rhs
        .iter()
        .map(|&s| b.add_child(node, Label::of(grammar, s)))
        .collect()
}

/// Builds the derivation tree of a derivation.
pub fn build_tree(grammar: &Grammar, derivation: &Derivation) -> Result<DerivationTree> {
    derivation.replay(grammar)?;
    let mut b = TreeBuilder::new(Label::of(grammar, derivation.start));
    // non-ε leaves, left to right; mirrors the current sentential form
    let mut front: Vec<NodeId> = vec![0];
    for step in &derivation.steps {
        let rule = grammar.rule(step.rule)?;
        let i = step.position;
        if rule.is_context_free() {
            let new = expand(&mut b, grammar, front[i], rule);
            front.splice(i..=i, new);
        } else if grammar.rule_form(rule) == RuleForm::Swap {
            let (a, c) = (front[i], front[i + 1]);
            let na = b.add_child(a, Label::of(grammar, rule.rhs[0]));
            let nc = b.add_child(c, Label::of(grammar, rule.rhs[1]));
            b.add_dependency(a, c, rule.id);
            front[i] = na;
            front[i + 1] = nc;
        } else {
            return Err(Error::NotLinearCore(rule.id));
        }
    }
    let mut tree = b.build();
    tree.grammar = Some(grammar.fingerprint());
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_grammar;

    const G_AB: &str = "start: S\nterminals: a b\nrules:\nS -> A B\nA -> a A\nB -> B b\nA B -> C D\nC -> eps\nD -> eps\n";

    fn g(text: &str) -> Grammar {
        parse_grammar(text).unwrap()
    }

    fn names(gr: &Grammar, t: &DerivationTree, ids: &[NodeId]) -> Vec<String> {
        ids.iter()
            .map(|&n| match t.label(n) {
                Label::Epsilon => "eps".to_string(),
                l => gr.name(l.symbol().unwrap()).to_string(),
            })
            .collect()
    }

    #[test]
    fn rule_trees() {
        let gr = g(G_AB);
        let t = rule_tree(&gr, gr.rule(RuleId(2)).unwrap()).unwrap();
        assert_eq!(names(&gr, &t, &[t.root()]), vec!["A"]);
        assert_eq!(names(&gr, &t, t.children(t.root())), vec!["a", "A"]);
        let t = rule_tree(&gr, gr.rule(RuleId(5)).unwrap()).unwrap();
        assert_eq!(t.children(0).len(), 1);
        assert_eq!(t.label(t.children(0)[0]), Label::Epsilon);
        assert!(t.frontier().is_empty());
        assert_eq!(
            rule_tree(&gr, gr.rule(RuleId(4)).unwrap()),
            Err(Error::NotContextFreeRule(RuleId(4)))
        );
    }

    #[test]
    fn g_ab_tree() {
        let gr = g(G_AB);
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (2, 0), (3, 2), (4, 1), (5, 1), (6, 1)]);
        let t = build_tree(&gr, &d).unwrap();
        assert_eq!(gr.render(&t.frontier()), "ab");
        assert_eq!(t.dependencies().len(), 1);
        let dep = t.dependencies()[0];
        // the deeper A and the deeper B
        assert_eq!(names(&gr, &t, &[dep.left, dep.right]), vec!["A", "B"]);
        assert_eq!(t.depth(dep.left), 2);
        assert_eq!(t.depth(dep.right), 2);
        assert_eq!(t.rule_of(dep.left), Some(RuleId(4)));
        assert_eq!(t.children(dep.left).len(), 1);
        assert_eq!(t.children(dep.right).len(), 1);
        assert!(t.context_dependent(dep.right, dep.left));
        assert!(!t.context_dependent(t.root(), dep.left));
    }

    #[test]
    fn zero_step_tree() {
        let gr = g(G_AB);
        let t = build_tree(&gr, &Derivation::new(gr.start(), vec![])).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.frontier(), vec![gr.start()]);
    }

    #[test]
    fn partial_tree_frontier_matches_replay() {
        let gr = g(G_AB);
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (2, 0), (3, 2), (4, 1), (5, 1)]);
        let t = build_tree(&gr, &d).unwrap();
        assert_eq!(t.frontier(), d.final_form(&gr).unwrap());
    }

    #[test]
    fn bad_derivation_is_rejected() {
        let gr = g(G_AB);
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (4, 1)]);
        assert!(matches!(build_tree(&gr, &d), Err(Error::ReplayMismatch { .. })));
    }

    #[test]
    fn non_linear_core_step_is_rejected() {
        let gr = g("start: S\nterminals: a\nrules:\nS -> A A A\nA A A -> a\n");
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (2, 0)]);
        assert_eq!(build_tree(&gr, &d), Err(Error::NotLinearCore(RuleId(2))));
    }
}
