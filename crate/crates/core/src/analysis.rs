//! Neighboring paths, contexts and the certificate conditions that make a
//! derivation tree evidence for k-linearity or regularity.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, RuleId};
use crate::tree::{Dependency, DerivationTree, Label, NodeId};

/// Two nonterminal neighboring paths below a common parent. Both paths start
/// with the origin; `left[1]` is the direct left sibling of `right[1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPair {
    pub origin: NodeId,
    pub left: Vec<NodeId>,
    pub right: Vec<NodeId>,
}

impl PathPair {
    pub fn path(&self, side: Side) -> &[NodeId] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Non-context-free rule ids in top-down order.
pub type ContextString = Vec<RuleId>;

/// Nonterminal nodes with exactly two nonterminal children.
pub fn branching_nodes(tree: &DerivationTree) -> Vec<NodeId> {
    tree.nodes()
        .iter()
        .filter(|n| {
            n.label.is_nonterminal()
                && n.children
                    .iter()
                    .filter(|&&c| tree.label(c).is_nonterminal())
                    .count()
                    == 2
        })
        .map(|n| n.id)
        .collect()
}

/// Follows the rightmost (left path) or leftmost (right path) nonterminal
/// spine down from `top`. When a node has only terminal or ε children the
/// path closes on the outermost of them.
fn spine(tree: &DerivationTree, top: NodeId, side: Side) -> Vec<NodeId> {
    let mut path = vec![top];
    let mut cur = top;
    loop {
        let children = tree.children(cur);
        if children.is_empty() {
            break;
        }
        let mut nts = children.iter().copied().filter(|&c| tree.label(c).is_nonterminal());
        let nt = match side {
            Side::Left => nts.last(),
            Side::Right => nts.next(),
        };
        match nt {
            Some(c) => {
                path.push(c);
                cur = c;
            }
            None => {
                let outer = match side {
                    Side::Left => *children.last().unwrap(),
                    Side::Right => children[0],
                };
                path.push(outer);
                break;
            }
        }
    }
    path
}

/// Every pair of nonterminal neighboring paths, by origin id and then by
/// sibling position.
pub fn neighboring_paths(tree: &DerivationTree) -> Vec<PathPair> {
    let mut out = Vec::new();
    for node in tree.nodes() {
        for w in node.children.windows(2) {
            let (m1, n1) = (w[0], w[1]);
            if !(tree.label(m1).is_nonterminal() && tree.label(n1).is_nonterminal()) {
                continue;
            }
            let mut left = vec![node.id];
            left.extend(spine(tree, m1, Side::Left));
            let mut right = vec![node.id];
            right.extend(spine(tree, n1, Side::Right));
            out.push(PathPair {
                origin: node.id,
                left,
                right,
            });
        }
    }
    out
}

/// Dependencies straddling the pair, with their left and right endpoints,
/// ordered top-down by the left endpoint.
fn straddling(tree: &DerivationTree, pair: &PathPair) -> Vec<(Dependency, NodeId, NodeId)> {
    let left: HashSet<NodeId> = pair.left[1..].iter().copied().collect();
    let right: HashSet<NodeId> = pair.right[1..].iter().copied().collect();
    let mut deps: Vec<(Dependency, NodeId, NodeId)> = tree
        .dependencies()
        .iter()
        .filter_map(|d| {
            if left.contains(&d.left) && right.contains(&d.right) {
                Some((*d, d.left, d.right))
            } else if left.contains(&d.right) && right.contains(&d.left) {
                Some((*d, d.right, d.left))
            } else {
                None
            }
        })
        .collect();
    deps.sort_by_key(|&(_, l, _)| tree.depth(l));
    deps
}

fn check_pair(tree: &DerivationTree, pair: &PathPair) -> Result<()> {
    if neighboring_paths(tree).contains(pair) {
        Ok(())
    } else {
        Err(Error::ForeignPathPair)
    }
}

/// The context of a path pair: rules of the dependencies linking its two
/// paths, top-down.
pub fn pair_context(tree: &DerivationTree, pair: &PathPair) -> Result<ContextString> {
    check_pair(tree, pair)?;
    Ok(straddling(tree, pair).into_iter().map(|(d, _, _)| d.rule).collect())
}

/// The suffix of the pair's context whose endpoints on `side` lie strictly
/// below `node`.
pub fn descendant_context(
    tree: &DerivationTree,
    pair: &PathPair,
    node: NodeId,
    side: Side,
) -> Result<ContextString> {
    check_pair(tree, pair)?;
    if !pair.path(side).contains(&node) {
        return Err(Error::NodeNotOnPath(node));
    }
    let depth = tree.depth(node);
    Ok(straddling(tree, pair)
        .into_iter()
        .filter(|&(_, l, r)| {
            let end = match side {
                Side::Left => l,
                Side::Right => r,
            };
            tree.depth(end) > depth
        })
        .map(|(d, _, _)| d.rule)
        .collect())
}

/// Largest context length over all path pairs, with a pair attaining it.
pub fn max_dependency_count(tree: &DerivationTree) -> (usize, Option<PathPair>) {
    let mut best: (usize, Option<PathPair>) = (0, None);
    for pair in neighboring_paths(tree) {
        let n = straddling(tree, &pair).len();
        if best.1.is_none() || n > best.0 {
            best = (n, Some(pair));
        }
    }
    best
}

/// Dependencies whose endpoints do not lie on the two paths of any single
/// neighboring path pair.
pub fn non_neighbor_violations(tree: &DerivationTree) -> Vec<Dependency> {
    let covered: HashSet<Dependency> = neighboring_paths(tree)
        .iter()
        .flat_map(|p| straddling(tree, p))
        .map(|(d, _, _)| d)
        .collect();
    tree.dependencies()
        .iter()
        .filter(|d| !covered.contains(d))
        .copied()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchingMode {
    /// Bounded branching per path pair and no terminal emitted on the way
    /// from the root to any branching node.
    Strict,
    /// Bounded branching per path pair only.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlowBranching {
    pub holds: bool,
    pub degree: usize,
}

pub fn slow_branching(tree: &DerivationTree, mode: BranchingMode) -> SlowBranching {
    let branching = branching_nodes(tree);
    let set: HashSet<NodeId> = branching.iter().copied().collect();
    let bounded = neighboring_paths(tree).iter().all(|p| {
        let nodes: HashSet<NodeId> = p.left.iter().chain(&p.right).copied().collect();
        nodes.iter().filter(|n| set.contains(n)).count() <= 2
    });
    let quiet = mode == BranchingMode::Lenient
        || branching.iter().all(|&b| {
            let mut cur = Some(b);
            while let Some(n) = cur {
                if tree.children(n).iter().any(|&c| tree.label(c).is_terminal()) {
                    return false;
                }
                cur = tree.parent(n);
            }
            true
        });
    SlowBranching {
        holds: bounded && quiet,
        degree: branching.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// k-linear from a linear core grammar.
    One,
    /// k-linear from a propagating linear core grammar.
    Two,
    /// Regular from a left linear core grammar.
    Three,
    /// Regular from a propagating left linear core grammar.
    Four,
}

impl Theorem {
    pub fn number(self) -> u8 {
        match self {
            Theorem::One => 1,
            Theorem::Two => 2,
            Theorem::Three => 3,
            Theorem::Four => 4,
        }
    }
}

impl TryFrom<u8> for Theorem {
    type Error = String;

    fn try_from(n: u8) -> std::result::Result<Self, String> {
        match n {
            1 => Ok(Theorem::One),
            2 => Ok(Theorem::Two),
            3 => Ok(Theorem::Three),
            4 => Ok(Theorem::Four),
            _ => Err(format!("theorem must be 1, 2, 3 or 4, not {n}")),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub theorem: Theorem,
    pub u: usize,
    pub k: Option<usize>,
    pub u_observed: usize,
    pub witness: Option<PathPair>,
    pub degree: usize,
    pub slow_branching_strict: bool,
    pub slow_branching_lenient: bool,
    pub non_neighbor_violations: Vec<Dependency>,
    pub linear_core: bool,
    pub left_linear_core: bool,
    pub propagating: bool,
    pub verdict: bool,
}

fn tree_fits_grammar(grammar: &Grammar, tree: &DerivationTree) -> bool {
    if let Some(f) = tree.grammar_fingerprint() {
        return f == grammar.fingerprint();
    }
    let n = grammar.symbols().len();
    tree.nodes().iter().all(|node| match node.label {
        Label::Epsilon => true,
        Label::Terminal(s) => s.index() < n && grammar.is_terminal(s),
        Label::Nonterminal(s) => s.index() < n && grammar.is_nonterminal(s),
    }) && tree
        .rules_applied()
        .values()
        .all(|&r| grammar.rule(r).is_ok())
}

/// Checks the hypotheses of the chosen theorem on one tree. `k`, when given,
/// must equal the tree's degree.
pub fn certificate_check(
    grammar: &Grammar,
    tree: &DerivationTree,
    theorem: Theorem,
    u: usize,
    k: Option<usize>,
) -> Result<CertificateReport> {
    certificate_check_with(grammar, tree, theorem, u, k, BranchingMode::Strict)
}

/// As [`certificate_check`], with the slow-branching condition of theorems
/// 1 and 2 taken in `mode`.
pub fn certificate_check_with(
    grammar: &Grammar,
    tree: &DerivationTree,
    theorem: Theorem,
    u: usize,
    k: Option<usize>,
    mode: BranchingMode,
) -> Result<CertificateReport> {
    if !tree_fits_grammar(grammar, tree) {
        return Err(Error::TreeGrammarMismatch);
    }
    let form = grammar.classify();
    let (u_observed, witness) = max_dependency_count(tree);
    let strict = slow_branching(tree, BranchingMode::Strict);
    let lenient = slow_branching(tree, BranchingMode::Lenient);
    let violations = non_neighbor_violations(tree);
    let bounded = u_observed <= u;
    let degree_ok = k.is_none_or(|k| k == strict.degree);
    let slow = match mode {
        BranchingMode::Strict => strict.holds,
        BranchingMode::Lenient => lenient.holds,
    };
    let verdict = match theorem {
        Theorem::One => bounded && slow && degree_ok && violations.is_empty() && form.linear_core,
        Theorem::Two => bounded && slow && degree_ok && form.linear_core && form.propagating,
        Theorem::Three => bounded && violations.is_empty() && form.left_linear_core,
        Theorem::Four => bounded && form.left_linear_core && form.propagating,
    };
    Ok(CertificateReport {
        theorem,
        u,
        k,
        u_observed,
        witness,
        degree: strict.degree,
        slow_branching_strict: strict.holds,
        slow_branching_lenient: lenient.holds,
        non_neighbor_violations: violations,
        linear_core: form.linear_core,
        left_linear_core: form.left_linear_core,
        propagating: form.propagating,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive::Derivation;
    use crate::format::parse_grammar;
    use crate::tree::{build_tree, TreeBuilder};

    const G_AB: &str = "start: S\nterminals: a b\nrules:\nS -> A B\nA -> a A\nB -> B b\nA B -> C D\nC -> eps\nD -> eps\n";

    fn g_ab_tree() -> (Grammar, DerivationTree) {
        let gr = parse_grammar(G_AB).unwrap();
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (2, 0), (3, 2), (4, 1), (5, 1), (6, 1)]);
        let t = build_tree(&gr, &d).unwrap();
        (gr, t)
    }

    #[test]
    fn g_ab_paths_and_context() {
        let (gr, t) = g_ab_tree();
        assert_eq!(branching_nodes(&t), vec![t.root()]);
        let pairs = neighboring_paths(&t);
        assert_eq!(pairs.len(), 1);
        let p = &pairs[0];
        let label = |n: NodeId| match t.label(n) {
            Label::Epsilon => "eps".to_string(),
            l => gr.name(l.symbol().unwrap()).to_string(),
        };
        let l: Vec<String> = p.left.iter().map(|&n| label(n)).collect();
        let r: Vec<String> = p.right.iter().map(|&n| label(n)).collect();
        assert_eq!(l, vec!["S", "A", "A", "C", "eps"]);
        assert_eq!(r, vec!["S", "B", "B", "D", "eps"]);
        assert_eq!(pair_context(&t, p).unwrap(), vec![RuleId(4)]);
        assert_eq!(descendant_context(&t, p, p.left[1], Side::Left).unwrap(), vec![RuleId(4)]);
        assert_eq!(descendant_context(&t, p, p.left[2], Side::Left).unwrap(), vec![]);
        assert_eq!(descendant_context(&t, p, p.right[1], Side::Right).unwrap(), vec![RuleId(4)]);
        assert_eq!(
            descendant_context(&t, p, p.right[1], Side::Left),
            Err(Error::NodeNotOnPath(p.right[1]))
        );
        assert_eq!(max_dependency_count(&t).0, 1);
        assert!(non_neighbor_violations(&t).is_empty());
        assert_eq!(
            slow_branching(&t, BranchingMode::Strict),
            SlowBranching { holds: true, degree: 1 }
        );
    }

    #[test]
    fn foreign_pair_is_rejected() {
        let (_, t) = g_ab_tree();
        let mut p = neighboring_paths(&t)[0].clone();
        p.left.pop();
        assert_eq!(pair_context(&t, &p), Err(Error::ForeignPathPair));
    }

    #[test]
    fn g_ab_certificate() {
        let (gr, t) = g_ab_tree();
        let r = certificate_check(&gr, &t, Theorem::One, 1, Some(1)).unwrap();
        assert!(r.verdict);
        let r = certificate_check(&gr, &t, Theorem::One, 0, Some(1)).unwrap();
        assert!(!r.verdict);
        // not propagating
        assert!(!certificate_check(&gr, &t, Theorem::Two, 1, Some(1)).unwrap().verdict);
        // not left linear core
        assert!(!certificate_check(&gr, &t, Theorem::Three, 1, None).unwrap().verdict);
    }

    #[test]
    fn certificate_rejects_foreign_tree() {
        let (_, t) = g_ab_tree();
        let other = parse_grammar("start: S\nterminals: a\nrules:\nS -> a\n").unwrap();
        assert_eq!(
            certificate_check(&other, &t, Theorem::One, 1, None),
            Err(Error::TreeGrammarMismatch)
        );
    }

    #[test]
    fn terminal_before_branch_breaks_strictness_only() {
        let gr = parse_grammar(
            "start: S\nterminals: a b\nrules:\nS -> a S b\nS -> A B\nA -> a\nB -> b\n",
        )
        .unwrap();
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (2, 1), (3, 1), (4, 2)]);
        let t = build_tree(&gr, &d).unwrap();
        assert_eq!(
            slow_branching(&t, BranchingMode::Strict),
            SlowBranching { holds: false, degree: 1 }
        );
        assert_eq!(
            slow_branching(&t, BranchingMode::Lenient),
            SlowBranching { holds: true, degree: 1 }
        );
    }

    #[test]
    fn single_node_tree() {
        let t = TreeBuilder::new(Label::Epsilon).build();
        assert!(branching_nodes(&t).is_empty());
        assert!(neighboring_paths(&t).is_empty());
        assert_eq!(max_dependency_count(&t), (0, None));
        assert_eq!(
            slow_branching(&t, BranchingMode::Strict),
            SlowBranching { holds: true, degree: 0 }
        );
    }

    #[test]
    fn linear_tree_has_no_pairs() {
        let gr = parse_grammar("start: S\nterminals: a b\nrules:\nS -> a S b\nS -> eps\n").unwrap();
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (1, 1), (2, 2)]);
        let t = build_tree(&gr, &d).unwrap();
        assert!(neighboring_paths(&t).is_empty());
    }

    #[test]
    fn straddling_dependency_is_a_violation() {
        // S(X(A, P), Y(Q, B)) with A and B linked: they sit on the outer
        // spines of X and Y, not on neighboring paths.
        let gr = parse_grammar(
            "start: S\nterminals: a\nrules:\nS -> X Y\nX -> A P\nY -> Q B\nA B -> C D\nP -> a\nQ -> a\nC -> a\nD -> a\n",
        )
        .unwrap();
        let nt = |n: &str| Label::Nonterminal(gr.id_of(n).unwrap());
        let mut b = TreeBuilder::new(nt("S"));
        let x = b.add_child(0, nt("X"));
        let y = b.add_child(0, nt("Y"));
        let a = b.add_child(x, nt("A"));
        b.add_child(x, nt("P"));
        b.add_child(y, nt("Q"));
        let bb = b.add_child(y, nt("B"));
        b.add_child(a, nt("C"));
        b.add_child(bb, nt("D"));
        b.add_dependency(a, bb, RuleId(4));
        let t = b.build();
        let v = non_neighbor_violations(&t);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].left, v[0].right), (a, bb));
        let r = certificate_check(&gr, &t, Theorem::One, 5, None).unwrap();
        assert!(!r.verdict);
        // theorem 2 drops the independence condition but needs propagation
        assert!(!certificate_check(&gr, &t, Theorem::Two, 5, None).unwrap().verdict);
    }
}
