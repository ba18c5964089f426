//! Sentential-form rewriting and bounded exploration of a grammar's language.
//!
//! All searches are breadth-first over sentential forms with a visited set,
//! which makes them deterministic and exhaustive within their bounds.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule, RuleId, SymbolId};

pub type Form = Vec<SymbolId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub rule: RuleId,
    /// 0-based symbol index where the rule's left-hand side starts.
    pub position: usize,
}

impl Step {
    pub fn new(rule: usize, position: usize) -> Self {
        Step {
            rule: RuleId(rule),
            position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub start: SymbolId,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn new(start: SymbolId, steps: Vec<Step>) -> Self {
        Derivation { start, steps }
    }

    pub fn from_pairs(start: SymbolId, pairs: &[(usize, usize)]) -> Self {
        Derivation {
            start,
            steps: pairs.iter().map(|&(r, p)| Step::new(r, p)).collect(),
        }
    }

    /// The chain `w_0 ... w_n`, starting with the start symbol.
    pub fn replay(&self, grammar: &Grammar) -> Result<Vec<Form>> {
        let mut chain = vec![vec![self.start]];
        for (i, step) in self.steps.iter().enumerate() {
            let rule = grammar.rule(step.rule)?;
            let next = apply_rule(chain.last().unwrap(), rule, step.position).map_err(|_| {
                Error::ReplayMismatch {
                    step: i,
                    rule: step.rule,
                    position: step.position,
                }
            })?;
            chain.push(next);
        }
        Ok(chain)
    }

    pub fn final_form(&self, grammar: &Grammar) -> Result<Form> {
        Ok(self.replay(grammar)?.pop().unwrap())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let steps: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("({},{})", s.rule, s.position))
            .collect();
        write!(f, "[{}]", steps.join(","))
    }
}

/// Replaces the occurrence of `rule.lhs` at `position` with `rule.rhs`.
pub fn apply_rule(form: &[SymbolId], rule: &Rule, position: usize) -> Result<Form> {
    if !matches_at(form, &rule.lhs, position) {
        return Err(Error::NoMatchAtPosition {
            rule: rule.id,
            position,
        });
    }
    let mut out = Vec::with_capacity(form.len() + rule.rhs.len() - rule.lhs.len());
    out.extend_from_slice(&form[..position]);
    out.extend_from_slice(&rule.rhs);
    out.extend_from_slice(&form[position + rule.lhs.len()..]);
    Ok(out)
}

fn matches_at(form: &[SymbolId], lhs: &[SymbolId], position: usize) -> bool {
    form.get(position..position + lhs.len()) == Some(lhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_steps: usize,
    pub max_form_len: usize,
}

impl SearchLimits {
    pub fn new(max_steps: usize, max_form_len: usize) -> Result<Self> {
        if max_steps == 0 || max_form_len == 0 {
            return Err(Error::InvalidLimits);
        }
        Ok(SearchLimits {
            max_steps,
            max_form_len,
        })
    }
}

/// Precomputed successor generation shared by the searches.
struct Rewriter<'g> {
    grammar: &'g Grammar,
    by_first: HashMap<SymbolId, Vec<&'g Rule>>,
    /// Nonterminals that occur on no left-hand side can never be rewritten.
    dead: HashSet<SymbolId>,
    terminals_inert: bool,
}

impl<'g> Rewriter<'g> {
    fn new(grammar: &'g Grammar) -> Self {
        let mut by_first: HashMap<SymbolId, Vec<&Rule>> = HashMap::new();
        for r in grammar.rules() {
            by_first.entry(r.lhs[0]).or_default().push(r);
        }
        let rewritable: HashSet<SymbolId> = grammar
            .rules()
            .iter()
            .flat_map(|r| r.lhs.iter().copied())
            .collect();
        let dead = grammar
            .nonterminals()
            .filter(|s| !rewritable.contains(s))
            .collect();
        Rewriter {
            grammar,
            by_first,
            dead,
            terminals_inert: grammar.terminals_inert(),
        }
    }

    fn is_terminal_form(&self, form: &[SymbolId]) -> bool {
        form.iter().all(|&s| self.grammar.is_terminal(s))
    }

    fn terminal_count(&self, form: &[SymbolId]) -> usize {
        form.iter().filter(|&&s| self.grammar.is_terminal(s)).count()
    }

    fn hopeless(&self, form: &[SymbolId]) -> bool {
        form.iter().any(|s| self.dead.contains(s))
    }

    /// Successors in (position, rule id) order.
    fn successors<'a>(&'a self, form: &'a [SymbolId]) -> impl Iterator<Item = (Step, Form)> + 'a {
        (0..form.len()).flat_map(move |pos| {
            self.by_first
                .get(&form[pos])
                .into_iter()
                .flatten()
                .filter(move |r| matches_at(form, &r.lhs, pos))
                .map(move |r| {
                    let next = apply_rule(form, r, pos).expect("matched");
                    (
                        Step {
                            rule: r.id,
                            position: pos,
                        },
                        next,
                    )
                })
        })
    }
}

/// Bounded slice of a language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub words: BTreeSet<Form>,
    pub max_len: usize,
    pub slack: usize,
    /// False when the node budget stopped the search early.
    pub complete: bool,
    pub explored: usize,
}

/// Slack used when none is given: none for propagating grammars, whose forms
/// never shrink, otherwise `max(4, max_len)`.
pub fn default_slack(grammar: &Grammar, max_len: usize) -> usize {
    if grammar.classify().propagating {
        0
    } else {
        max_len.max(4)
    }
}

/// Every word of length at most `max_len` derivable without any sentential
/// form longer than `max_len + slack`. Exact for propagating grammars; an
/// under-approximation for erasing ones.
pub fn enumerate_language(grammar: &Grammar, max_len: usize, slack: usize) -> Enumeration {
    enumerate_with_budget(grammar, max_len, slack, None)
}

pub fn enumerate_with_budget(
    grammar: &Grammar,
    max_len: usize,
    slack: usize,
    budget: Option<usize>,
) -> Enumeration {
    let rw = Rewriter::new(grammar);
    let bound = max_len + slack;
    let mut words = BTreeSet::new();
    let start = vec![grammar.start()];
    let mut visited: HashSet<Form> = HashSet::from([start.clone()]);
    let mut frontier = vec![start];
    let mut complete = true;
    'search: while !frontier.is_empty() {
        let mut next = Vec::new();
        for form in &frontier {
            if rw.is_terminal_form(form) {
                if form.len() <= max_len {
                    words.insert(form.clone());
                }
                continue;
            }
            for (_, succ) in rw.successors(form) {
                if succ.len() > bound
                    || (rw.terminals_inert && rw.terminal_count(&succ) > max_len)
                    || rw.hopeless(&succ)
                    || visited.contains(&succ)
                {
                    continue;
                }
                if budget.is_some_and(|b| visited.len() >= b) {
                    complete = false;
                    break 'search;
                }
                visited.insert(succ.clone());
                next.push(succ);
            }
        }
        frontier = next;
    }
    // forms still queued when the budget ran out may be terminal already
    for form in &frontier {
        if rw.is_terminal_form(form) && form.len() <= max_len {
            words.insert(form.clone());
        }
    }
    Enumeration {
        words,
        max_len,
        slack,
        complete,
        explored: visited.len(),
    }
}

/// Finds a shortest derivation of `word`. Ties are broken towards leftmost
/// positions and then lowest rule ids. `NotFoundWithinLimits` means no
/// derivation exists inside the limits.
pub fn derive_word(grammar: &Grammar, word: &[SymbolId], limits: SearchLimits) -> Result<Derivation> {
    let rw = Rewriter::new(grammar);
    let start = vec![grammar.start()];
    let not_found = || Error::NotFoundWithinLimits {
        word: grammar.render(word),
        max_steps: limits.max_steps,
        max_form_len: limits.max_form_len,
    };
    if word.len() > limits.max_form_len {
        return Err(not_found());
    }
    // arena of (form, parent, step)
    let mut arena: Vec<(Form, usize, Option<Step>)> = vec![(start.clone(), usize::MAX, None)];
    let mut visited: HashSet<Form> = HashSet::from([start]);
    let mut level = vec![0usize];
    let fits = |form: &[SymbolId]| -> bool {
        if form.len() > limits.max_form_len || rw.hopeless(form) {
            return false;
        }
        !rw.terminals_inert || terminal_shape_fits(grammar, form, word)
    };
    for depth in 0..=limits.max_steps {
        let mut next = Vec::new();
        for &idx in &level {
            if arena[idx].0 == word {
                let mut steps = Vec::new();
                let mut cur = idx;
                while let Some(step) = arena[cur].2 {
                    steps.push(step);
                    cur = arena[cur].1;
                }
                steps.reverse();
                return Ok(Derivation::new(grammar.start(), steps));
            }
        }
        if depth == limits.max_steps {
            break;
        }
        for &idx in &level {
            let form = arena[idx].0.clone();
            for (step, succ) in rw.successors(&form) {
                if !fits(&succ) || visited.contains(&succ) {
                    continue;
                }
                visited.insert(succ.clone());
                arena.push((succ, idx, Some(step)));
                next.push(arena.len() - 1);
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    Err(not_found())
}

/// With inert terminals, the terminal prefix and suffix of a form are final
/// and every maximal terminal run must occur in the target word, in order.
fn terminal_shape_fits(grammar: &Grammar, form: &[SymbolId], word: &[SymbolId]) -> bool {
    let runs: Vec<&[SymbolId]> = form
        .split(|&s| grammar.is_nonterminal(s))
        .collect();
    let total: usize = runs.iter().map(|r| r.len()).sum();
    if total > word.len() {
        return false;
    }
    if runs.len() == 1 {
        return runs[0] == word;
    }
    let (first, last) = (runs[0], runs[runs.len() - 1]);
    if !word.starts_with(first) || !word.ends_with(last) {
        return false;
    }
    let mut at = first.len();
    let end = word.len() - last.len();
    if at > end {
        return false;
    }
    for run in &runs[1..runs.len() - 1] {
        if run.is_empty() {
            continue;
        }
        match word[at..end].windows(run.len()).position(|w| w == *run) {
            Some(p) => at += p + run.len(),
            None => return false,
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equal(usize),
    Differ { witness: Vec<String>, owner: Side },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub outcome: Equivalence,
    /// Both enumerations finished inside their budgets.
    pub complete: bool,
    pub first_size: usize,
    pub second_size: usize,
}

impl EquivalenceVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self.outcome, Equivalence::Equal(_))
    }
}

/// Compares the bounded languages of two grammars. Words of `second` are
/// mapped through `projection` (identity for unmapped names) first.
pub fn bounded_equiv(
    first: &Grammar,
    second: &Grammar,
    max_len: usize,
    slack: usize,
    projection: Option<&BTreeMap<String, String>>,
) -> EquivalenceVerdict {
    bounded_equiv_with_budget(first, second, max_len, slack, projection, None)
}

pub fn bounded_equiv_with_budget(
    first: &Grammar,
    second: &Grammar,
    max_len: usize,
    slack: usize,
    projection: Option<&BTreeMap<String, String>>,
    budget: Option<usize>,
) -> EquivalenceVerdict {
    let a = enumerate_with_budget(first, max_len, slack, budget);
    let b = enumerate_with_budget(second, max_len, slack, budget);
    let left: BTreeSet<Vec<String>> = a.words.iter().map(|w| first.names(w)).collect();
    let right: BTreeSet<Vec<String>> = b
        .words
        .iter()
        .map(|w| {
            second
                .names(w)
                .into_iter()
                .map(|n| projection.and_then(|p| p.get(&n).cloned()).unwrap_or(n))
                .collect()
        })
        .collect();
    let witness = left
        .symmetric_difference(&right)
        .min_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    let outcome = match witness {
        None => Equivalence::Equal(max_len),
        Some(w) => Equivalence::Differ {
            witness: w.clone(),
            owner: if left.contains(w) { Side::First } else { Side::Second },
        },
    };
    EquivalenceVerdict {
        outcome,
        complete: a.complete && b.complete,
        first_size: left.len(),
        second_size: right.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_grammar;

    pub(crate) const G_AB: &str = "start: S\nterminals: a b\nrules:\nS -> A B\nA -> a A\nB -> B b\nA B -> C D\nC -> eps\nD -> eps\n";

    fn g(text: &str) -> Grammar {
        parse_grammar(text).unwrap()
    }

    fn form(gr: &Grammar, s: &str) -> Form {
        s.split_whitespace().map(|n| gr.id_of(n).unwrap()).collect()
    }

    /// Every derivation of at most `depth` steps, by plain recursion: an
    /// oracle independent of the visited-set search.
    fn brute_force(gr: &Grammar, max_len: usize, slack: usize, depth: usize) -> BTreeSet<Form> {
        fn go(gr: &Grammar, form: Form, bound: usize, max_len: usize, depth: usize, out: &mut BTreeSet<Form>) {
            if form.iter().all(|&s| gr.is_terminal(s)) {
                if form.len() <= max_len {
                    out.insert(form);
                }
                return;
            }
            if depth == 0 {
                return;
            }
            for r in gr.rules() {
                for pos in 0..form.len() {
                    if let Ok(next) = apply_rule(&form, r, pos) {
                        if next.len() <= bound {
                            go(gr, next, bound, max_len, depth - 1, out);
                        }
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(gr, vec![gr.start()], max_len + slack, max_len, depth, &mut out);
        out
    }

    #[test]
    fn apply_rule_cases() {
        let gr = g(G_AB);
        let swap = gr.rule(RuleId(4)).unwrap();
        assert_eq!(apply_rule(&form(&gr, "A B"), swap, 0).unwrap(), form(&gr, "C D"));
        assert_eq!(apply_rule(&form(&gr, "a A B b"), swap, 1).unwrap(), form(&gr, "a C D b"));
        let b_rule = gr.rule(RuleId(3)).unwrap();
        assert_eq!(
            apply_rule(&form(&gr, "a A"), b_rule, 0),
            Err(Error::NoMatchAtPosition { rule: RuleId(3), position: 0 })
        );
        assert!(apply_rule(&form(&gr, "A"), swap, 0).is_err());
    }

    #[test]
    fn replay_g_ab() {
        let gr = g(G_AB);
        let d = Derivation::from_pairs(gr.start(), &[(1, 0), (2, 0), (3, 2), (4, 1), (5, 1), (6, 1)]);
        let chain = d.replay(&gr).unwrap();
        let rendered: Vec<String> = chain.iter().map(|f| gr.names(f).join(" ")).collect();
        assert_eq!(
            rendered,
            vec!["S", "A B", "a A B", "a A B b", "a C D b", "a D b", "a b"]
        );
    }

    #[test]
    fn replay_edge_cases() {
        let gr = g(G_AB);
        let empty = Derivation::new(gr.start(), vec![]);
        assert_eq!(empty.replay(&gr).unwrap(), vec![vec![gr.start()]]);
        let bad = Derivation::from_pairs(gr.start(), &[(1, 0), (2, 1)]);
        assert_eq!(
            bad.replay(&gr),
            Err(Error::ReplayMismatch { step: 1, rule: RuleId(2), position: 1 })
        );
    }

    #[test]
    fn enumerate_g_ab_matches_brute_force() {
        let gr = g(G_AB);
        let e = enumerate_language(&gr, 3, 4);
        assert!(e.complete);
        // derivations of words up to length 3 need at most 3 + 5 steps
        assert_eq!(e.words, brute_force(&gr, 3, 4, 9));
        let rendered: BTreeSet<String> = e.words.iter().map(|w| gr.render(w)).collect();
        let expected: BTreeSet<String> = ["eps", "a", "b", "aa", "ab", "bb", "aaa", "aab", "abb", "bbb"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(rendered, expected);
    }

    #[test]
    fn enumerate_length_zero() {
        let gr = g("start: S\nterminals: a\nrules:\nS -> a\n");
        assert!(enumerate_language(&gr, 0, 0).words.is_empty());
        assert_eq!(enumerate_language(&gr, 1, 0).words.len(), 1);
    }

    #[test]
    fn budget_flags_incomplete() {
        let gr = g(G_AB);
        let e = enumerate_with_budget(&gr, 6, 6, Some(5));
        assert!(!e.complete);
        assert!(e.words.is_subset(&enumerate_language(&gr, 6, 6).words));
    }

    #[test]
    fn derive_g_ab() {
        let gr = g(G_AB);
        let word = gr.parse_word("ab").unwrap();
        let d = derive_word(&gr, &word, SearchLimits::new(20, 8).unwrap()).unwrap();
        assert_eq!(d.steps.len(), 6);
        assert_eq!(d.final_form(&gr).unwrap(), word);
        let ba = gr.parse_word("ba").unwrap();
        assert!(matches!(
            derive_word(&gr, &ba, SearchLimits::new(20, 8).unwrap()),
            Err(Error::NotFoundWithinLimits { .. })
        ));
    }

    #[test]
    fn derive_respects_step_limit() {
        let gr = g(G_AB);
        let word = gr.parse_word("ab").unwrap();
        assert!(derive_word(&gr, &word, SearchLimits::new(5, 8).unwrap()).is_err());
        assert!(derive_word(&gr, &word, SearchLimits::new(6, 8).unwrap()).is_ok());
    }

    #[test]
    fn limits_must_be_positive() {
        assert_eq!(SearchLimits::new(0, 3), Err(Error::InvalidLimits));
    }

    #[test]
    fn equivalence_reflexive_and_witness() {
        let gr = g(G_AB);
        assert_eq!(bounded_equiv(&gr, &gr, 8, 8, None).outcome, Equivalence::Equal(8));
        let without = g("start: S\nterminals: a b\nrules:\nS -> A B\nA -> a A\nB -> B b\nC -> eps\nD -> eps\n");
        let v = bounded_equiv(&gr, &without, 6, 6, None);
        assert_eq!(
            v.outcome,
            Equivalence::Differ { witness: vec![], owner: Side::First }
        );
        assert_eq!(v.second_size, 0);
        let v = bounded_equiv(&without, &gr, 6, 6, None);
        assert_eq!(
            v.outcome,
            Equivalence::Differ { witness: vec![], owner: Side::Second }
        );
    }

    #[test]
    fn equivalence_projection_renames_terminals() {
        let g1 = g("start: S\nterminals: a\nrules:\nS -> a S\nS -> eps\n");
        let g2 = g("start: S\nterminals: x\nrules:\nS -> x S\nS -> eps\n");
        assert!(!bounded_equiv(&g1, &g2, 4, 4, None).is_equal());
        let table = BTreeMap::from([("x".to_string(), "a".to_string())]);
        assert!(bounded_equiv(&g1, &g2, 4, 4, Some(&table)).is_equal());
    }

    #[test]
    fn shape_pruning() {
        let gr = g("start: S\nterminals: a b c\nrules:\nS -> a\n");
        let w = gr.parse_word("abcab").unwrap();
        let a = gr.id_of("a").unwrap();
        let b = gr.id_of("b").unwrap();
        let c = gr.id_of("c").unwrap();
        let s = gr.start();
        assert!(terminal_shape_fits(&gr, &[a, s, b], &w));
        assert!(terminal_shape_fits(&gr, &[a, s, c, s, b], &w));
        assert!(!terminal_shape_fits(&gr, &[b, s], &w));
        assert!(!terminal_shape_fits(&gr, &[a, s, c, c, s], &w));
        assert!(terminal_shape_fits(&gr, &[s], &w));
    }
}
