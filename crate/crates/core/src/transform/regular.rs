use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::grammar::{Grammar, SymbolId};
use crate::normal::{eliminate_unit_rules, prune_useless, rebuild, FreshNames};

type Rhs = Vec<SymbolId>;

struct Nfa {
    states: usize,
    edges: Vec<(usize, Option<SymbolId>, usize)>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    fn link(&mut self, from: usize, label: Option<SymbolId>, to: usize) {
        self.edges.push((from, label, to));
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Growth {
    /// Recursion only at the right end of rules.
    Right,
    /// Recursion only at the left end of rules.
    Left,
}

struct Compiler<'g> {
    grammar: &'g Grammar,
    rules: HashMap<SymbolId, Vec<Rhs>>,
    component: HashMap<SymbolId, BTreeSet<SymbolId>>,
    growth: HashMap<SymbolId, Growth>,
}

impl Compiler<'_> {
    fn chain(&self, nfa: &mut Nfa, mut cur: usize, symbols: &[SymbolId]) -> usize {
        for &x in symbols {
            let (s, e) = self.fragment(nfa, x);
            nfa.link(cur, None, s);
            cur = e;
        }
        cur
    }

    /// Entry and exit states of a fresh automaton copy for `x`.
    fn fragment(&self, nfa: &mut Nfa, x: SymbolId) -> (usize, usize) {
        if self.grammar.is_terminal(x) {
            let (s, e) = (nfa.state(), nfa.state());
            nfa.link(s, Some(x), e);
            return (s, e);
        }
        let scc = &self.component[&x];
        let rules = |b: &SymbolId| self.rules.get(b).into_iter().flatten();
        match self.growth[&x] {
            Growth::Right => {
                let entry: HashMap<SymbolId, usize> = scc.iter().map(|&b| (b, nfa.state())).collect();
                let exit = nfa.state();
                for b in scc {
                    for rhs in rules(b) {
                        let (body, tail) = match rhs.last() {
                            Some(c) if scc.contains(c) => (&rhs[..rhs.len() - 1], Some(entry[c])),
                            _ => (&rhs[..], None),
                        };
                        let end = self.chain(nfa, entry[b], body);
                        nfa.link(end, None, tail.unwrap_or(exit));
                    }
                }
                (entry[&x], exit)
            }
            Growth::Left => {
                let start = nfa.state();
                let done: HashMap<SymbolId, usize> = scc.iter().map(|&b| (b, nfa.state())).collect();
                for b in scc {
                    for rhs in rules(b) {
                        let (head, body) = match rhs.first() {
                            Some(c) if scc.contains(c) => (done[c], &rhs[1..]),
                            _ => (start, &rhs[..]),
                        };
                        let end = self.chain(nfa, head, body);
                        nfa.link(end, None, done[b]);
                    }
                }
                (start, done[&x])
            }
        }
    }
}

/// Nonterminals deriving some non-empty word.
fn non_empty(grammar: &Grammar) -> HashSet<SymbolId> {
    let mut ne = HashSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for r in grammar.rules() {
            if !ne.contains(&r.lhs[0]) && r.rhs.iter().any(|s| grammar.is_terminal(*s) || ne.contains(s)) {
                ne.insert(r.lhs[0]);
                changed = true;
            }
        }
    }
    ne
}

fn reach(rules: &HashMap<SymbolId, Vec<Rhs>>, from: SymbolId) -> HashSet<SymbolId> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([from]);
    while let Some(a) = queue.pop_front() {
        for rhs in rules.get(&a).into_iter().flatten() {
            for &s in rhs {
                if rules.contains_key(&s) && seen.insert(s) {
                    queue.push_back(s);
                }
            }
        }
    }
    seen
}

/// Shortest `w =>* left w right` inside one component, with both sides
/// non-empty.
fn embedding_witness(
    grammar: &Grammar,
    rules: &HashMap<SymbolId, Vec<Rhs>>,
    scc: &BTreeSet<SymbolId>,
    w: SymbolId,
) -> Error {
    type State = (SymbolId, bool, bool);
    let mut prev: HashMap<State, (State, Vec<SymbolId>, Vec<SymbolId>)> = HashMap::new();
    let first = (w, false, false);
    let mut queue = VecDeque::from([first]);
    let mut seen = HashSet::from([first]);
    while let Some(state @ (a, l, r)) = queue.pop_front() {
        for rhs in rules.get(&a).into_iter().flatten() {
            for (i, c) in rhs.iter().enumerate() {
                if !scc.contains(c) {
                    continue;
                }
                let next = (*c, l || i > 0, r || i + 1 < rhs.len());
                if !seen.insert(next) {
                    continue;
                }
                prev.insert(next, (state, rhs[..i].to_vec(), rhs[i + 1..].to_vec()));
                if next == (w, true, true) {
                    let (mut left, mut right) = (Vec::new(), Vec::new());
                    let mut cur = next;
                    while let Some((p, pl, pr)) = prev.get(&cur) {
                        left.splice(0..0, pl.iter().copied());
                        right.extend(pr);
                        cur = *p;
                    }
                    return Error::SelfEmbedding {
                        witness: grammar.name(w).to_string(),
                        left: grammar.names(&left),
                        right: grammar.names(&right),
                    };
                }
                queue.push_back(next);
            }
        }
    }
    unreachable!("component mixes left and right recursion")
}

/// Converts a non-self-embedding context-free grammar into an equivalent
/// right-linear one (`A -> a B`, `A -> eps`).
pub fn normalize_regular(grammar: &Grammar) -> Result<Grammar> {
    grammar.require_context_free()?;
    let pruned = prune_useless(grammar)?;
    let g = &pruned.grammar;
    if pruned.empty_language {
        return Ok(g.clone());
    }
    // symbols deriving only ε are dropped from every right-hand side
    let ne = non_empty(g);
    if !ne.contains(&g.start()) {
        let start = g.name(g.start());
        return Ok(rebuild(g, start, vec![(vec![start.to_string()], vec![])]));
    }
    let mut rules: HashMap<SymbolId, Vec<Rhs>> = HashMap::new();
    for r in g.rules() {
        if ne.contains(&r.lhs[0]) {
            let rhs: Rhs = r.rhs.iter().copied().filter(|s| g.is_terminal(*s) || ne.contains(s)).collect();
            rules.entry(r.lhs[0]).or_default().push(rhs);
        }
    }
    let reachable: HashMap<SymbolId, HashSet<SymbolId>> =
        rules.keys().map(|&a| (a, reach(&rules, a))).collect();
    let mut compiler = Compiler {
        grammar: g,
        rules: HashMap::new(),
        component: HashMap::new(),
        growth: HashMap::new(),
    };
    for a in g.nonterminals().filter(|a| ne.contains(a)) {
        if compiler.component.contains_key(&a) {
            continue;
        }
        let scc: BTreeSet<SymbolId> = std::iter::once(a)
            .chain(reachable[&a].iter().copied().filter(|b| reachable[b].contains(&a)))
            .collect();
        let (mut left, mut right) = (false, false);
        for b in &scc {
            for rhs in &rules[b] {
                for (i, c) in rhs.iter().enumerate() {
                    if scc.contains(c) {
                        left |= i > 0;
                        right |= i + 1 < rhs.len();
                    }
                }
            }
        }
        if left && right {
            return Err(embedding_witness(g, &rules, &scc, a));
        }
        let growth = if right { Growth::Left } else { Growth::Right };
        for &b in &scc {
            compiler.component.insert(b, scc.clone());
            compiler.growth.insert(b, growth);
        }
    }
    compiler.rules = rules;

    let mut nfa = Nfa {
        states: 0,
        edges: Vec::new(),
    };
    let (entry, exit) = compiler.fragment(&mut nfa, g.start());
    let mut fresh = FreshNames::new(g);
    let names: Vec<String> = (0..nfa.states).map(|i| fresh.fresh(&format!("Q{i}"))).collect();
    let mut out: Vec<(Vec<String>, Vec<String>)> = nfa
        .edges
        .iter()
        .map(|&(from, label, to)| {
            let mut rhs: Vec<String> = label.map(|t| g.name(t).to_string()).into_iter().collect();
            rhs.push(names[to].clone());
            (vec![names[from].clone()], rhs)
        })
        .collect();
    out.push((vec![names[exit].clone()], vec![]));
    let linear = rebuild(g, &names[entry], out);
    Ok(prune_useless(&eliminate_unit_rules(&linear)?)?.grammar)
}
