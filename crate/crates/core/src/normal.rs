//! Normal-form rewrites: Kuroda splitting, unit-rule elimination and
//! useless-symbol pruning.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::Result;
use crate::grammar::{Grammar, RawGrammar, RuleForm, SymbolId};

/// Allocates names not yet present in a grammar by appending `'`.
pub(crate) struct FreshNames {
    used: HashSet<String>,
}

impl FreshNames {
    pub(crate) fn new(grammar: &Grammar) -> Self {
        FreshNames {
            used: grammar.symbols().iter().map(|s| s.name.clone()).collect(),
        }
    }

    pub(crate) fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        while self.used.contains(&name) {
            name.push('\'');
        }
        self.used.insert(name.clone());
        name
    }
}

type NamedRule = (Vec<String>, Vec<String>);

pub(crate) fn rebuild(grammar: &Grammar, start: &str, rules: Vec<NamedRule>) -> Grammar {
    RawGrammar::infer(grammar.terminal_names(), start, rules)
        .build()
        .expect("rewrite of a valid grammar stays valid")
}

/// Splits every linear rule `A -> xEy` with more than one right-hand symbol
/// into `A -> BC` chains over fresh nonterminals, with one `T_a -> a`
/// preterminal per terminal. KNF rules pass through unchanged.
pub fn knf_split(grammar: &Grammar) -> Result<Grammar> {
    grammar.require_linear_core()?;
    let mut fresh = FreshNames::new(grammar);
    let mut preterminals: HashMap<SymbolId, String> = HashMap::new();
    let mut preterminal_rules: Vec<NamedRule> = Vec::new();
    let mut rules: Vec<NamedRule> = Vec::new();

    for rule in grammar.rules() {
        if grammar.rule_form(rule).is_knf() {
            rules.push((grammar.names(&rule.lhs), grammar.names(&rule.rhs)));
            continue;
        }
        let lhs = grammar.name(rule.lhs[0]).to_string();
        let items: Vec<String> = rule
            .rhs
            .iter()
            .map(|&s| {
                if grammar.is_nonterminal(s) {
                    return grammar.name(s).to_string();
                }
                preterminals
                    .entry(s)
                    .or_insert_with(|| {
                        let name = fresh.fresh(&format!("T_{}", grammar.name(s)));
                        preterminal_rules.push((vec![name.clone()], vec![grammar.name(s).to_string()]));
                        name
                    })
                    .clone()
            })
            .collect();
        let mut head = lhs.clone();
        for (i, item) in items.iter().enumerate().take(items.len() - 1) {
            if i == items.len() - 2 {
                rules.push((vec![head.clone()], vec![item.clone(), items[i + 1].clone()]));
            } else {
                let next = fresh.fresh(&format!("{lhs}'"));
                rules.push((vec![head.clone()], vec![item.clone(), next.clone()]));
                head = next;
            }
        }
    }
    rules.extend(preterminal_rules);
    Ok(rebuild(grammar, grammar.name(grammar.start()), rules))
}

/// Removes `A -> B` rules by composing each nonterminal with the non-unit
/// rules of everything in its unit closure.
pub fn eliminate_unit_rules(grammar: &Grammar) -> Result<Grammar> {
    grammar.require_context_free()?;
    let is_unit = |r: &crate::grammar::Rule| grammar.rule_form(r) == RuleForm::Unit;
    if !grammar.rules().iter().any(is_unit) {
        return Ok(grammar.clone());
    }
    let mut by_lhs: HashMap<SymbolId, Vec<&crate::grammar::Rule>> = HashMap::new();
    for r in grammar.rules() {
        by_lhs.entry(r.lhs[0]).or_default().push(r);
    }
    let mut seen: HashSet<(SymbolId, Vec<SymbolId>)> = HashSet::new();
    let mut rules: Vec<NamedRule> = Vec::new();
    for a in grammar.nonterminals() {
        let mut closure = vec![a];
        let mut visited: HashSet<SymbolId> = HashSet::from([a]);
        let mut queue = VecDeque::from([a]);
        while let Some(b) = queue.pop_front() {
            for r in by_lhs.get(&b).into_iter().flatten() {
                if is_unit(r) && visited.insert(r.rhs[0]) {
                    closure.push(r.rhs[0]);
                    queue.push_back(r.rhs[0]);
                }
            }
        }
        for b in closure {
            for r in by_lhs.get(&b).into_iter().flatten() {
                if !is_unit(r) && seen.insert((a, r.rhs.clone())) {
                    rules.push((vec![grammar.name(a).to_string()], grammar.names(&r.rhs)));
                }
            }
        }
    }
    Ok(rebuild(grammar, grammar.name(grammar.start()), rules))
}

/// Result of [`prune_useless`]. `empty_language` is set when the start
/// symbol derives no terminal string; the grammar then has no rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruned {
    pub grammar: Grammar,
    pub empty_language: bool,
}

/// Nonterminals that derive at least one terminal string.
pub fn productive(grammar: &Grammar) -> BTreeSet<SymbolId> {
    let mut prod = BTreeSet::new();
    let mut changed = true;
    while changed {
        changed = false;
        for r in grammar.rules() {
            let lhs = r.lhs[0];
            if !prod.contains(&lhs)
                && r.rhs
                    .iter()
                    .all(|&s| grammar.is_terminal(s) || prod.contains(&s))
            {
                prod.insert(lhs);
                changed = true;
            }
        }
    }
    prod
}

/// Drops non-productive and unreachable nonterminals together with every
/// rule mentioning them. Rule order is preserved.
pub fn prune_useless(grammar: &Grammar) -> Result<Pruned> {
    grammar.require_context_free()?;
    let start = grammar.name(grammar.start()).to_string();
    let prod = productive(grammar);
    if !prod.contains(&grammar.start()) {
        return Ok(Pruned {
            grammar: rebuild(grammar, &start, Vec::new()),
            empty_language: true,
        });
    }
    let live = |s: &SymbolId| grammar.is_terminal(*s) || prod.contains(s);
    let kept: Vec<_> = grammar
        .rules()
        .iter()
        .filter(|r| live(&r.lhs[0]) && r.rhs.iter().all(live))
        .collect();
    let mut reach: HashSet<SymbolId> = HashSet::from([grammar.start()]);
    let mut queue = VecDeque::from([grammar.start()]);
    while let Some(a) = queue.pop_front() {
        for r in kept.iter().filter(|r| r.lhs[0] == a) {
            for &s in &r.rhs {
                if grammar.is_nonterminal(s) && reach.insert(s) {
                    queue.push_back(s);
                }
            }
        }
    }
    let rules = kept
        .into_iter()
        .filter(|r| reach.contains(&r.lhs[0]))
        .map(|r| (grammar.names(&r.lhs), grammar.names(&r.rhs)))
        .collect();
    Ok(Pruned {
        grammar: rebuild(grammar, &start, rules),
        empty_language: false,
    })
}
