use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule, RuleForm, SymbolId};
use crate::normal::{rebuild, FreshNames};

#[derive(Debug, Clone, PartialEq)]
pub struct MetalinearForm {
    pub grammar: Grammar,
    pub k: usize,
    /// Right-hand sides of the start rules, the nonterminal strings reached by
    /// branching alone.
    pub start_strings: Vec<Vec<String>>,
}

struct Shape<'g> {
    grammar: &'g Grammar,
    by_lhs: HashMap<SymbolId, Vec<&'g Rule>>,
}

impl<'g> Shape<'g> {
    fn rules(&self, a: SymbolId) -> &[&'g Rule] {
        self.by_lhs.get(&a).map(Vec::as_slice).unwrap_or(&[])
    }

    fn branches(&self, a: SymbolId) -> bool {
        self.rules(a)
            .iter()
            .any(|r| self.grammar.rule_form(r) == RuleForm::Branch)
    }

    fn fail(&self, reason: &str, chain: &[&Rule]) -> Error {
        Error::NotSlowBranchingShape {
            reason: reason.to_string(),
            chain: chain.iter().map(|r| self.grammar.rule_to_string(r)).collect(),
        }
    }

    /// Maximal nonterminal strings `a` reaches by branching rules only.
    fn strings(
        &self,
        a: SymbolId,
        chain: &mut Vec<&'g Rule>,
        active: &mut Vec<SymbolId>,
        memo: &mut HashMap<SymbolId, Vec<Vec<SymbolId>>>,
    ) -> Result<Vec<Vec<SymbolId>>> {
        if let Some(w) = memo.get(&a) {
            return Ok(w.clone());
        }
        if !self.branches(a) {
            return Ok(vec![vec![a]]);
        }
        if active.contains(&a) {
            return Err(self.fail("recursive branching", chain));
        }
        let rules = self.rules(a);
        if let Some(r) = rules.iter().find(|r| self.grammar.rule_form(r) != RuleForm::Branch) {
            chain.push(r);
            return Err(self.fail("nonterminal both branches and emits", chain));
        }
        active.push(a);
        let mut out: Vec<Vec<SymbolId>> = Vec::new();
        for r in rules {
            chain.push(r);
            let left = self.strings(r.rhs[0], chain, active, memo)?;
            let right = self.strings(r.rhs[1], chain, active, memo)?;
            chain.pop();
            for l in &left {
                for rr in &right {
                    let mut w = l.clone();
                    w.extend(rr);
                    if !out.contains(&w) {
                        out.push(w);
                    }
                }
            }
        }
        active.pop();
        memo.insert(a, out.clone());
        Ok(out)
    }

    /// Nonterminals reachable from `roots`, failing if any of them branches.
    fn linear_closure(&self, roots: &BTreeSet<SymbolId>) -> Result<HashSet<SymbolId>> {
        let mut seen: HashSet<SymbolId> = roots.iter().copied().collect();
        let mut via: HashMap<SymbolId, &Rule> = HashMap::new();
        let mut queue: VecDeque<SymbolId> = roots.iter().copied().collect();
        while let Some(a) = queue.pop_front() {
            for r in self.rules(a) {
                if self.grammar.rule_form(r) == RuleForm::Branch {
                    let mut chain = vec![*r];
                    let mut cur = a;
                    while let Some(p) = via.get(&cur) {
                        chain.push(p);
                        cur = p.lhs[0];
                    }
                    chain.reverse();
                    return Err(self.fail("branching below a linear spine", &chain));
                }
                for &s in &r.rhs {
                    if self.grammar.is_nonterminal(s) && seen.insert(s) {
                        via.insert(s, r);
                        queue.push_back(s);
                    }
                }
            }
        }
        Ok(seen)
    }
}

/// Rewrites a context-free grammar whose branching happens only above its
/// linear spines into the shape `S0 -> W`, `A -> x`, `A -> xBy`.
pub fn normalize_metalinear(grammar: &Grammar) -> Result<MetalinearForm> {
    grammar.require_context_free()?;
    let mut by_lhs: HashMap<SymbolId, Vec<&Rule>> = HashMap::new();
    for r in grammar.rules() {
        by_lhs.entry(r.lhs[0]).or_default().push(r);
    }
    let shape = Shape { grammar, by_lhs };
    let strings = shape.strings(grammar.start(), &mut Vec::new(), &mut Vec::new(), &mut HashMap::new())?;
    let roots: BTreeSet<SymbolId> = strings.iter().flatten().copied().collect();
    let live = shape.linear_closure(&roots)?;
    let k = strings.iter().map(Vec::len).max().unwrap_or(0);
    let names: Vec<Vec<String>> = strings.iter().map(|w| grammar.names(w)).collect();

    if strings == [vec![grammar.start()]] {
        return Ok(MetalinearForm {
            grammar: grammar.clone(),
            k,
            start_strings: names,
        });
    }
    let start = FreshNames::new(grammar).fresh(&format!("{}0", grammar.name(grammar.start())));
    let mut rules: Vec<(Vec<String>, Vec<String>)> = names
        .iter()
        .map(|w| (vec![start.clone()], w.clone()))
        .collect();
    rules.extend(
        grammar
            .rules()
            .iter()
            .filter(|r| live.contains(&r.lhs[0]))
            .map(|r| (grammar.names(&r.lhs), grammar.names(&r.rhs))),
    );
    Ok(MetalinearForm {
        grammar: rebuild(grammar, &start, rules),
        k,
        start_strings: names,
    })
}
