//! Grammar representation, validation and rule-form classification.
//!
//! A [`Grammar`] is a quadruple of terminals, nonterminals, an ordered rule
//! list and a start symbol. Symbols are interned into a per-grammar table and
//! referred to by [`SymbolId`]; rules are numbered `1..=n` in declaration
//! order so that transcribed grammars keep their published numbering.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Token reserved for the empty string in grammar files.
pub const EPS: &str = "eps";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub usize);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: RuleId,
    pub lhs: Vec<SymbolId>,
    pub rhs: Vec<SymbolId>,
}

impl Rule {
    pub fn is_context_free(&self) -> bool {
        self.lhs.len() == 1
    }
}

/// A rule written with symbol names, before interning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    pub id: usize,
    pub lhs: Vec<String>,
    pub rhs: Vec<String>,
}

impl RuleSpec {
    pub fn new<S: AsRef<str>>(id: usize, lhs: &[S], rhs: &[S]) -> Self {
        RuleSpec {
            id,
            lhs: lhs.iter().map(|s| s.as_ref().to_string()).collect(),
            rhs: rhs.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }
}

/// Unvalidated grammar description. [`RawGrammar::build`] validates and
/// interns it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGrammar {
    pub terminals: Vec<String>,
    pub nonterminals: Vec<String>,
    pub start: String,
    pub rules: Vec<RuleSpec>,
}

pub fn valid_symbol_name(name: &str) -> bool {
    !name.is_empty()
        && name != EPS
        && name != "->"
        && !name.starts_with('#')
        && !name.chars().any(char::is_whitespace)
}

impl RawGrammar {
    /// Builds a raw grammar whose nonterminals are the start symbol followed by
    /// every non-terminal name in rule order, with rule ids `1..=n`.
    pub fn infer(terminals: Vec<String>, start: &str, rules: Vec<(Vec<String>, Vec<String>)>) -> Self {
        let term: HashSet<&str> = terminals.iter().map(String::as_str).collect();
        let mut seen = HashSet::new();
        let mut nonterminals = Vec::new();
        let mut push = |name: &str| {
            if !term.contains(name) && seen.insert(name.to_string()) {
                nonterminals.push(name.to_string());
            }
        };
        push(start);
        for (lhs, rhs) in &rules {
            lhs.iter().chain(rhs).for_each(|s| push(s));
        }
        let rules = rules
            .into_iter()
            .enumerate()
            .map(|(i, (lhs, rhs))| RuleSpec { id: i + 1, lhs, rhs })
            .collect();
        RawGrammar {
            terminals,
            nonterminals,
            start: start.to_string(),
            rules,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<Grammar> {
        let mut symbols = Vec::new();
        let mut index = HashMap::new();
        for (names, kind) in [
            (&self.terminals, SymbolKind::Terminal),
            (&self.nonterminals, SymbolKind::Nonterminal),
        ] {
            for name in names {
                if !valid_symbol_name(name) {
                    return Err(Error::InvalidSymbolName(name.clone()));
                }
                if let Some(&id) = index.get(name.as_str()) {
                    let prev: &Symbol = &symbols[SymbolId::index(id)];
                    if prev.kind != kind {
                        return Err(Error::SymbolBothKinds(name.clone()));
                    }
                    continue;
                }
                index.insert(name.clone(), SymbolId(symbols.len() as u32));
                symbols.push(Symbol {
                    name: name.clone(),
                    kind,
                });
            }
        }
        let start = match index.get(self.start.as_str()) {
            Some(&id) if symbols[id.index()].kind == SymbolKind::Nonterminal => id,
            Some(_) => return Err(Error::StartNotNonterminal(self.start.clone())),
            None if !valid_symbol_name(&self.start) => {
                return Err(Error::InvalidSymbolName(self.start.clone()))
            }
            None => return Err(Error::StartNotNonterminal(self.start.clone())),
        };
        let mut rules = Vec::with_capacity(self.rules.len());
        for (i, spec) in self.rules.iter().enumerate() {
            if spec.id != i + 1 {
                return Err(Error::DuplicateRuleId(spec.id));
            }
            let id = RuleId(spec.id);
            if spec.lhs.is_empty() {
                return Err(Error::EmptyLhs(id));
            }
            let resolve = |names: &[String]| -> Result<Vec<SymbolId>> {
                names
                    .iter()
                    .map(|n| {
                        index
                            .get(n.as_str())
                            .copied()
                            .ok_or_else(|| Error::UnknownSymbol(n.clone()))
                    })
                    .collect()
            };
            let lhs = resolve(&spec.lhs)?;
            let rhs = resolve(&spec.rhs)?;
            if lhs
                .iter()
                .all(|s| symbols[s.index()].kind == SymbolKind::Terminal)
            {
                return Err(Error::LhsAllTerminal(id));
            }
            rules.push(Rule { id, lhs, rhs });
        }
        Ok(Grammar {
            symbols,
            index,
            rules,
            start,
        })
    }
}

/// A validated general grammar. Immutable once built.
#[derive(Debug, Clone)]
pub struct Grammar {
    symbols: Vec<Symbol>,
    index: HashMap<String, SymbolId>,
    rules: Vec<Rule>,
    start: SymbolId,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols && self.rules == other.rules && self.start == other.start
    }
}

impl Eq for Grammar {}

impl Grammar {
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn rule(&self, id: RuleId) -> Result<&Rule> {
        id.0.checked_sub(1)
            .and_then(|i| self.rules.get(i))
            .ok_or(Error::UnknownRule(id.0))
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()].name
    }

    pub fn id_of(&self, name: &str) -> Option<SymbolId> {
        self.index.get(name).copied()
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.symbols[id.index()].kind
    }

    pub fn is_terminal(&self, id: SymbolId) -> bool {
        self.kind(id) == SymbolKind::Terminal
    }

    pub fn is_nonterminal(&self, id: SymbolId) -> bool {
        self.kind(id) == SymbolKind::Nonterminal
    }

    pub fn terminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.ids().filter(|&s| self.is_terminal(s))
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.ids().filter(|&s| self.is_nonterminal(s))
    }

    fn ids(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.symbols.len() as u32).map(SymbolId)
    }

    pub fn terminal_names(&self) -> Vec<String> {
        self.terminals().map(|s| self.name(s).to_string()).collect()
    }

    pub fn nonterminal_names(&self) -> Vec<String> {
        self.nonterminals().map(|s| self.name(s).to_string()).collect()
    }

    pub fn names(&self, form: &[SymbolId]) -> Vec<String> {
        form.iter().map(|&s| self.name(s).to_string()).collect()
    }

    /// Renders a form. Symbols are concatenated when every terminal name is a
    /// single character and the form is terminal, otherwise space-separated.
    /// The empty form renders as `eps`.
    pub fn render(&self, form: &[SymbolId]) -> String {
        if form.is_empty() {
            return EPS.to_string();
        }
        let compact = form.iter().all(|&s| self.is_terminal(s))
            && self.terminals().all(|t| self.name(t).chars().count() == 1);
        let names = self.names(form);
        if compact {
            names.concat()
        } else {
            names.join(" ")
        }
    }

    /// Splits a word into terminal symbols. Whitespace-separated input is
    /// taken literally; otherwise the word is tokenized by longest match
    /// against the terminal alphabet. `eps` or the empty string is ε.
    pub fn parse_word(&self, word: &str) -> Result<Vec<SymbolId>> {
        let word = word.trim();
        if word.is_empty() || word == EPS {
            return Ok(Vec::new());
        }
        let lookup = |tok: &str| {
            self.id_of(tok)
                .filter(|&s| self.is_terminal(s))
                .ok_or_else(|| Error::BadWord(word.to_string()))
        };
        if word.contains(char::is_whitespace) {
            return word.split_whitespace().map(lookup).collect();
        }
        let mut terms: Vec<(&str, SymbolId)> =
            self.terminals().map(|t| (self.name(t), t)).collect();
        terms.sort_by_key(|(n, _)| std::cmp::Reverse(n.len()));
        let mut out = Vec::new();
        let mut rest = word;
        while !rest.is_empty() {
            let (name, id) = terms
                .iter()
                .find(|(n, _)| rest.starts_with(n))
                .ok_or_else(|| Error::BadWord(word.to_string()))?;
            out.push(*id);
            rest = &rest[name.len()..];
        }
        Ok(out)
    }

    /// Converts back to the name-level description.
    pub fn to_raw(&self) -> RawGrammar {
        RawGrammar {
            terminals: self.terminal_names(),
            nonterminals: self.nonterminal_names(),
            start: self.name(self.start).to_string(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleSpec {
                    id: r.id.0,
                    lhs: self.names(&r.lhs),
                    rhs: self.names(&r.rhs),
                })
                .collect(),
        }
    }

    /// Stable structural hash, used to tie derivation trees to their grammar.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.symbols.hash(&mut h);
        self.rules.hash(&mut h);
        self.start.hash(&mut h);
        h.finish()
    }

    pub fn rule_to_string(&self, rule: &Rule) -> String {
        let rhs = if rule.rhs.is_empty() {
            EPS.to_string()
        } else {
            self.names(&rule.rhs).join(" ")
        };
        format!("{} -> {}", self.names(&rule.lhs).join(" "), rhs)
    }

    /// Nonterminals occurring in rules or as the start symbol, in table order.
    pub fn used_nonterminals(&self) -> BTreeSet<SymbolId> {
        let mut used: BTreeSet<SymbolId> = self
            .rules
            .iter()
            .flat_map(|r| r.lhs.iter().chain(&r.rhs))
            .copied()
            .filter(|&s| self.is_nonterminal(s))
            .collect();
        used.insert(self.start);
        used
    }

    /// True when no rule mentions a terminal on its left-hand side, so
    /// terminals in a sentential form are never rewritten.
    pub fn terminals_inert(&self) -> bool {
        self.rules
            .iter()
            .all(|r| r.lhs.iter().all(|&s| self.is_nonterminal(s)))
    }
}

/// Shape of a single rule, most specific first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleForm {
    /// `A -> ε`
    Erasing,
    /// `A -> a`
    Terminal,
    /// `A -> B`
    Unit,
    /// `A -> BC`
    Branch,
    /// `AB -> CD`
    Swap,
    /// `A -> xE`, x terminal, E nonterminal or ε
    LeftLinear,
    /// `A -> xEy`
    Linear,
    Other,
}

impl RuleForm {
    pub fn label(self) -> &'static str {
        match self {
            RuleForm::Erasing => "A->eps",
            RuleForm::Terminal => "A->a",
            RuleForm::Unit => "A->B",
            RuleForm::Branch => "A->BC",
            RuleForm::Swap => "AB->CD",
            RuleForm::LeftLinear => "A->xE",
            RuleForm::Linear => "A->xEy",
            RuleForm::Other => "other",
        }
    }

    pub fn is_linear_core(self) -> bool {
        self != RuleForm::Other
    }

    pub fn is_left_linear_core(self) -> bool {
        !matches!(self, RuleForm::Other | RuleForm::Linear)
    }

    pub fn is_knf(self) -> bool {
        matches!(
            self,
            RuleForm::Erasing
                | RuleForm::Terminal
                | RuleForm::Unit
                | RuleForm::Branch
                | RuleForm::Swap
        )
    }

    /// Context-free with at most one nonterminal on the right.
    pub fn is_linear(self) -> bool {
        matches!(
            self,
            RuleForm::Erasing
                | RuleForm::Terminal
                | RuleForm::Unit
                | RuleForm::LeftLinear
                | RuleForm::Linear
        )
    }
}

impl fmt::Display for RuleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Decomposition of a linear rule `A -> xEy`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearParts {
    pub prefix: Vec<SymbolId>,
    pub middle: Option<SymbolId>,
    pub suffix: Vec<SymbolId>,
}

impl Grammar {
    pub fn rule_form(&self, rule: &Rule) -> RuleForm {
        let nt = |s: &SymbolId| self.is_nonterminal(*s);
        match (rule.lhs.as_slice(), rule.rhs.as_slice()) {
            ([a], rhs) if nt(a) => match rhs {
                [] => RuleForm::Erasing,
                [b] if !nt(b) => RuleForm::Terminal,
                [_] => RuleForm::Unit,
                [b, c] if nt(b) && nt(c) => RuleForm::Branch,
                _ => match self.linear_parts(rule) {
                    Some(p) if p.suffix.is_empty() => RuleForm::LeftLinear,
                    Some(_) => RuleForm::Linear,
                    None => RuleForm::Other,
                },
            },
            ([a, b], [c, d]) if [a, b, c, d].into_iter().all(nt) => RuleForm::Swap,
            _ => RuleForm::Other,
        }
    }

    /// Splits a context-free rule with at most one right-hand nonterminal.
    pub fn linear_parts(&self, rule: &Rule) -> Option<LinearParts> {
        if !rule.is_context_free() {
            return None;
        }
        let mut nts = rule
            .rhs
            .iter()
            .enumerate()
            .filter(|(_, &s)| self.is_nonterminal(s));
        match (nts.next(), nts.next()) {
            (None, _) => Some(LinearParts {
                prefix: rule.rhs.clone(),
                middle: None,
                suffix: Vec::new(),
            }),
            (Some((i, &e)), None) => Some(LinearParts {
                prefix: rule.rhs[..i].to_vec(),
                middle: Some(e),
                suffix: rule.rhs[i + 1..].to_vec(),
            }),
            _ => None,
        }
    }

    pub fn classify(&self) -> FormReport {
        let forms: Vec<(RuleId, RuleForm)> =
            self.rules.iter().map(|r| (r.id, self.rule_form(r))).collect();
        let all = |f: fn(RuleForm) -> bool| forms.iter().all(|&(_, form)| f(form));
        let context_free = self.rules.iter().all(Rule::is_context_free);
        let linear = context_free && all(RuleForm::is_linear);
        FormReport {
            general: true,
            linear_core: all(RuleForm::is_linear_core),
            left_linear_core: all(RuleForm::is_left_linear_core),
            knf: all(RuleForm::is_knf),
            propagating: self.rules.iter().all(|r| r.lhs.len() <= r.rhs.len()),
            context_free,
            linear,
            k_linear: if context_free { self.k_linear_shape() } else { None },
            forms,
        }
    }

    /// Syntactic k-linear shape: every rule is linear except start rules
    /// `S -> W` with W a string of non-start nonterminals; S may then not
    /// occur on any right-hand side. k is the longest such W (1 for a linear
    /// grammar).
    fn k_linear_shape(&self) -> Option<usize> {
        let mut k = 1;
        let mut has_start_rule = false;
        for rule in &self.rules {
            if self.rule_form(rule).is_linear() {
                continue;
            }
            let all_nt = rule
                .rhs
                .iter()
                .all(|&s| self.is_nonterminal(s) && s != self.start);
            if rule.lhs[0] != self.start || !all_nt {
                return None;
            }
            has_start_rule = true;
            k = k.max(rule.rhs.len());
        }
        if has_start_rule && self.rules.iter().any(|r| r.rhs.contains(&self.start)) {
            return None;
        }
        Some(k)
    }

    /// Ids of rules whose left-hand side has more than one symbol.
    pub fn non_context_free_rules(&self) -> Vec<RuleId> {
        self.rules
            .iter()
            .filter(|r| !r.is_context_free())
            .map(|r| r.id)
            .collect()
    }

    pub fn require_linear_core(&self) -> Result<()> {
        match self.rules.iter().find(|r| !self.rule_form(r).is_linear_core()) {
            Some(r) => Err(Error::NotLinearCore(r.id)),
            None => Ok(()),
        }
    }

    pub fn require_left_linear_core(&self) -> Result<()> {
        match self
            .rules
            .iter()
            .find(|r| !self.rule_form(r).is_left_linear_core())
        {
            Some(r) => Err(Error::NotLeftLinearCore(r.id)),
            None => Ok(()),
        }
    }

    pub fn require_context_free(&self) -> Result<()> {
        match self.rules.iter().find(|r| !r.is_context_free()) {
            Some(r) => Err(Error::NotContextFree(r.id)),
            None => Ok(()),
        }
    }
}

/// Grammar-level form flags plus per-rule tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormReport {
    pub general: bool,
    pub linear_core: bool,
    pub left_linear_core: bool,
    pub knf: bool,
    pub propagating: bool,
    pub context_free: bool,
    pub linear: bool,
    pub k_linear: Option<usize>,
    pub forms: Vec<(RuleId, RuleForm)>,
}
