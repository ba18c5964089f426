//! Compilation of context-bounded general grammars into context-free ones.
//!
//! Nonterminals of the output carry a left and a right context, the rule ids
//! of context dependencies still to be resolved on each side:
//! `A<10|>`, `B<10,12|4>`.

mod metalinear;
mod regular;

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::grammar::{Grammar, RawGrammar, RuleForm, RuleId, SymbolId};
use crate::normal::{eliminate_unit_rules, prune_useless};

pub use metalinear::{normalize_metalinear, MetalinearForm};
pub use regular::normalize_regular;

/// Default ceiling on the number of rules a construction may emit.
pub const DEFAULT_RULE_CAP: u128 = 10_000_000;

/// Sequence of non-context-free rule ids, stored without ε padding.
pub type Context = Vec<RuleId>;

/// All sequences over `pcs` of length `0..=u`, shortest first and
/// lexicographic within a length.
pub fn enumerate_contexts(pcs: &[RuleId], u: usize) -> Vec<Context> {
    let mut alphabet = pcs.to_vec();
    alphabet.sort();
    alphabet.dedup();
    let mut out: Vec<Context> = vec![Vec::new()];
    let mut layer: Vec<Context> = vec![Vec::new()];
    for _ in 0..u {
        if alphabet.is_empty() {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|c| {
                alphabet.iter().map(move |&p| {
                    let mut next = c.clone();
                    next.push(p);
                    next
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn render_context(c: &[RuleId]) -> String {
    c.iter().map(|r| r.0.to_string()).collect::<Vec<_>>().join(",")
}

pub fn annotated_name(base: &str, left: &[RuleId], right: &[RuleId]) -> String {
    format!("{base}<{}|{}>", render_context(left), render_context(right))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransformStats {
    pub contexts: usize,
    pub step1: usize,
    pub step2: usize,
    pub step3: usize,
    /// `|N| * contexts^2`, the number of annotated nonterminals available.
    pub annotated_bound: usize,
}

impl TransformStats {
    pub fn rules(&self) -> usize {
        self.step1 + self.step2 + self.step3
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformOutput {
    pub grammar: Grammar,
    /// Annotated nonterminal name to source nonterminal name.
    pub gamma: BTreeMap<String, String>,
    pub stats: TransformStats,
}

impl TransformOutput {
    /// Replaces every annotated nonterminal by its base; terminals pass.
    pub fn project<S: AsRef<str>>(&self, form: &[S]) -> Result<Vec<String>> {
        gamma_project(self, form)
    }
}

pub fn gamma_project<S: AsRef<str>>(output: &TransformOutput, form: &[S]) -> Result<Vec<String>> {
    form.iter()
        .map(|s| {
            let s = s.as_ref();
            if let Some(base) = output.gamma.get(s) {
                return Ok(base.clone());
            }
            match output.grammar.id_of(s) {
                Some(id) if output.grammar.is_terminal(id) => Ok(s.to_string()),
                _ => Err(Error::UnknownSymbol(s.to_string())),
            }
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Linear,
    LeftLinear,
}

/// Builds the context-annotated grammar for a linear core grammar.
///
/// Rules `A -> xEy` keep contexts only on sides where `E` stays adjacent to
/// its neighbor: a non-empty `x` forces an empty left context and a
/// non-empty `y` an empty right one.
pub fn build_metalinear(grammar: &Grammar, u: usize) -> Result<TransformOutput> {
    build_metalinear_with_cap(grammar, u, DEFAULT_RULE_CAP)
}

pub fn build_metalinear_with_cap(grammar: &Grammar, u: usize, cap: u128) -> Result<TransformOutput> {
    grammar.require_linear_core()?;
    build(grammar, u, cap, Shape::Linear)
}

/// The same construction for left linear core grammars (`A -> xE`).
pub fn build_regular(grammar: &Grammar, u: usize) -> Result<TransformOutput> {
    build_regular_with_cap(grammar, u, DEFAULT_RULE_CAP)
}

pub fn build_regular_with_cap(grammar: &Grammar, u: usize, cap: u128) -> Result<TransformOutput> {
    grammar.require_left_linear_core()?;
    build(grammar, u, cap, Shape::LeftLinear)
}

/// Upper bound on the number of rules the construction emits.
pub fn projected_rules(grammar: &Grammar, u: usize) -> u128 {
    let pcs = grammar.non_context_free_rules().len() as u128;
    let count = |n: usize| (0..=n as u32).map(|i| pcs.pow(i)).sum::<u128>();
    let c = if pcs == 0 { 1 } else { count(u) };
    let shorter = if u == 0 { 0 } else if pcs == 0 { 1 } else { count(u - 1) };
    grammar
        .rules()
        .iter()
        .map(|r| match grammar.rule_form(r) {
            RuleForm::Branch => c * c * c,
            RuleForm::Swap => 2 * c * shorter,
            RuleForm::Erasing | RuleForm::Terminal => 1,
            _ => c * c,
        })
        .sum()
}

fn build(grammar: &Grammar, u: usize, cap: u128, shape: Shape) -> Result<TransformOutput> {
    let projected = projected_rules(grammar, u);
    if projected > cap {
        return Err(Error::UOverflow { projected, cap });
    }
    let pcs = grammar.non_context_free_rules();
    let contexts = enumerate_contexts(&pcs, u);
    let shorter: Vec<&Context> = contexts.iter().filter(|c| c.len() + 1 <= u).collect();
    let name = |s: SymbolId| grammar.name(s).to_string();
    let ann = |s: SymbolId, l: &[RuleId], r: &[RuleId]| annotated_name(grammar.name(s), l, r);

    let mut stats = TransformStats {
        contexts: contexts.len(),
        annotated_bound: grammar.nonterminals().count() * contexts.len() * contexts.len(),
        ..TransformStats::default()
    };
    let mut gamma: BTreeMap<String, String> = BTreeMap::new();
    let mut rules: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    let mut seen: HashSet<(Vec<String>, Vec<String>)> = HashSet::new();
    let mut emit = |lhs: String, rhs: Vec<String>, counter: &mut usize| {
        let rule = (vec![lhs], rhs);
        if seen.insert(rule.clone()) {
            rules.push(rule);
            *counter += 1;
        }
    };

    // (I)
    for rule in grammar.rules() {
        let Some(parts) = grammar.linear_parts(rule) else { continue };
        let a = rule.lhs[0];
        match parts.middle {
            None => {
                let rhs = grammar.names(&parts.prefix);
                emit(ann(a, &[], &[]), rhs, &mut stats.step1);
            }
            Some(e) => {
                debug_assert!(shape == Shape::Linear || parts.suffix.is_empty());
                for l in &contexts {
                    if !parts.prefix.is_empty() && !l.is_empty() {
                        continue;
                    }
                    for r in &contexts {
                        if !parts.suffix.is_empty() && !r.is_empty() {
                            continue;
                        }
                        let mut rhs = grammar.names(&parts.prefix);
                        rhs.push(ann(e, l, r));
                        rhs.extend(grammar.names(&parts.suffix));
                        emit(ann(a, l, r), rhs, &mut stats.step1);
                    }
                }
            }
        }
    }
    // (II)
    for rule in grammar.rules() {
        if grammar.rule_form(rule) != RuleForm::Branch {
            continue;
        }
        let (a, b, c) = (rule.lhs[0], rule.rhs[0], rule.rhs[1]);
        for l in &contexts {
            for x in &contexts {
                for r in &contexts {
                    let rhs = vec![ann(b, l, x), ann(c, x, r)];
                    emit(ann(a, l, r), rhs, &mut stats.step2);
                }
            }
        }
    }
    // (III)
    for rule in grammar.rules() {
        if grammar.rule_form(rule) != RuleForm::Swap {
            continue;
        }
        let (a, b, c, d) = (rule.lhs[0], rule.lhs[1], rule.rhs[0], rule.rhs[1]);
        for x in &contexts {
            for &y in &shorter {
                let mut py = vec![rule.id];
                py.extend(y.iter().copied());
                emit(ann(a, x, &py), vec![ann(c, x, y)], &mut stats.step3);
            }
        }
        for &y in &shorter {
            let mut py = vec![rule.id];
            py.extend(y.iter().copied());
            for z in &contexts {
                emit(ann(b, &py, z), vec![ann(d, y, z)], &mut stats.step3);
            }
        }
    }

    // every annotated name maps back to its base
    for a in grammar.nonterminals() {
        for l in &contexts {
            for r in &contexts {
                gamma.insert(ann(a, l, r), name(a));
            }
        }
    }
    let start = ann(grammar.start(), &[], &[]);
    let out = RawGrammar::infer(grammar.terminal_names(), &start, rules).build()?;
    gamma.retain(|k, _| out.id_of(k).is_some_and(|id| out.is_nonterminal(id)));
    Ok(TransformOutput {
        grammar: out,
        gamma,
        stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Metalinear,
    Regular,
}

/// Every intermediate grammar of a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub built: TransformOutput,
    pub unit_free: Grammar,
    pub pruned: Grammar,
    pub empty_language: bool,
    pub normalized: Grammar,
    /// `k` of the k-linear result; `None` in regular mode.
    pub k: Option<usize>,
    /// Nonterminal strings of the start rules in metalinear mode.
    pub start_strings: Vec<Vec<String>>,
}

impl PipelineRun {
    pub fn stages(&self) -> [(&'static str, &Grammar); 4] {
        [
            ("built", &self.built.grammar),
            ("unit_free", &self.unit_free),
            ("pruned", &self.pruned),
            ("normalized", &self.normalized),
        ]
    }
}

/// Reports self-embedding in terms of the source grammar's nonterminals.
fn project_error(e: Error, gamma: &BTreeMap<String, String>) -> Error {
    let base = |s: String| gamma.get(&s).cloned().unwrap_or(s);
    match e {
        Error::SelfEmbedding { witness, left, right } => Error::SelfEmbedding {
            witness: base(witness),
            left: left.into_iter().map(base).collect(),
            right: right.into_iter().map(base).collect(),
        },
        other => other,
    }
}

/// build, unit elimination, pruning, then the normalization for `mode`.
pub fn run_pipeline(grammar: &Grammar, u: usize, mode: Mode) -> Result<PipelineRun> {
    let built = match mode {
        Mode::Metalinear => build_metalinear(grammar, u)?,
        Mode::Regular => build_regular(grammar, u)?,
    };
    let unit_free = eliminate_unit_rules(&built.grammar)?;
    let pruned = prune_useless(&unit_free)?;
    let (normalized, k, start_strings) = match mode {
        Mode::Metalinear => {
            let m = normalize_metalinear(&pruned.grammar)?;
            (m.grammar, Some(m.k), m.start_strings)
        }
        Mode::Regular => {
            let g = normalize_regular(&pruned.grammar).map_err(|e| project_error(e, &built.gamma))?;
            (g, None, Vec::new())
        }
    };
    Ok(PipelineRun {
        built,
        unit_free,
        empty_language: pruned.empty_language,
        pruned: pruned.grammar,
        normalized,
        k,
        start_strings,
    })
}
