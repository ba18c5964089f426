//! Line-oriented `key: value` reports printed by the command-line tool.

use std::fmt::{self, Display};

use crate::analysis::{CertificateReport, PathPair};
use crate::derive::{Equivalence, EquivalenceVerdict, Side};
use crate::grammar::{FormReport, Grammar, RuleId};
use crate::tree::{DerivationTree, Label, NodeId};
use crate::transform::TransformStats;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn extend(&mut self, other: Report) -> &mut Self {
        self.lines.extend(other.lines);
        self
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

pub fn rule_list(rules: &[RuleId]) -> String {
    let ids: Vec<String> = rules.iter().map(|r| r.to_string()).collect();
    format!("[{}]", ids.join(","))
}

pub fn form_report(grammar: &Grammar) -> Report {
    let report: FormReport = grammar.classify();
    let mut r = Report::new();
    r.push("general", report.general)
        .push("linear_core", report.linear_core)
        .push("left_linear_core", report.left_linear_core)
        .push("knf", report.knf)
        .push("propagating", report.propagating)
        .push("context_free", report.context_free)
        .push("linear", report.linear)
        .push(
            "k_linear",
            report.k_linear.map_or("none".to_string(), |k| k.to_string()),
        );
    r.push("pcs", rule_list(&grammar.non_context_free_rules()));
    for (id, form) in &report.forms {
        r.push(format!("rule {id}"), form);
    }
    r
}

fn node_name(grammar: &Grammar, tree: &DerivationTree, n: NodeId) -> String {
    match tree.label(n) {
        Label::Epsilon => "eps".to_string(),
        l => grammar.name(l.symbol().unwrap()).to_string(),
    }
}

pub fn path_string(grammar: &Grammar, tree: &DerivationTree, path: &[NodeId]) -> String {
    path.iter()
        .map(|&n| node_name(grammar, tree, n))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn pair_report(grammar: &Grammar, tree: &DerivationTree, pair: &PathPair) -> Report {
    let mut r = Report::new();
    r.push("left_path", path_string(grammar, tree, &pair.left))
        .push("right_path", path_string(grammar, tree, &pair.right));
    r
}

pub fn certificate_report(grammar: &Grammar, tree: &DerivationTree, c: &CertificateReport) -> Report {
    let mut r = Report::new();
    r.push("theorem", c.theorem)
        .push("u", c.u)
        .push("k", c.k.map_or("any".to_string(), |k| k.to_string()))
        .push("u_observed", c.u_observed)
        .push("degree", c.degree)
        .push("slow_branching_strict", c.slow_branching_strict)
        .push("slow_branching_lenient", c.slow_branching_lenient)
        .push("non_neighbor_violations", c.non_neighbor_violations.len())
        .push("linear_core", c.linear_core)
        .push("left_linear_core", c.left_linear_core)
        .push("propagating", c.propagating);
    if let Some(w) = &c.witness {
        r.push("witness_left", path_string(grammar, tree, &w.left))
            .push("witness_right", path_string(grammar, tree, &w.right));
    }
    r.push("verdict", c.verdict);
    r
}

pub fn equivalence_report(v: &EquivalenceVerdict) -> Report {
    let mut r = Report::new();
    match &v.outcome {
        Equivalence::Equal(n) => {
            r.push("result", format!("Equal({n})"));
        }
        Equivalence::Differ { witness, owner } => {
            let word = if witness.is_empty() { "eps".to_string() } else { witness.join(" ") };
            let owner = match owner {
                Side::First => "first",
                Side::Second => "second",
            };
            r.push("result", "Differ").push("witness", word).push("only_in", owner);
        }
    }
    r.push("complete", v.complete)
        .push("first_words", v.first_size)
        .push("second_words", v.second_size);
    r
}

pub fn stats_report(s: &TransformStats) -> Report {
    let mut r = Report::new();
    r.push("contexts", s.contexts)
        .push("step1_rules", s.step1)
        .push("step2_rules", s.step2)
        .push("step3_rules", s.step3)
        .push("annotated_bound", s.annotated_bound);
    r
}
