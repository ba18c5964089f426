//! Graphviz export of derivation trees.

use std::fmt::Write;

use crate::grammar::Grammar;
use crate::tree::{DerivationTree, Label};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Terminal leaves are squares, ε-leaves small circles. Context dependencies
/// are dashed edges labeled with the rule id that do not affect layout.
pub fn export_dot(grammar: &Grammar, tree: &DerivationTree) -> String {
    let mut out = String::from("digraph tree {\n  ordering=out;\n  node [shape=plain];\n");
    for node in tree.nodes() {
        let attrs = match node.label {
            Label::Nonterminal(s) => format!("label={}", quote(grammar.name(s))),
            Label::Terminal(s) => format!("label={}, shape=square", quote(grammar.name(s))),
            Label::Epsilon => "label=\"ε\", shape=circle, width=0.2, fixedsize=true".to_string(),
        };
        writeln!(out, "  n{} [{attrs}];", node.id).unwrap();
    }
    for node in tree.nodes() {
        for c in &node.children {
            writeln!(out, "  n{} -> n{c};", node.id).unwrap();
        }
    }
    for d in tree.dependencies() {
        writeln!(
            out,
            "  n{} -> n{} [style=dashed, constraint=false, dir=none, label=\"{}\"];",
            d.left, d.right, d.rule
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
