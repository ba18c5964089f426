//! Text formats: grammar files and projection tables.
//!
//! ```text
//! # comment
//! start: S
//! terminals: a b
//! nonterminals: S A B      (optional)
//! rules:
//! S -> A B
//! A B -> C D
//! C -> eps
//! ```

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::grammar::{Grammar, RawGrammar, RuleSpec, EPS};

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// 1-based column of `tok` inside `line`, assuming `tok` is a sub-slice.
fn column_of(line: &str, tok: &str) -> usize {
    (tok.as_ptr() as usize).saturating_sub(line.as_ptr() as usize) + 1
}

pub fn parse_grammar(text: &str) -> Result<Grammar> {
    parse_raw(text)?.build()
}

pub fn parse_raw(text: &str) -> Result<RawGrammar> {
    let mut start: Option<String> = None;
    let mut terminals: Option<Vec<String>> = None;
    let mut declared: Option<Vec<String>> = None;
    let mut in_rules = false;
    let mut rules: Vec<(usize, Vec<String>, Vec<String>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_rules {
            let Some((key, value)) = line.split_once(':') else {
                return Err(syntax(lineno, column_of(raw, line), "expected `key: value` header"));
            };
            let words: Vec<String> = value.split_whitespace().map(str::to_string).collect();
            match key.trim() {
                "start" => match words.as_slice() {
                    [s] => start = Some(s.clone()),
                    _ => {
                        return Err(syntax(lineno, column_of(raw, value), "expected one start symbol"))
                    }
                },
                "terminals" => terminals = Some(words),
                "nonterminals" => declared = Some(words),
                "rules" if words.is_empty() => in_rules = true,
                other => {
                    return Err(syntax(
                        lineno,
                        column_of(raw, line),
                        format!("unknown header `{other}`"),
                    ))
                }
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let arrows: Vec<usize> = toks
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == "->")
            .map(|(i, _)| i)
            .collect();
        let arrow = match arrows.as_slice() {
            [a] => *a,
            [] => return Err(syntax(lineno, column_of(raw, line), "expected `->`")),
            [_, second, ..] => {
                return Err(syntax(lineno, column_of(raw, toks[*second]), "more than one `->`"))
            }
        };
        let (lhs, rhs) = (&toks[..arrow], &toks[arrow + 1..]);
        if lhs.is_empty() {
            return Err(syntax(lineno, column_of(raw, toks[arrow]), "empty left-hand side"));
        }
        if rhs.is_empty() {
            return Err(syntax(
                lineno,
                column_of(raw, toks[arrow]) + 2,
                "empty right-hand side (write `eps`)",
            ));
        }
        if lhs.contains(&EPS) || (rhs.len() > 1 && rhs.contains(&EPS)) {
            return Err(Error::EpsMisuse(lineno));
        }
        let rhs: Vec<String> = if rhs == [EPS] {
            Vec::new()
        } else {
            rhs.iter().map(|s| s.to_string()).collect()
        };
        rules.push((lineno, lhs.iter().map(|s| s.to_string()).collect(), rhs));
    }

    let start = start.ok_or_else(|| syntax(1, 1, "missing `start:` header"))?;
    let terminals = terminals.unwrap_or_default();
    let inferred = RawGrammar::infer(
        terminals.clone(),
        &start,
        rules.iter().map(|(_, l, r)| (l.clone(), r.clone())).collect(),
    );
    let nonterminals = match declared {
        None => inferred.nonterminals,
        Some(decl) => {
            let a: HashSet<&String> = decl.iter().collect();
            let b: HashSet<&String> = inferred.nonterminals.iter().collect();
            if a != b || a.len() != decl.len() {
                return Err(Error::InconsistentNonterminalDecl {
                    declared: decl,
                    inferred: inferred.nonterminals,
                });
            }
            decl
        }
    };
    Ok(RawGrammar {
        terminals,
        nonterminals,
        start,
        rules: rules
            .into_iter()
            .enumerate()
            .map(|(i, (_, lhs, rhs))| RuleSpec { id: i + 1, lhs, rhs })
            .collect(),
    })
}

fn header(key: &str, items: &[String]) -> String {
    if items.is_empty() {
        format!("{key}:\n")
    } else {
        format!("{key}: {}\n", items.join(" "))
    }
}

pub fn serialize_grammar(grammar: &Grammar) -> String {
    let mut out = String::new();
    out.push_str(&format!("start: {}\n", grammar.name(grammar.start())));
    out.push_str(&header("terminals", &grammar.terminal_names()));
    out.push_str(&header("nonterminals", &grammar.nonterminal_names()));
    out.push_str("rules:\n");
    for rule in grammar.rules() {
        out.push_str(&grammar.rule_to_string(rule));
        out.push('\n');
    }
    out
}

/// Parses a projection table: one `annotated<TAB>base` pair per line.
pub fn parse_table(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (from, to) = line
            .split_once('\t')
            .ok_or_else(|| syntax(i + 1, 1, "expected `annotated<TAB>base`"))?;
        if to.contains('\t') || from.trim().is_empty() || to.trim().is_empty() {
            return Err(syntax(i + 1, from.len() + 2, "malformed table entry"));
        }
        map.insert(from.trim().to_string(), to.trim().to_string());
    }
    Ok(map)
}

pub fn serialize_table(table: &BTreeMap<String, String>) -> String {
    table
        .iter()
        .map(|(a, b)| format!("{a}\t{b}\n"))
        .collect()
}
