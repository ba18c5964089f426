#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treegram::derive::{apply_rule, Derivation, Step};
use treegram::format::parse_grammar;
use treegram::{Grammar, RawGrammar};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("grammars").join(name)
}

pub fn fixture(name: &str) -> Grammar {
    parse_grammar(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

pub fn example2() -> Grammar {
    fixture("example2.gg")
}

pub fn gab() -> Grammar {
    fixture("gab.gg")
}

/// Applies each rule at its leftmost match.
pub fn leftmost(g: &Grammar, rules: &[usize]) -> Derivation {
    let mut form = vec![g.start()];
    let mut steps = Vec::new();
    for &r in rules {
        let rule = &g.rules()[r - 1];
        let pos = (0..form.len())
            .find(|&p| apply_rule(&form, rule, p).is_ok())
            .unwrap_or_else(|| panic!("rule {r} does not apply to {:?}", g.names(&form)));
        form = apply_rule(&form, rule, pos).unwrap();
        steps.push(Step::new(r, pos));
    }
    Derivation::new(g.start(), steps)
}

/// The derivation drawn for `aaa0011a0011b` in the worked example.
pub fn figure3(g: &Grammar) -> Derivation {
    leftmost(
        g,
        &[1, 2, 3, 4, 5, 6, 6, 10, 11, 15, 15, 8, 9, 12, 16, 16, 17, 17, 18, 19, 20, 21, 22],
    )
}

/// Random linear core grammar over `a b` with at most `max_nt`
/// nonterminals, `max_rules` rules and `max_cs` rules of shape `AB -> CD`.
pub fn random_grammar(seed: u64, max_nt: usize, max_rules: usize, max_cs: usize) -> Grammar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_nt);
    let nts: Vec<String> = std::iter::once("S".to_string())
        .chain((1..n).map(|i| ((b'A' + i as u8 - 1) as char).to_string()))
        .collect();
    let terms = ["a", "b"];
    let nt = |rng: &mut ChaCha8Rng| nts.choose(rng).unwrap().clone();
    let tstr = |rng: &mut ChaCha8Rng| -> Vec<String> {
        (0..rng.gen_range(0..=1)).map(|_| terms.choose(rng).unwrap().to_string()).collect()
    };
    let count = rng.gen_range(3..=max_rules);
    let mut cs = 0;
    let mut rules: Vec<(Vec<String>, Vec<String>)> = Vec::new();
    // start always has some way forward
    rules.push((vec!["S".into()], vec![nt(&mut rng), nt(&mut rng)]));
    while rules.len() < count {
        let lhs = nt(&mut rng);
        let rule = match rng.gen_range(0..10) {
            0..=2 => (vec![lhs], vec![nt(&mut rng), nt(&mut rng)]),
            3 if cs < max_cs => {
                cs += 1;
                (vec![lhs, nt(&mut rng)], vec![nt(&mut rng), nt(&mut rng)])
            }
            3 | 4 => (vec![lhs], Vec::new()),
            5 | 6 => (vec![lhs], vec![terms.choose(&mut rng).unwrap().to_string()]),
            _ => {
                let mut rhs = tstr(&mut rng);
                rhs.push(nt(&mut rng));
                rhs.extend(tstr(&mut rng));
                (vec![lhs], rhs)
            }
        };
        rules.push(rule);
    }
    RawGrammar::infer(vec!["a".into(), "b".into()], "S", rules)
        .build()
        .expect("generated grammar is valid")
}

/// Up to `max_steps` random rewriting steps from the start symbol, never
/// growing a form beyond `max_len`.
pub fn random_derivation(g: &Grammar, seed: u64, max_steps: usize, max_len: usize) -> Derivation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut form = vec![g.start()];
    let mut steps = Vec::new();
    for _ in 0..max_steps {
        let mut options = Vec::new();
        for rule in g.rules() {
            for pos in 0..form.len() {
                if let Ok(next) = apply_rule(&form, rule, pos) {
                    if next.len() <= max_len {
                        options.push((Step::new(rule.id.0, pos), next));
                    }
                }
            }
        }
        let Some((step, next)) = options.choose(&mut rng).cloned() else { break };
        steps.push(step);
        form = next;
    }
    Derivation::new(g.start(), steps)
}

#[derive(Debug)]
pub struct SoundnessCase {
    pub u: usize,
    pub target_words: usize,
    pub source_words: usize,
    /// Target words missing from the source enumeration that needed a
    /// direct derivation search.
    pub rechecked: usize,
    pub complete: bool,
}

/// Checks, for each `u`, that every word of the annotated grammar is a word
/// of `g`. Words missed by the bounded source enumeration are looked up by a
/// direct derivation search before being reported.
pub fn soundness(g: &Grammar, us: &[usize], max_len: usize) -> Result<Vec<SoundnessCase>, String> {
    use std::collections::BTreeSet;
    use treegram::derive::{derive_word, enumerate_with_budget, SearchLimits};
    use treegram::transform::build_metalinear;

    let source = enumerate_with_budget(g, max_len, 6, Some(300_000));
    let known: BTreeSet<Vec<String>> = source.words.iter().map(|w| g.names(w)).collect();
    let mut cases = Vec::new();
    for &u in us {
        let built = build_metalinear(g, u).map_err(|e| e.to_string())?;
        let target = enumerate_with_budget(&built.grammar, max_len, 4, Some(150_000));
        let mut rechecked = 0;
        for w in &target.words {
            let names = built.project(&built.grammar.names(w)).map_err(|e| e.to_string())?;
            if known.contains(&names) {
                continue;
            }
            rechecked += 1;
            let word: Vec<_> = names.iter().map(|n| g.id_of(n).unwrap()).collect();
            let limits = SearchLimits::new(4 * max_len + 16, max_len + 12).unwrap();
            if derive_word(g, &word, limits).is_err() {
                return Err(format!("u={u}: {names:?} is generated by the construction only"));
            }
        }
        cases.push(SoundnessCase {
            u,
            target_words: target.words.len(),
            source_words: known.len(),
            rechecked,
            complete: target.complete && source.complete,
        });
    }
    Ok(cases)
}
