use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use treegram::analysis::{
    branching_nodes, certificate_check_with, max_dependency_count, neighboring_paths, non_neighbor_violations,
    pair_context, slow_branching, BranchingMode, Theorem,
};
use treegram::derive::{bounded_equiv, default_slack, derive_word, enumerate_language, SearchLimits};
use treegram::dot::export_dot;
use treegram::format::{parse_grammar, parse_table, serialize_grammar, serialize_table};
use treegram::normal::knf_split;
use treegram::report::{certificate_report, equivalence_report, form_report, path_string, rule_list, stats_report, Report};
use treegram::transform::{run_pipeline, Mode};
use treegram::tree::{build_tree, DerivationTree};
use treegram::{Error, Grammar};

#[derive(Parser)]
#[command(name = "treegram", version, about = "Derivation trees and context-bounded grammar transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct Limits {
    #[arg(long, default_value_t = 60)]
    max_steps: usize,
    #[arg(long, default_value_t = 20)]
    max_form_len: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Report the grammar classes a grammar belongs to.
    Classify { file: PathBuf },
    /// List every word up to a length.
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        slack: Option<usize>,
    },
    /// Find a shortest derivation of a word.
    Derive {
        file: PathBuf,
        #[arg(long)]
        word: String,
        #[command(flatten)]
        limits: Limits,
    },
    /// Write the derivation tree of a word as Graphviz.
    Tree {
        file: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long)]
        dot: PathBuf,
        #[command(flatten)]
        limits: Limits,
    },
    /// Inspect the derivation tree of a word, or sweep all short words.
    Analyze {
        file: PathBuf,
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        word: Option<String>,
        #[arg(long, requires = "max_len")]
        all: bool,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        slack: Option<usize>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        theorem: Option<u8>,
        #[arg(long, default_value_t = 1)]
        u: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        lenient: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Compile a context-bounded grammar into a context-free one.
    Transform {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        u: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Projection table path; defaults to the output path with `.tbl`.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        dump_stages: Option<PathBuf>,
    },
    /// Compare the bounded languages of two grammars.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        slack: Option<usize>,
        #[arg(long)]
        project: Option<PathBuf>,
    },
    /// Split a linear core grammar into Kuroda normal form.
    Knf {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Metalinear,
    Regular,
}

enum Failure {
    /// A well-formed negative answer.
    Verdict(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotFoundWithinLimits { .. } | Error::SelfEmbedding { .. } | Error::NotSlowBranchingShape { .. } => {
                Failure::Verdict(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> std::result::Result<Grammar, Failure> {
    parse_grammar(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn limits(l: Limits) -> std::result::Result<SearchLimits, Failure> {
    Ok(SearchLimits::new(l.max_steps, l.max_form_len)?)
}

fn tree_for(g: &Grammar, word: &str, l: Limits) -> std::result::Result<DerivationTree, Failure> {
    let w = g.parse_word(word)?;
    let d = derive_word(g, &w, limits(l)?)?;
    Ok(build_tree(g, &d)?)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Classify { file } => {
            emit(&form_report(&load(&file)?));
            Ok(true)
        }
        Command::Enumerate { file, max_len, slack } => {
            let g = load(&file)?;
            let slack = slack.unwrap_or_else(|| default_slack(&g, max_len));
            let e = enumerate_language(&g, max_len, slack);
            let mut r = Report::new();
            r.push("max_len", max_len).push("slack", slack).push("words", e.words.len());
            for w in &e.words {
                r.push("word", g.render(w));
            }
            emit(&r);
            Ok(true)
        }
        Command::Derive { file, word, limits: l } => {
            let g = load(&file)?;
            let w = g.parse_word(&word)?;
            let d = derive_word(&g, &w, limits(l)?)?;
            let mut r = Report::new();
            r.push("steps", d.steps.len()).push("derivation", &d);
            for (i, f) in d.replay(&g)?.iter().enumerate() {
                r.push(format!("form {i}"), g.names(f).join(" "));
            }
            emit(&r);
            Ok(true)
        }
        Command::Tree { file, word, dot, limits: l } => {
            let g = load(&file)?;
            let t = tree_for(&g, &word, l)?;
            write(&dot, &export_dot(&g, &t))?;
            let mut r = Report::new();
            r.push("nodes", t.len()).push("dependencies", t.dependencies().len()).push("dot", dot.display());
            emit(&r);
            Ok(true)
        }
        Command::Analyze {
            file,
            word,
            all,
            max_len,
            slack,
            theorem,
            u,
            k,
            lenient,
            limits: l,
        } => {
            let g = load(&file)?;
            let mode = if lenient { BranchingMode::Lenient } else { BranchingMode::Strict };
            let theorem = theorem.map(|n| Theorem::try_from(n).expect("range checked by clap"));
            if all {
                return sweep(&g, max_len.unwrap_or(0), slack, theorem, u, k, mode, l);
            }
            let t = tree_for(&g, word.as_deref().unwrap_or(""), l)?;
            let mut r = Report::new();
            let names = |ns: &[usize]| path_string(&g, &t, ns);
            r.push("frontier", g.render(&t.frontier()))
                .push("nodes", t.len())
                .push("dependencies", t.dependencies().len())
                .push("branching", names(&branching_nodes(&t)));
            for p in neighboring_paths(&t) {
                r.push("pair", format!("{} / {}", names(&p.left), names(&p.right)))
                    .push("context", rule_list(&pair_context(&t, &p)?));
            }
            r.push("mode", if lenient { "lenient" } else { "strict" });
            let Some(th) = theorem else {
                let s = slow_branching(&t, mode);
                r.push("u_observed", max_dependency_count(&t).0)
                    .push("non_neighbor_violations", non_neighbor_violations(&t).len())
                    .push("slow_branching", s.holds)
                    .push("degree", s.degree);
                emit(&r);
                return Ok(true);
            };
            let c = certificate_check_with(&g, &t, th, u, k, mode)?;
            r.extend(certificate_report(&g, &t, &c));
            emit(&r);
            Ok(c.verdict)
        }
        Command::Transform {
            file,
            mode,
            u,
            output,
            table,
            dump_stages,
        } => {
            let g = load(&file)?;
            let mode = match mode {
                ModeArg::Metalinear => Mode::Metalinear,
                ModeArg::Regular => Mode::Regular,
            };
            let run = run_pipeline(&g, u, mode)?;
            let mut gamma = run.built.gamma.clone();
            let start = run.normalized.name(run.normalized.start());
            if mode == Mode::Metalinear && !gamma.contains_key(start) {
                gamma.insert(start.to_string(), g.name(g.start()).to_string());
            }
            write(&output, &serialize_grammar(&run.normalized))?;
            let table = table.unwrap_or_else(|| output.with_extension("tbl"));
            write(&table, &serialize_table(&gamma))?;
            if let Some(dir) = dump_stages {
                fs::create_dir_all(&dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
                for (i, (name, stage)) in run.stages().iter().enumerate() {
                    write(&dir.join(format!("{}_{name}.gg", i + 1)), &serialize_grammar(stage))?;
                }
            }
            let mut r = stats_report(&run.built.stats);
            r.push("built_rules", run.built.grammar.rules().len())
                .push("pruned_rules", run.pruned.rules().len())
                .push("empty_language", run.empty_language)
                .push("output_rules", run.normalized.rules().len());
            if let Some(k) = run.k {
                r.push("k", k);
                for w in &run.start_strings {
                    r.push("start_string", w.join(" "));
                }
            }
            r.push("output", output.display()).push("table", table.display());
            emit(&r);
            Ok(true)
        }
        Command::Equiv {
            first,
            second,
            max_len,
            slack,
            project,
        } => {
            let (a, b) = (load(&first)?, load(&second)?);
            let table = match project {
                Some(p) => Some(parse_table(&read(&p)?)?),
                None => None,
            };
            let slack = slack.unwrap_or_else(|| default_slack(&a, max_len).max(default_slack(&b, max_len)));
            let v = bounded_equiv(&a, &b, max_len, slack, table.as_ref());
            let mut r = equivalence_report(&v);
            r.push("slack", slack);
            emit(&r);
            Ok(v.is_equal())
        }
        Command::Knf { file, output } => {
            let out = knf_split(&load(&file)?)?;
            write(&output, &serialize_grammar(&out))?;
            let mut r = Report::new();
            r.push("rules", out.rules().len()).push("output", output.display());
            emit(&r);
            Ok(true)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    g: &Grammar,
    max_len: usize,
    slack: Option<usize>,
    theorem: Option<Theorem>,
    u: usize,
    k: Option<usize>,
    mode: BranchingMode,
    l: Limits,
) -> Outcome {
    let slack = slack.unwrap_or_else(|| default_slack(g, max_len));
    let e = enumerate_language(g, max_len, slack);
    let (mut max_u, mut max_degree, mut derived, mut passing) = (0, 0, 0, 0);
    let mut failing: Vec<String> = Vec::new();
    for w in &e.words {
        let Ok(d) = derive_word(g, w, limits(l)?) else {
            failing.push(g.render(w));
            continue;
        };
        let t = build_tree(g, &d)?;
        derived += 1;
        max_u = max_u.max(max_dependency_count(&t).0);
        max_degree = max_degree.max(slow_branching(&t, mode).degree);
        if let Some(th) = theorem {
            if certificate_check_with(g, &t, th, u, k, mode)?.verdict {
                passing += 1;
            } else {
                failing.push(g.render(w));
            }
        }
    }
    let mut r = Report::new();
    r.push("note", "one derivation per word; certificates exist per tree, so this is a heuristic")
        .push("words", e.words.len())
        .push("derived", derived)
        .push("max_u_observed", max_u)
        .push("max_degree", max_degree);
    let ok = failing.is_empty();
    if let Some(th) = theorem {
        r.push("theorem", th).push("passing", passing);
        for w in &failing {
            r.push("failing", w);
        }
        r.push("verdict", ok);
    }
    emit(&r);
    Ok(ok || theorem.is_none())
}

/// Writes to stdout, tolerating a reader that went away.
fn emit(text: &dyn std::fmt::Display) {
    let _ = write!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verdict(msg)) => {
            emit(&format!("result: {msg}\n"));
            eprintln!("treegram: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("treegram: {msg}");
            ExitCode::from(2)
        }
    }
}
