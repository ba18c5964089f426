use thiserror::Error;

use crate::grammar::RuleId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // grammar well-formedness
    #[error("invalid symbol name {0:?}")]
    InvalidSymbolName(String),
    #[error("symbol {0:?} is declared both terminal and nonterminal")]
    SymbolBothKinds(String),
    #[error("rule id {0} is duplicated or out of declaration order")]
    DuplicateRuleId(usize),
    #[error("rule {0} has an empty left-hand side")]
    EmptyLhs(RuleId),
    #[error("rule {0} has no nonterminal on its left-hand side")]
    LhsAllTerminal(RuleId),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("start symbol {0:?} is not a nonterminal")]
    StartNotNonterminal(String),
    #[error("unknown rule id {0}")]
    UnknownRule(usize),

    // form preconditions
    #[error("grammar is not linear core: rule {0} fits no linear core form")]
    NotLinearCore(RuleId),
    #[error("grammar is not left linear core: rule {0} fits no left linear core form")]
    NotLeftLinearCore(RuleId),
    #[error("grammar is not context-free: rule {0} has a multi-symbol left-hand side")]
    NotContextFree(RuleId),

    // derivations
    #[error("rule {rule} does not match at position {position}")]
    NoMatchAtPosition { rule: RuleId, position: usize },
    #[error("derivation step {step} (rule {rule} at {position}) does not replay")]
    ReplayMismatch {
        step: usize,
        rule: RuleId,
        position: usize,
    },
    #[error("search limits must be positive")]
    InvalidLimits,
    #[error("no derivation of {word:?} within {max_steps} steps and form length {max_form_len}")]
    NotFoundWithinLimits {
        word: String,
        max_steps: usize,
        max_form_len: usize,
    },

    // trees
    #[error("rule {0} is not context-free and has no rule tree")]
    NotContextFreeRule(RuleId),
    #[error("path pair does not belong to this tree")]
    ForeignPathPair,
    #[error("node {0} is not on the requested path")]
    NodeNotOnPath(usize),
    #[error("tree was not built from a derivation in this grammar")]
    TreeGrammarMismatch,

    // transformations
    #[error("construction would emit {projected} rules, above the cap of {cap}")]
    UOverflow { projected: u128, cap: u128 },
    #[error("grammar is not in slow-branching shape: {reason} ({})", chain.join(" => "))]
    NotSlowBranchingShape { reason: String, chain: Vec<String> },
    #[error("grammar is self-embedding: {witness} =>* {} {witness} {}", left.join(" "), right.join(" "))]
    SelfEmbedding {
        witness: String,
        left: Vec<String>,
        right: Vec<String>,
    },

    // text formats
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("declared nonterminals {declared:?} differ from inferred {inferred:?}")]
    InconsistentNonterminalDecl {
        declared: Vec<String>,
        inferred: Vec<String>,
    },
    #[error("line {0}: `eps` may only stand alone as a right-hand side")]
    EpsMisuse(usize),
    #[error("cannot split {0:?} into terminal symbols")]
    BadWord(String),
}
