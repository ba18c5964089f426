//! Derivation trees with context dependencies for linear core general
//! grammars, and constructions that compile context-bounded grammars into
//! k-linear or regular context-free grammars.
//!
//! Every transformation is checked empirically against the bounded
//! enumeration oracle in [`derive`].

pub mod analysis;
pub mod derive;
pub mod dot;
pub mod error;
pub mod format;
pub mod grammar;
pub mod normal;
pub mod report;
pub mod transform;
pub mod tree;

pub use error::{Error, Result};
pub use grammar::{FormReport, Grammar, RawGrammar, Rule, RuleForm, RuleId, RuleSpec, SymbolId};
