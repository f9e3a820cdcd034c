//! Tree stack automata and (parallel) multiple context-free grammars.
//!
//! A *tree stack* is a tree over a stack alphabet with a distinguished root
//! symbol `@` and a stack pointer that may move up (to any child), down (to
//! the parent), push fresh children, and overwrite symbols anywhere except
//! the root. A *tree stack automaton* (TSA) is a finite-state automaton
//! equipped with such a storage. Restricting how often any stack position
//! may be entered from below (`k`-restriction) makes TSA recognise exactly
//! the languages of `k`-MCFGs.
//!
//! This crate provides:
//!
//! * [`grammar`] — the PMCFG/MCFG data model: composition functions, rules,
//!   derivations, tuple evaluation, bounded language enumeration and
//!   productivity analysis;
//! * [`treestack`] — the tree stack storage type with its five instructions
//!   and three predicates;
//! * [`automaton`] — TSA, the step/run relations, replay, bounded
//!   nondeterministic recognition, and the entry counters behind
//!   `k`-restriction;
//! * [`normalform`] — stay-loop removal and the stack normal form
//!   transformation, both language-preserving;
//! * [`g2a`] — compiling a PMCFG into an equivalent TSA, and reading a
//!   derivation back out of an accepting stack;
//! * [`a2g`] — compiling a cycle-free, `k`-restricted TSA in stack normal
//!   form into an equivalent `k`-MCFG via the run grammar;
//! * [`fixtures`] — the small reference automata and grammars used
//!   throughout the tests.
//!
//! Textual file formats and the command-line front end live in the
//! companion `tsa-cli` crate.

pub mod a2g;
pub mod automaton;
pub mod fixtures;
pub mod g2a;
pub mod grammar;
pub mod normalform;
mod sym;
pub mod treestack;

pub use sym::{char_word, display_word, Sym, Word};
