//! Textual formats and the bounded-equivalence harness for the `tsa` tools.
//!
//! Two line-oriented UTF-8 formats are defined here, with canonical printers
//! that round-trip byte-for-byte through the parsers.
//!
//! Grammar files (`#` starts a comment outside quotes):
//!
//! ```text
//! initial: S
//! S -> [ x1.1 x2.1 x1.2 x2.2 ] ( A, B )
//! A -> [ "a" x1.1 , "c" x1.2 ] ( A )
//! A -> [ "" , "" ] ( )
//! ```
//!
//! Each character inside a quoted string is one terminal; `""` is ε.
//! Variables are written `x<arg>.<component>`. Nonterminal sorts are taken
//! from the fan-out of their rules (initial or rule-less nonterminals
//! default to the smallest sort their uses allow).
//!
//! Automaton files (a line whose first character is `#` is a comment):
//!
//! ```text
//! states: 1 2 3 4 5
//! initial: 1
//! final: 5
//! stack: * #
//! trans: 1 -a-> 1 [true] push(1,*)
//! ```
//!
//! The read token `eps` stands for ε; predicates are `true`, `bottom`, and
//! `eq(<sym>)`; instructions are `id`, `push(<n>,<sym>)`, `up(<n>)`, `down`,
//! and `set(<sym>)`. State and stack-symbol names are free-form tokens
//! without whitespace.

pub mod format;
pub mod harness;
