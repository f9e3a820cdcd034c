//! The bounded-equivalence harness: does a grammar and an automaton agree on
//! every word up to a length bound?

use std::collections::BTreeSet;

use tsa::automaton::{enumerate_bounded_automaton_language, SearchBudget, Tsa};
use tsa::grammar::{enumerate_bounded_language, Pmcfg};
use tsa::{display_word, Word};

/// The outcome of a bounded-language comparison.
///
/// `equivalent()` holds only when both difference sets are empty and the
/// automaton-side search was not truncated: truncated evidence cannot
/// support an equivalence verdict. The grammar side is enumerated with a
/// derivation-size budget the caller picks; a budget too small shows up as
/// words `only_in_automaton`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub max_len: usize,
    pub only_in_grammar: BTreeSet<String>,
    pub only_in_automaton: BTreeSet<String>,
    pub truncated: bool,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.only_in_grammar.is_empty() && self.only_in_automaton.is_empty() && !self.truncated
    }
}

/// Compares the bounded languages of a grammar and an automaton.
pub fn cmd_equiv(
    g: &Pmcfg,
    m: &Tsa,
    max_len: usize,
    max_nodes: usize,
    budget: &SearchBudget,
) -> EquivalenceReport {
    let grammar_words = enumerate_bounded_language(g, max_len, max_nodes);
    let automaton_side = enumerate_bounded_automaton_language(m, max_len, budget);
    let render = |w: &Word| display_word(w);
    EquivalenceReport {
        max_len,
        only_in_grammar: grammar_words
            .difference(&automaton_side.words)
            .map(render)
            .collect(),
        only_in_automaton: automaton_side
            .words
            .difference(&grammar_words)
            .map(render)
            .collect(),
        truncated: automaton_side.truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tsa::fixtures;
    use tsa::g2a::grammar_to_automaton;

    #[test]
    fn grammar_agrees_with_its_compiled_automaton() {
        let g = fixtures::aibjcidj_grammar();
        let ca = grammar_to_automaton(&g).unwrap();
        let budget = SearchBudget {
            max_steps: 150,
            max_eps_between_reads: 80,
            restriction_k: Some(2),
            max_storage_nodes: None,
        };
        let report = cmd_equiv(&g, &ca.tsa, 6, 12, &budget);
        assert!(report.equivalent(), "{report:?}");
    }

    #[test]
    fn different_languages_show_up_in_the_differences() {
        let g = fixtures::aibjcidj_grammar();
        let m = fixtures::anbncndn_automaton();
        let report = cmd_equiv(&g, &m, 4, 12, &SearchBudget::generous());
        assert!(!report.equivalent());
        assert!(report.only_in_grammar.contains("ac"));
        assert!(report.only_in_grammar.contains("bd"));
        assert!(report.only_in_automaton.is_empty());
    }

    #[test]
    fn truncation_blocks_an_equivalence_verdict() {
        let g = fixtures::aibjcidj_grammar();
        let ca = grammar_to_automaton(&g).unwrap();
        let tight = SearchBudget::generous().with_steps(4);
        let report = cmd_equiv(&g, &ca.tsa, 2, 12, &tight);
        assert!(report.truncated);
        assert!(!report.equivalent());
    }
}
