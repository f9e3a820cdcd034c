//! Robustness properties of the file-format parsers.

use proptest::prelude::*;

use tsa_cli::format::{parse_automaton, parse_grammar, print_automaton, print_grammar};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Arbitrary input never panics the parsers; it either parses or yields
    /// a positioned error.
    #[test]
    fn parsers_are_total(text in "[ -~\nε⟨⟩□τ@#]*") {
        let _ = parse_grammar(&text);
        let _ = parse_automaton(&text);
    }

    /// Whatever a grammar file parses to, the canonical printer and a
    /// reparse reproduce it (when the printer can spell the terminals).
    #[test]
    fn parsed_grammars_round_trip(text in "[ -~\n]{0,200}") {
        if let Ok(g) = parse_grammar(&text) {
            if let Ok(printed) = print_grammar(&g) {
                let reparsed = parse_grammar(&printed)
                    .expect("canonical output must reparse");
                prop_assert_eq!(print_grammar(&reparsed).unwrap(), printed);
            }
        }
    }

    /// Same for automaton files.
    #[test]
    fn parsed_automata_round_trip(text in "[ -~\n]{0,200}") {
        if let Ok(m) = parse_automaton(&text) {
            let printed = print_automaton(&m);
            let reparsed = parse_automaton(&printed)
                .expect("canonical output must reparse");
            prop_assert_eq!(print_automaton(&reparsed), printed);
        }
    }
}
