//! The small running examples used throughout the test suites.

use std::collections::BTreeSet;

use crate::automaton::{Transition, Tsa};
use crate::grammar::{Composition, Item, Pmcfg, Rule, Variable};
use crate::sym::Sym;
use crate::treestack::{Instruction, Predicate};

fn sym(s: &str) -> Sym {
    Sym::new(s)
}

fn trans(
    source: &str,
    read: Option<&str>,
    predicate: Predicate,
    instruction: Instruction,
    target: &str,
) -> Transition {
    Transition {
        source: sym(source),
        read: read.map(sym),
        predicate,
        instruction,
        target: sym(target),
    }
}

/// A TSA over `{a, b, c, d}` with a monadic stack recognising
/// `{ aⁿbⁿcⁿdⁿ | n ∈ ℕ }`. It is 2-restricted, cycle-free, and in stack
/// normal form.
pub fn anbncndn_automaton() -> Tsa {
    let star = sym("*");
    let hash = sym("#");
    Tsa {
        states: (1..=5).map(|i| sym(&i.to_string())).collect(),
        stack_alphabet: vec![star.clone(), hash.clone()],
        terminals: ["a", "b", "c", "d"].iter().map(|s| sym(s)).collect(),
        initial_state: sym("1"),
        transitions: vec![
            trans("1", Some("a"), Predicate::True, Instruction::Push(1, star.clone()), "1"),
            trans("1", None, Predicate::True, Instruction::Push(1, hash.clone()), "2"),
            trans("2", None, Predicate::Equals(hash.clone()), Instruction::Down, "2"),
            trans("2", Some("b"), Predicate::Equals(star.clone()), Instruction::Down, "2"),
            trans("2", None, Predicate::Bottom, Instruction::Up(1), "3"),
            trans("3", Some("c"), Predicate::Equals(star.clone()), Instruction::Up(1), "3"),
            trans("3", None, Predicate::Equals(hash.clone()), Instruction::Down, "4"),
            trans("4", Some("d"), Predicate::Equals(star), Instruction::Down, "4"),
            trans("4", None, Predicate::Bottom, Instruction::Id, "5"),
        ],
        final_states: [sym("5")].into_iter().collect(),
    }
}

/// A TSA with a branching stack recognising
/// `{ aⁱbʲcⁱdʲ | i, j ∈ ℕ ∖ {0} }`. It is 2-restricted and cycle-free but
/// not in stack normal form (it accepts away from the root).
pub fn aibjcidj_automaton() -> Tsa {
    let star = sym("*");
    let hash = sym("#");
    Tsa {
        states: (1..=9).map(|i| sym(&i.to_string())).collect(),
        stack_alphabet: vec![star.clone(), hash.clone()],
        terminals: ["a", "b", "c", "d"].iter().map(|s| sym(s)).collect(),
        initial_state: sym("1"),
        transitions: vec![
            trans("1", Some("a"), Predicate::Bottom, Instruction::Push(1, star.clone()), "2"),
            trans("2", Some("a"), Predicate::True, Instruction::Push(1, star.clone()), "2"),
            trans("2", None, Predicate::True, Instruction::Push(1, hash.clone()), "3"),
            trans("3", None, Predicate::True, Instruction::Down, "3"),
            trans("3", Some("b"), Predicate::Bottom, Instruction::Push(2, star.clone()), "4"),
            trans("4", Some("b"), Predicate::True, Instruction::Push(1, star.clone()), "4"),
            trans("4", None, Predicate::True, Instruction::Push(1, hash.clone()), "5"),
            trans("5", None, Predicate::True, Instruction::Down, "5"),
            trans("5", None, Predicate::Bottom, Instruction::Up(1), "6"),
            trans("6", Some("c"), Predicate::Equals(star.clone()), Instruction::Up(1), "6"),
            trans("6", None, Predicate::Equals(hash.clone()), Instruction::Down, "7"),
            trans("7", None, Predicate::Equals(star.clone()), Instruction::Down, "7"),
            trans("7", None, Predicate::Bottom, Instruction::Up(2), "8"),
            trans("8", Some("d"), Predicate::Equals(star), Instruction::Up(1), "8"),
            trans("8", None, Predicate::Equals(hash), Instruction::Id, "9"),
        ],
        final_states: [sym("9")].into_iter().collect(),
    }
}

/// An MCFG over `{a, b, c, d}` generating `{ aⁱbʲcⁱdʲ | i, j ∈ ℕ }`.
///
/// Rules, in order:
/// 0. `S → [x1.1 x2.1 x1.2 x2.2](A, B)`
/// 1. `A → [a x1.1, c x1.2](A)`
/// 2. `A → [ε, ε]()`
/// 3. `B → [b x1.1, d x1.2](B)`
/// 4. `B → [ε, ε]()`
pub fn aibjcidj_grammar() -> Pmcfg {
    let (s, a, b) = (sym("S"), sym("A"), sym("B"));
    let var = |i, j| Item::Var(Variable::new(i, j));
    let t = |c: &str| Item::Terminal(sym(c));
    Pmcfg {
        nonterminals: [(s.clone(), 1), (a.clone(), 2), (b.clone(), 2)]
            .into_iter()
            .collect(),
        terminals: ["a", "b", "c", "d"].iter().map(|c| sym(c)).collect(),
        initials: [s.clone()].into_iter().collect(),
        rules: vec![
            Rule {
                lhs: s,
                comp: Composition {
                    arg_sorts: vec![2, 2],
                    components: vec![vec![var(1, 1), var(2, 1), var(1, 2), var(2, 2)]],
                },
                rhs: vec![a.clone(), b.clone()],
            },
            Rule {
                lhs: a.clone(),
                comp: Composition {
                    arg_sorts: vec![2],
                    components: vec![vec![t("a"), var(1, 1)], vec![t("c"), var(1, 2)]],
                },
                rhs: vec![a.clone()],
            },
            Rule {
                lhs: a,
                comp: Composition {
                    arg_sorts: vec![],
                    components: vec![vec![], vec![]],
                },
                rhs: vec![],
            },
            Rule {
                lhs: b.clone(),
                comp: Composition {
                    arg_sorts: vec![2],
                    components: vec![vec![t("b"), var(1, 1)], vec![t("d"), var(1, 2)]],
                },
                rhs: vec![b.clone()],
            },
            Rule {
                lhs: b,
                comp: Composition {
                    arg_sorts: vec![],
                    components: vec![vec![], vec![]],
                },
                rhs: vec![],
            },
        ],
    }
}

/// Every word `aⁿbⁿcⁿdⁿ` with length at most `max_len`; the reference set
/// for the language of [`anbncndn_automaton`].
pub fn anbncndn_words(max_len: usize) -> BTreeSet<crate::Word> {
    let mut out = BTreeSet::new();
    let mut n = 0;
    while 4 * n <= max_len {
        out.insert(crate::char_word(&format!(
            "{}{}{}{}",
            "a".repeat(n),
            "b".repeat(n),
            "c".repeat(n),
            "d".repeat(n)
        )));
        n += 1;
    }
    out
}

/// Every word `aⁱbʲcⁱdʲ` with length at most `max_len`, for `i, j ≥ min_reps`.
/// The reference sets for [`aibjcidj_automaton`] (`min_reps = 1`) and
/// [`aibjcidj_grammar`] (`min_reps = 0`).
pub fn aibjcidj_words(max_len: usize, min_reps: usize) -> BTreeSet<crate::Word> {
    let mut out = BTreeSet::new();
    for i in min_reps..=max_len / 2 {
        for j in min_reps..=max_len / 2 {
            if 2 * i + 2 * j <= max_len {
                out.insert(crate::char_word(&format!(
                    "{}{}{}{}",
                    "a".repeat(i),
                    "b".repeat(j),
                    "c".repeat(i),
                    "d".repeat(j)
                )));
            }
        }
    }
    out
}
