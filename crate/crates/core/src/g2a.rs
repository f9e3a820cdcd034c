//! Compiling a PMCFG into an equivalent tree stack automaton.
//!
//! The compiled automaton guesses a derivation on its stack while traversing
//! the composition components of the guessed rules left to right. Stack
//! symbols are either `□` (a pending initial call), a rule (a finished
//! subderivation), or a rule position `⟨r,i,j⟩` ("inside component `i` of
//! `r`, right after the `j`-th item", recording where to resume in the
//! parent). States are the rule positions plus `□`, each in a plain, `₊`
//! (just moved up, about to re-enter a child) and `₋` (about to hand back to
//! the parent) flavour.
//!
//! Five transition families drive the traversal: `init` starts an initial
//! rule, `read` consumes a terminal, `call` pushes a fresh child for the
//! first use of an argument, `resume` re-enters an existing child for a
//! later component, and `suspend` finishes a component and returns to the
//! parent. On acceptance the first subtree of the stack holds the guessed
//! rules: for non-deleting grammars it *is* a derivation of the recognised
//! word.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::automaton::{replay, ReplayError, Run, Transition, Tsa};
use crate::grammar::{classify, validate_grammar, Derivation, Item, Pmcfg, Rule, Violation};
use crate::sym::{Sym, Word};
use crate::treestack::{Instruction, Position, Predicate, TreeStack};

/// Where a `suspend` hands control back to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReturnTo {
    /// The pending initial call `□`.
    Start,
    /// The rule position `⟨rule, comp, item⟩` that entered the child.
    Pos {
        rule: usize,
        comp: usize,
        item: usize,
    },
}

/// The family and parameters a compiled transition was emitted for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    Init {
        rule: usize,
    },
    Read {
        rule: usize,
        comp: usize,
        item: usize,
    },
    Call {
        rule: usize,
        comp: usize,
        item: usize,
        callee: usize,
    },
    Resume1 {
        rule: usize,
        comp: usize,
        item: usize,
    },
    Resume2 {
        rule: usize,
        comp: usize,
        item: usize,
        callee: usize,
    },
    Suspend1 {
        callee: usize,
        comp: usize,
        ret: ReturnTo,
    },
    Suspend2 {
        ret: ReturnTo,
    },
}

/// A compiled automaton together with the family label of each transition
/// and the rule carried by each plain position state.
#[derive(Clone, Debug)]
pub struct CompiledAutomaton {
    pub tsa: Tsa,
    pub labels: Vec<TransitionLabel>,
    plain_state_rule: BTreeMap<Sym, usize>,
}

impl CompiledAutomaton {
    /// The index of the transition emitted for `label`, if any.
    pub fn find(&self, label: &TransitionLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The rule component of a plain `⟨r,i,j⟩` state.
    pub fn rule_of_plain_state(&self, state: &Sym) -> Option<usize> {
        self.plain_state_rule.get(state).copied()
    }
}

/// The stack/state symbol for the pending initial call.
pub fn box_symbol() -> Sym {
    Sym::new("□")
}

/// The stack symbol recording that rule `index` was derived here.
pub fn rule_symbol(index: usize) -> Sym {
    Sym::new(format!("r{}", index + 1))
}

/// The symbol for the rule position `⟨r,i,j⟩` (1-based rule and component).
pub fn position_symbol(rule: usize, comp: usize, item: usize) -> Sym {
    Sym::new(format!("⟨r{},{},{}⟩", rule + 1, comp, item))
}

fn plus_state(base: &Sym) -> Sym {
    Sym::new(format!("{base}+"))
}

fn minus_state(base: &Sym) -> Sym {
    Sym::new(format!("{base}-"))
}

#[derive(Clone, Debug, Error)]
pub enum CompileError {
    #[error("grammar is not well formed: {0}")]
    InvalidGrammar(Violation),
}

/// Compiles a grammar into its tree stack automaton.
///
/// The grammar need not have only productive nonterminals; compiling as-is
/// guarantees the automaton accepts at least the grammar's language, and
/// exactly it once unproductive nonterminals are removed beforehand.
pub fn grammar_to_automaton(g: &Pmcfg) -> Result<CompiledAutomaton, CompileError> {
    if let Some(violation) = validate_grammar(g).into_iter().next() {
        return Err(CompileError::InvalidGrammar(violation));
    }

    let mut states = Vec::new();
    let mut plain_state_rule = BTreeMap::new();
    let push_state_triple = |base: Sym, states: &mut Vec<Sym>| {
        states.push(base.clone());
        states.push(plus_state(&base));
        states.push(minus_state(&base));
    };
    push_state_triple(box_symbol(), &mut states);
    let mut stack_alphabet = vec![box_symbol()];
    for r in 0..g.rules.len() {
        stack_alphabet.push(rule_symbol(r));
    }
    for (r, rule) in g.rules.iter().enumerate() {
        for (i, comp) in rule.comp.components.iter().enumerate() {
            for j in 0..=comp.len() {
                let base = position_symbol(r, i + 1, j);
                plain_state_rule.insert(base.clone(), r);
                stack_alphabet.push(base.clone());
                push_state_triple(base, &mut states);
            }
        }
    }

    let mut transitions: Vec<Transition> = Vec::new();
    let mut labels: Vec<TransitionLabel> = Vec::new();
    let mut seen: HashSet<Transition> = HashSet::new();
    let mut emit = |t: Transition, label: TransitionLabel| {
        if seen.insert(t.clone()) {
            transitions.push(t);
            labels.push(label);
        }
    };

    for (r, rule) in g.rules.iter().enumerate() {
        if !g.initials.contains(&rule.lhs) {
            continue;
        }
        let end = rule.comp.components[0].len();
        emit(
            Transition {
                source: box_symbol(),
                read: None,
                predicate: Predicate::True,
                instruction: Instruction::Push(1, box_symbol()),
                target: position_symbol(r, 1, 0),
            },
            TransitionLabel::Init { rule: r },
        );
        emit(
            Transition {
                source: position_symbol(r, 1, end),
                read: None,
                predicate: Predicate::Equals(box_symbol()),
                instruction: Instruction::Set(rule_symbol(r)),
                target: minus_state(&box_symbol()),
            },
            TransitionLabel::Suspend1 {
                callee: r,
                comp: 1,
                ret: ReturnTo::Start,
            },
        );
        emit(
            Transition {
                source: minus_state(&box_symbol()),
                read: None,
                predicate: Predicate::True,
                instruction: Instruction::Down,
                target: box_symbol(),
            },
            TransitionLabel::Suspend2 {
                ret: ReturnTo::Start,
            },
        );
    }

    for (r, rule) in g.rules.iter().enumerate() {
        for (i, comp) in rule.comp.components.iter().enumerate() {
            for (j, item) in comp.iter().enumerate() {
                if let Item::Terminal(t) = item {
                    emit(
                        Transition {
                            source: position_symbol(r, i + 1, j),
                            read: Some(t.clone()),
                            predicate: Predicate::True,
                            instruction: Instruction::Id,
                            target: position_symbol(r, i + 1, j + 1),
                        },
                        TransitionLabel::Read {
                            rule: r,
                            comp: i + 1,
                            item: j + 1,
                        },
                    );
                }
            }
        }
    }

    for (r, rule) in g.rules.iter().enumerate() {
        for (i, comp) in rule.comp.components.iter().enumerate() {
            for (j, item) in comp.iter().enumerate() {
                let Item::Var(var) = item else { continue };
                let here = position_symbol(r, i + 1, j + 1);
                let argument = &rule.rhs[var.arg_index - 1];
                emit(
                    Transition {
                        source: position_symbol(r, i + 1, j),
                        read: None,
                        predicate: Predicate::True,
                        instruction: Instruction::Up(var.arg_index as u32),
                        target: plus_state(&here),
                    },
                    TransitionLabel::Resume1 {
                        rule: r,
                        comp: i + 1,
                        item: j + 1,
                    },
                );
                for (callee, callee_rule) in g.rules.iter().enumerate() {
                    if callee_rule.lhs != *argument {
                        continue;
                    }
                    let callee_entry = position_symbol(callee, var.comp_index, 0);
                    emit(
                        Transition {
                            source: position_symbol(r, i + 1, j),
                            read: None,
                            predicate: Predicate::True,
                            instruction: Instruction::Push(var.arg_index as u32, here.clone()),
                            target: callee_entry.clone(),
                        },
                        TransitionLabel::Call {
                            rule: r,
                            comp: i + 1,
                            item: j + 1,
                            callee,
                        },
                    );
                    emit(
                        Transition {
                            source: plus_state(&here),
                            read: None,
                            predicate: Predicate::Equals(rule_symbol(callee)),
                            instruction: Instruction::Set(here.clone()),
                            target: callee_entry,
                        },
                        TransitionLabel::Resume2 {
                            rule: r,
                            comp: i + 1,
                            item: j + 1,
                            callee,
                        },
                    );
                    let callee_end = callee_rule.comp.components[var.comp_index - 1].len();
                    emit(
                        Transition {
                            source: position_symbol(callee, var.comp_index, callee_end),
                            read: None,
                            predicate: Predicate::Equals(here.clone()),
                            instruction: Instruction::Set(rule_symbol(callee)),
                            target: minus_state(&here),
                        },
                        TransitionLabel::Suspend1 {
                            callee,
                            comp: var.comp_index,
                            ret: ReturnTo::Pos {
                                rule: r,
                                comp: i + 1,
                                item: j + 1,
                            },
                        },
                    );
                }
                emit(
                    Transition {
                        source: minus_state(&here),
                        read: None,
                        predicate: Predicate::True,
                        instruction: Instruction::Down,
                        target: here.clone(),
                    },
                    TransitionLabel::Suspend2 {
                        ret: ReturnTo::Pos {
                            rule: r,
                            comp: i + 1,
                            item: j + 1,
                        },
                    },
                );
            }
        }
    }

    let tsa = Tsa {
        states,
        stack_alphabet,
        terminals: g.terminals.clone(),
        initial_state: box_symbol(),
        transitions,
        final_states: [box_symbol()].into_iter().collect(),
    };
    debug_assert_eq!(tsa.validate(), Vec::<String>::new());
    Ok(CompiledAutomaton {
        tsa,
        labels,
        plain_state_rule,
    })
}

/// The counter bound the compiled automaton obeys: the grammar's fan-out,
/// available only for linear grammars. Copying grammars give no bound.
pub fn restriction_bound(g: &Pmcfg) -> Option<usize> {
    let class = classify(g);
    class.is_mcfg.then(|| class.fan_out.max(1))
}

/// A sparse rule tree read off an accepting stack; children of a deleting
/// grammar's rules may be missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTree {
    pub rule: usize,
    pub children: BTreeMap<u32, RuleTree>,
}

impl RuleTree {
    /// Converts to a dense derivation; `None` when children are missing.
    pub fn to_derivation(&self, g: &Pmcfg) -> Option<Derivation> {
        let rule: &Rule = g.rules.get(self.rule)?;
        let mut children = Vec::with_capacity(rule.rhs.len());
        for idx in 1..=rule.rhs.len() as u32 {
            children.push(self.children.get(&idx)?.to_derivation(g)?);
        }
        if self.children.len() != rule.rhs.len() {
            return None;
        }
        Some(Derivation::new(self.rule, children))
    }

    fn node_count(&self) -> usize {
        1 + self.children.values().map(RuleTree::node_count).sum::<usize>()
    }
}

/// The rule tree extracted from a final storage, with a completeness flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedDerivation {
    pub tree: RuleTree,
    /// True iff the tree is a full sort-correct derivation. Guaranteed for
    /// accepting storages of non-deleting grammars; deleting grammars may
    /// leave unused children unexpanded, in which case any completion of the
    /// tree derives the recognised word.
    pub complete: bool,
}

impl ExtractedDerivation {
    pub fn node_count(&self) -> usize {
        self.tree.node_count()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("storage has no node below the root; nothing was derived")]
    EmptyStack,
    #[error("node {position} carries {symbol}, not a rule; the storage is not final")]
    NonRuleSymbol { position: Position, symbol: Sym },
}

/// Reads the first subtree of an accepting storage back as a rule tree.
pub fn extract_derivation(
    g: &Pmcfg,
    storage: &TreeStack,
) -> Result<ExtractedDerivation, ExtractError> {
    let rule_index: HashMap<Sym, usize> =
        (0..g.rules.len()).map(|r| (rule_symbol(r), r)).collect();
    let root = Position::root().child(1);
    if !storage.nodes().contains_key(&root) {
        return Err(ExtractError::EmptyStack);
    }
    let tree = extract_at(g, storage, &root, &rule_index)?;
    let complete = is_complete(g, &tree);
    Ok(ExtractedDerivation { tree, complete })
}

fn extract_at(
    g: &Pmcfg,
    storage: &TreeStack,
    position: &Position,
    rule_index: &HashMap<Sym, usize>,
) -> Result<RuleTree, ExtractError> {
    let symbol = &storage.nodes()[position];
    let Some(&rule) = rule_index.get(symbol) else {
        return Err(ExtractError::NonRuleSymbol {
            position: position.clone(),
            symbol: symbol.clone(),
        });
    };
    let mut children = BTreeMap::new();
    let max_index = g.rules[rule].rhs.len() as u32;
    for idx in 1..=max_index {
        let child_pos = position.child(idx);
        if storage.nodes().contains_key(&child_pos) {
            children.insert(idx, extract_at(g, storage, &child_pos, rule_index)?);
        }
    }
    Ok(RuleTree { rule, children })
}

fn is_complete(g: &Pmcfg, tree: &RuleTree) -> bool {
    let rule = &g.rules[tree.rule];
    if tree.children.len() != rule.rhs.len() {
        return false;
    }
    (1..=rule.rhs.len() as u32).all(|idx| match tree.children.get(&idx) {
        Some(child) => {
            g.rules[child.rule].lhs == rule.rhs[idx as usize - 1] && is_complete(g, child)
        }
        None => false,
    })
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DiagnosticError {
    #[error("run does not replay: {0}")]
    Replay(#[from] ReplayError),
    #[error("accepting run does not start with an init transition")]
    MissingInit,
    #[error("accepting run does not end with a suspend transition to the start")]
    MissingFinalSuspend,
    #[error("position {position} was visited under two different rules")]
    RuleChanged { position: Position },
}

/// Replay-time sanity checks on an accepting run of a compiled automaton:
/// the run starts with `init` and ends with the closing `suspend`, both
/// reading ε, and at every stack position the plain states observed while
/// the pointer rests there all carry one and the same rule.
///
/// The empty run (the initial state is final, so it accepts ε) satisfies
/// everything vacuously.
pub fn check_run_diagnostics(
    ca: &CompiledAutomaton,
    word: &[Sym],
    run: &[usize],
) -> Result<(), DiagnosticError> {
    let trace = replay(&ca.tsa, word, run)?;
    if run.is_empty() {
        return Ok(());
    }
    match run.first().map(|&i| &ca.labels[i]) {
        Some(TransitionLabel::Init { .. }) => {}
        _ => return Err(DiagnosticError::MissingInit),
    }
    match run.last().map(|&i| &ca.labels[i]) {
        Some(TransitionLabel::Suspend2 {
            ret: ReturnTo::Start,
        }) => {}
        _ => return Err(DiagnosticError::MissingFinalSuspend),
    }
    let mut rule_at: BTreeMap<Position, usize> = BTreeMap::new();
    for config in &trace {
        if config.storage.pointer().is_root() {
            continue;
        }
        if let Some(rule) = ca.rule_of_plain_state(&config.state) {
            let position = config.storage.pointer().clone();
            match rule_at.insert(position.clone(), rule) {
                Some(previous) if previous != rule => {
                    return Err(DiagnosticError::RuleChanged { position });
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Builds the canonical accepting run of the compiled automaton for a
/// derivation, by structural recursion over the derivation: one `read` per
/// terminal, `call`+`suspend` around the first use of a child node,
/// `resume`+`suspend` around later uses. First use is in global traversal
/// order, not by component number: a composition may well use `x1.2` before
/// `x1.1`, and the first entry into the child node pushes it either way.
/// Useful as an oracle: the returned run replays and recognises the derived
/// word, independently of any search.
pub fn derivation_to_run(
    ca: &CompiledAutomaton,
    g: &Pmcfg,
    d: &Derivation,
) -> Option<(Word, Run)> {
    let mut labels = Vec::new();
    labels.push(TransitionLabel::Init { rule: d.rule });
    let mut called: HashMap<Vec<usize>, std::collections::BTreeSet<usize>> = HashMap::new();
    traverse(g, d, 1, &mut Vec::new(), &mut called, &mut labels)?;
    labels.push(TransitionLabel::Suspend1 {
        callee: d.rule,
        comp: 1,
        ret: ReturnTo::Start,
    });
    labels.push(TransitionLabel::Suspend2 {
        ret: ReturnTo::Start,
    });
    let run: Option<Run> = labels.iter().map(|l| ca.find(l)).collect();
    let word = crate::grammar::evaluate_derivation(g, d).ok()?.swap_remove(0);
    Some((word, run?))
}

fn traverse(
    g: &Pmcfg,
    d: &Derivation,
    comp: usize,
    path: &mut Vec<usize>,
    called: &mut HashMap<Vec<usize>, std::collections::BTreeSet<usize>>,
    labels: &mut Vec<TransitionLabel>,
) -> Option<()> {
    let rule = &g.rules[d.rule];
    for (j, item) in rule.comp.components.get(comp - 1)?.iter().enumerate() {
        match item {
            Item::Terminal(_) => labels.push(TransitionLabel::Read {
                rule: d.rule,
                comp,
                item: j + 1,
            }),
            Item::Var(var) => {
                let child = d.children.get(var.arg_index - 1)?;
                let ret = ReturnTo::Pos {
                    rule: d.rule,
                    comp,
                    item: j + 1,
                };
                let first_use = called
                    .entry(path.clone())
                    .or_default()
                    .insert(var.arg_index);
                if first_use {
                    labels.push(TransitionLabel::Call {
                        rule: d.rule,
                        comp,
                        item: j + 1,
                        callee: child.rule,
                    });
                } else {
                    labels.push(TransitionLabel::Resume1 {
                        rule: d.rule,
                        comp,
                        item: j + 1,
                    });
                    labels.push(TransitionLabel::Resume2 {
                        rule: d.rule,
                        comp,
                        item: j + 1,
                        callee: child.rule,
                    });
                }
                path.push(var.arg_index);
                traverse(g, child, var.comp_index, path, called, labels)?;
                path.pop();
                labels.push(TransitionLabel::Suspend1 {
                    callee: child.rule,
                    comp: var.comp_index,
                    ret,
                });
                labels.push(TransitionLabel::Suspend2 { ret });
            }
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{
        check_run_restriction, enumerate_accepting_runs, enumerate_bounded_automaton_language,
        SearchBudget,
    };
    use crate::fixtures;
    use crate::grammar::{enumerate_bounded_language, evaluate_derivation, Composition};
    use crate::sym::char_word;
    use std::collections::BTreeSet;

    fn compiled_fixture() -> CompiledAutomaton {
        grammar_to_automaton(&fixtures::aibjcidj_grammar()).unwrap()
    }

    fn fixture_budget() -> SearchBudget {
        SearchBudget {
            max_steps: 150,
            max_eps_between_reads: 80,
            restriction_k: Some(2),
            max_storage_nodes: None,
        }
    }

    #[test]
    fn compiled_sizes_follow_the_construction() {
        let g = fixtures::aibjcidj_grammar();
        let ca = compiled_fixture();

        // positions ⟨r,i,j⟩: one per rule, component, and item boundary
        let positions: usize = g
            .rules
            .iter()
            .map(|r| r.comp.components.iter().map(|c| c.len() + 1).sum::<usize>())
            .sum();
        assert_eq!(ca.tsa.states.len(), 3 * (positions + 1));
        assert_eq!(ca.tsa.stack_alphabet.len(), 1 + g.rules.len() + positions);

        // transition families, counted directly over the quantifier domains
        let initial_rules = g
            .rules
            .iter()
            .filter(|r| g.initials.contains(&r.lhs))
            .count();
        let reads: usize = g
            .rules
            .iter()
            .flat_map(|r| r.comp.components.iter())
            .flatten()
            .filter(|item| matches!(item, Item::Terminal(_)))
            .count();
        let mut var_family = 0;
        for rule in &g.rules {
            for comp in &rule.comp.components {
                for item in comp {
                    if let Item::Var(v) = item {
                        let callees = g.rules_for(&rule.rhs[v.arg_index - 1]).len();
                        // call + resume₂ + suspend₁ per callee; resume₁ and
                        // suspend₂ once per occurrence
                        var_family += 3 * callees + 2;
                    }
                }
            }
        }
        assert_eq!(
            ca.tsa.transitions.len(),
            3 * initial_rules + reads + var_family
        );
        assert_eq!(ca.tsa.transitions.len(), 71);
    }

    #[test]
    fn replaying_the_bd_run_and_extracting_its_derivation() {
        let g = fixtures::aibjcidj_grammar();
        let ca = compiled_fixture();
        let d = Derivation::new(
            0,
            vec![
                Derivation::leaf(2),
                Derivation::new(3, vec![Derivation::leaf(4)]),
            ],
        );
        let (word, run) = derivation_to_run(&ca, &g, &d).unwrap();
        assert_eq!(word, char_word("bd"));
        assert_eq!(run.len(), 26);

        let trace = replay(&ca.tsa, &word, &run).unwrap();
        let last = trace.last().unwrap();
        assert_eq!(last.state, box_symbol());
        assert!(last.storage.pointer().is_root());
        assert_eq!(
            last.storage.render(),
            "{_(ε,@)_, (1,r1), (11,r3), (12,r4), (121,r5)}"
        );

        check_run_diagnostics(&ca, &word, &run).unwrap();

        let extracted = extract_derivation(&g, &last.storage).unwrap();
        assert!(extracted.complete);
        assert_eq!(extracted.tree.to_derivation(&g), Some(d.clone()));
        assert_eq!(
            evaluate_derivation(&g, &d).unwrap(),
            vec![char_word("bd")]
        );
    }

    #[test]
    fn single_epsilon_rule_accepts_exactly_epsilon() {
        let g = Pmcfg {
            nonterminals: [(Sym::new("S"), 1)].into_iter().collect(),
            terminals: [Sym::new("a")].into_iter().collect(),
            initials: [Sym::new("S")].into_iter().collect(),
            rules: vec![Rule {
                lhs: Sym::new("S"),
                comp: Composition {
                    arg_sorts: vec![],
                    components: vec![vec![]],
                },
                rhs: vec![],
            }],
        };
        let ca = grammar_to_automaton(&g).unwrap();
        let lang = enumerate_bounded_automaton_language(&ca.tsa, 2, &SearchBudget::generous());
        assert!(!lang.truncated);
        assert_eq!(lang.words, [Word::new()].into_iter().collect());
    }

    #[test]
    fn compiled_automata_accept_epsilon_through_the_empty_run() {
        // the start state doubles as the final state, so the empty run
        // accepts ε regardless of the grammar's language
        let g = Pmcfg {
            nonterminals: [(Sym::new("S"), 1)].into_iter().collect(),
            terminals: [Sym::new("a")].into_iter().collect(),
            initials: [Sym::new("S")].into_iter().collect(),
            rules: vec![Rule {
                lhs: Sym::new("S"),
                comp: Composition {
                    arg_sorts: vec![],
                    components: vec![vec![Item::Terminal(Sym::new("a"))]],
                },
                rhs: vec![],
            }],
        };
        let ca = grammar_to_automaton(&g).unwrap();
        let lang = enumerate_bounded_automaton_language(&ca.tsa, 2, &SearchBudget::generous());
        let expected: BTreeSet<Word> = [Word::new(), char_word("a")].into_iter().collect();
        assert_eq!(lang.words, expected);
        assert_eq!(
            enumerate_bounded_language(&g, 2, 4),
            [char_word("a")].into_iter().collect()
        );
    }

    #[test]
    fn deleting_grammars_compile_and_keep_their_words() {
        // S uses only the first component of A; the second is deleted
        let g = Pmcfg {
            nonterminals: [(Sym::new("S"), 1), (Sym::new("A"), 2)].into_iter().collect(),
            terminals: [Sym::new("a"), Sym::new("b")].into_iter().collect(),
            initials: [Sym::new("S")].into_iter().collect(),
            rules: vec![
                Rule {
                    lhs: Sym::new("S"),
                    comp: Composition {
                        arg_sorts: vec![2],
                        components: vec![vec![Item::Var(crate::grammar::Variable::new(1, 1))]],
                    },
                    rhs: vec![Sym::new("A")],
                },
                Rule {
                    lhs: Sym::new("A"),
                    comp: Composition {
                        arg_sorts: vec![],
                        components: vec![
                            vec![Item::Terminal(Sym::new("a"))],
                            vec![Item::Terminal(Sym::new("b"))],
                        ],
                    },
                    rhs: vec![],
                },
            ],
        };
        assert!(!crate::grammar::classify(&g).is_nondeleting);
        let ca = grammar_to_automaton(&g).unwrap();
        let lang = enumerate_bounded_automaton_language(&ca.tsa, 3, &SearchBudget::generous());
        assert!(!lang.truncated);
        let expected: BTreeSet<Word> = [Word::new(), char_word("a")].into_iter().collect();
        assert_eq!(lang.words, expected);
    }

    #[test]
    fn copying_grammars_compile_and_square_their_words() {
        // non-linear: the single argument component is used twice
        let g = Pmcfg {
            nonterminals: [(Sym::new("S"), 1), (Sym::new("A"), 1)].into_iter().collect(),
            terminals: [Sym::new("a")].into_iter().collect(),
            initials: [Sym::new("S")].into_iter().collect(),
            rules: vec![
                Rule {
                    lhs: Sym::new("S"),
                    comp: Composition {
                        arg_sorts: vec![1],
                        components: vec![vec![
                            Item::Var(crate::grammar::Variable::new(1, 1)),
                            Item::Var(crate::grammar::Variable::new(1, 1)),
                        ]],
                    },
                    rhs: vec![Sym::new("A")],
                },
                Rule {
                    lhs: Sym::new("A"),
                    comp: Composition {
                        arg_sorts: vec![],
                        components: vec![vec![]],
                    },
                    rhs: vec![],
                },
                Rule {
                    lhs: Sym::new("A"),
                    comp: Composition {
                        arg_sorts: vec![],
                        components: vec![vec![Item::Terminal(Sym::new("a"))]],
                    },
                    rhs: vec![],
                },
            ],
        };
        assert_eq!(restriction_bound(&g), None);
        let ca = grammar_to_automaton(&g).unwrap();
        // no counter prune available; a storage cap keeps the search finite
        let budget = SearchBudget {
            max_steps: 60,
            max_eps_between_reads: 40,
            restriction_k: None,
            max_storage_nodes: Some(3),
        };
        let lang = enumerate_bounded_automaton_language(&ca.tsa, 4, &budget);
        let expected: BTreeSet<Word> = [Word::new(), char_word("aa")].into_iter().collect();
        assert_eq!(lang.words, expected);
    }

    #[test]
    fn restriction_bound_follows_linearity_and_fan_out() {
        assert_eq!(restriction_bound(&fixtures::aibjcidj_grammar()), Some(2));

        let mut copying = fixtures::aibjcidj_grammar();
        copying.rules[0].comp.components[0] = vec![
            Item::Var(crate::grammar::Variable::new(1, 1)),
            Item::Var(crate::grammar::Variable::new(1, 1)),
        ];
        assert_eq!(restriction_bound(&copying), None);

        let cfg = Pmcfg {
            nonterminals: [(Sym::new("S"), 1)].into_iter().collect(),
            terminals: [Sym::new("a")].into_iter().collect(),
            initials: [Sym::new("S")].into_iter().collect(),
            rules: vec![Rule {
                lhs: Sym::new("S"),
                comp: Composition {
                    arg_sorts: vec![],
                    components: vec![vec![Item::Terminal(Sym::new("a"))]],
                },
                rhs: vec![],
            }],
        };
        assert_eq!(restriction_bound(&cfg), Some(1));
    }

    #[test]
    fn extraction_of_a_single_node_storage() {
        let g = fixtures::aibjcidj_grammar();
        let storage = TreeStack::initial()
            .apply(&Instruction::Push(1, rule_symbol(2)))
            .unwrap()
            .apply(&Instruction::Down)
            .unwrap();
        let extracted = extract_derivation(&g, &storage).unwrap();
        assert_eq!(extracted.tree.rule, 2);
        assert!(extracted.complete);
        assert_eq!(extracted.node_count(), 1);
    }

    #[test]
    fn extraction_rejects_non_rule_symbols() {
        let g = fixtures::aibjcidj_grammar();
        let storage = TreeStack::initial()
            .apply(&Instruction::Push(1, position_symbol(0, 1, 2)))
            .unwrap();
        assert!(matches!(
            extract_derivation(&g, &storage),
            Err(ExtractError::NonRuleSymbol { .. })
        ));
    }

    #[test]
    fn bounded_languages_of_grammar_and_automaton_agree() {
        let g = fixtures::aibjcidj_grammar();
        let ca = compiled_fixture();
        let grammar_side = enumerate_bounded_language(&g, 6, 12);
        let automaton_side =
            enumerate_bounded_automaton_language(&ca.tsa, 6, &fixture_budget());
        assert!(!automaton_side.truncated);
        assert_eq!(grammar_side, automaton_side.words);
        assert_eq!(grammar_side, fixtures::aibjcidj_words(6, 0));
    }

    #[test]
    fn accepting_runs_respect_the_restriction_bound_and_diagnostics() {
        let g = fixtures::aibjcidj_grammar();
        let ca = compiled_fixture();
        let k = restriction_bound(&g).unwrap();
        let found = enumerate_accepting_runs(&ca.tsa, 4, &fixture_budget());
        assert!(!found.runs.is_empty());
        for (word, run) in &found.runs {
            assert!(check_run_restriction(&ca.tsa, word, run, k).unwrap());
            check_run_diagnostics(&ca, word, run).unwrap();
        }
    }
}
