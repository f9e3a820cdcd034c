//! Parallel multiple context-free grammars.
//!
//! A PMCFG rule `A → f(A₁, …, A_ℓ)` rewrites a tuple of argument string
//! tuples into one string tuple via a *composition function* `f`: a template
//! of components over terminals and variables `x_i.j` (component `j` of
//! argument `i`). Every nonterminal has a *sort* (fan-out), the number of
//! string components it derives. A PMCFG whose composition functions never
//! use a variable twice is an MCFG; a `k`-MCFG additionally has fan-out at
//! most `k` in every rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::sym::{Sym, Word};

/// A variable `x_i.j`: component `j` of rule argument `i` (both 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub arg_index: usize,
    pub comp_index: usize,
}

impl Variable {
    pub fn new(arg_index: usize, comp_index: usize) -> Self {
        Variable {
            arg_index,
            comp_index,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "x{}.{}", self.arg_index, self.comp_index)
    }
}

/// One item of a composition component: a terminal or a variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Terminal(Sym),
    Var(Variable),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Item::Terminal(t) => write!(f, "{t}"),
            Item::Var(v) => write!(f, "{v}"),
        }
    }
}

/// A composition function `[u₁, …, u_s]` of sort `(s₁⋯s_ℓ, s)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    /// The sorts `s₁ … s_ℓ` of the arguments.
    pub arg_sorts: Vec<usize>,
    /// The components `u₁ … u_s`; the fan-out is their number.
    pub components: Vec<Vec<Item>>,
}

impl Composition {
    pub fn fan_out(&self) -> usize {
        self.components.len()
    }

    pub fn rank(&self) -> usize {
        self.arg_sorts.len()
    }

    fn variable_occurrences(&self) -> BTreeMap<Variable, usize> {
        let mut occ = BTreeMap::new();
        for comp in &self.components {
            for item in comp {
                if let Item::Var(v) = item {
                    *occ.entry(*v).or_insert(0) += 1;
                }
            }
        }
        occ
    }

    /// Linear: no variable occurs more than once across all components.
    pub fn is_linear(&self) -> bool {
        self.variable_occurrences().values().all(|&n| n <= 1)
    }

    /// Non-deleting: every variable admitted by the sort occurs at least once.
    pub fn is_nondeleting(&self) -> bool {
        let occ = self.variable_occurrences();
        self.arg_sorts.iter().enumerate().all(|(i, &s)| {
            (1..=s).all(|j| occ.contains_key(&Variable::new(i + 1, j)))
        })
    }

    /// Applies the composition function to argument tuples.
    ///
    /// Returns `None` if an argument tuple is missing or too short for some
    /// variable; a validated grammar never triggers this.
    pub fn apply(&self, args: &[Vec<Word>]) -> Option<Vec<Word>> {
        if args.len() != self.arg_sorts.len() {
            return None;
        }
        let mut out = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let mut w = Word::new();
            for item in comp {
                match item {
                    Item::Terminal(t) => w.push(t.clone()),
                    Item::Var(v) => {
                        let arg = args.get(v.arg_index - 1)?;
                        let piece = arg.get(v.comp_index - 1)?;
                        w.extend(piece.iter().cloned());
                    }
                }
            }
            out.push(w);
        }
        Some(out)
    }
}

/// A rule `A → f(A₁, …, A_ℓ)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub lhs: Sym,
    pub comp: Composition,
    pub rhs: Vec<Sym>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let comps: Vec<String> = self
            .comp
            .components
            .iter()
            .map(|c| {
                if c.is_empty() {
                    "ε".to_string()
                } else {
                    c.iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                }
            })
            .collect();
        let rhs: Vec<String> = self.rhs.iter().map(|n| n.to_string()).collect();
        write!(f, "{} → [{}]({})", self.lhs, comps.join(", "), rhs.join(", "))
    }
}

/// A parallel multiple context-free grammar.
///
/// Sorts are stored explicitly per nonterminal; they are data, not something
/// recomputed from the rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pmcfg {
    pub nonterminals: BTreeMap<Sym, usize>,
    pub terminals: BTreeSet<Sym>,
    pub initials: BTreeSet<Sym>,
    pub rules: Vec<Rule>,
}

impl Pmcfg {
    pub fn sort_of(&self, nt: &Sym) -> Option<usize> {
        self.nonterminals.get(nt).copied()
    }

    /// Indices of the rules with the given left-hand side, in rule order.
    pub fn rules_for(&self, nt: &Sym) -> Vec<usize> {
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| &r.lhs == nt)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A rule-labelled derivation tree; nodes refer to rules by index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Derivation {
    pub rule: usize,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn new(rule: usize, children: Vec<Derivation>) -> Self {
        Derivation { rule, children }
    }

    pub fn leaf(rule: usize) -> Self {
        Derivation {
            rule,
            children: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Derivation::node_count).sum::<usize>()
    }
}

/// A well-formedness violation found by [`validate_grammar`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// The offending rule index, if the violation is tied to a rule.
    pub rule: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self.rule {
            Some(i) => write!(f, "rule {}: {}", i + 1, self.message),
            None => write!(f, "grammar: {}", self.message),
        }
    }
}

/// Checks all structural invariants of a grammar; an empty report means the
/// grammar is well formed.
pub fn validate_grammar(g: &Pmcfg) -> Vec<Violation> {
    let mut out = Vec::new();
    let grammar_violation = |msg: String| Violation {
        rule: None,
        message: msg,
    };

    for (nt, &sort) in &g.nonterminals {
        if sort == 0 {
            out.push(grammar_violation(format!("nonterminal {nt} has sort 0")));
        }
    }
    for init in &g.initials {
        match g.sort_of(init) {
            None => out.push(grammar_violation(format!("initial {init} is undeclared"))),
            Some(1) => {}
            Some(s) => out.push(grammar_violation(format!(
                "initial not in N₁: {init} has sort {s}"
            ))),
        }
    }

    for (idx, rule) in g.rules.iter().enumerate() {
        let violation = |msg: String| Violation {
            rule: Some(idx),
            message: msg,
        };
        match g.sort_of(&rule.lhs) {
            None => out.push(violation(format!("lhs {} is undeclared", rule.lhs))),
            Some(s) if s != rule.comp.fan_out() => out.push(violation(format!(
                "lhs sort {} does not match fan-out {}",
                s,
                rule.comp.fan_out()
            ))),
            _ => {}
        }
        if rule.comp.fan_out() == 0 {
            out.push(violation("fan-out must be positive".to_string()));
        }
        if rule.rhs.len() != rule.comp.arg_sorts.len() {
            out.push(violation(format!(
                "rhs length {} does not match argument count {}",
                rule.rhs.len(),
                rule.comp.arg_sorts.len()
            )));
        }
        for (i, nt) in rule.rhs.iter().enumerate() {
            match g.sort_of(nt) {
                None => out.push(violation(format!("rhs nonterminal {nt} is undeclared"))),
                Some(s) => {
                    if let Some(&expected) = rule.comp.arg_sorts.get(i) {
                        if s != expected {
                            out.push(violation(format!(
                                "rhs nonterminal {nt} has sort {s}, argument {} expects {expected}",
                                i + 1
                            )));
                        }
                    }
                }
            }
        }
        for comp in &rule.comp.components {
            for item in comp {
                match item {
                    Item::Terminal(t) => {
                        if !g.terminals.contains(t) {
                            out.push(violation(format!("terminal {t} is undeclared")));
                        }
                    }
                    Item::Var(v) => {
                        if v.arg_index == 0 || v.comp_index == 0 {
                            out.push(violation(format!("variable {v} has a zero index")));
                        } else if v.arg_index > rule.comp.arg_sorts.len()
                            || v.comp_index > rule.comp.arg_sorts[v.arg_index - 1]
                        {
                            out.push(violation(format!("variable index out of range: {v}")));
                        }
                    }
                }
            }
        }
    }
    out
}

/// The linearity/deletion classification and the fan-out of a grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    /// True iff every composition function is linear.
    pub is_mcfg: bool,
    /// True iff every composition function uses each admissible variable.
    pub is_nondeleting: bool,
    /// The maximal rule fan-out (0 for a grammar without rules).
    pub fan_out: usize,
}

pub fn classify(g: &Pmcfg) -> Classification {
    Classification {
        is_mcfg: g.rules.iter().all(|r| r.comp.is_linear()),
        is_nondeleting: g.rules.iter().all(|r| r.comp.is_nondeleting()),
        fan_out: g.rules.iter().map(|r| r.comp.fan_out()).max().unwrap_or(0),
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("derivation refers to rule index {0} outside the grammar")]
    RuleIndex(usize),
    #[error("rule {rule} expects {expected} children, derivation node has {found}")]
    Arity {
        rule: usize,
        expected: usize,
        found: usize,
    },
    #[error("child {child} of a node labelled by rule {rule} derives {found}, expected {expected}")]
    SortMismatch {
        rule: usize,
        child: usize,
        expected: Sym,
        found: Sym,
    },
    #[error("composition of rule {0} refers to a missing argument component")]
    BadComposition(usize),
}

/// Evaluates a derivation bottom-up to the tuple of strings it generates.
pub fn evaluate_derivation(g: &Pmcfg, d: &Derivation) -> Result<Vec<Word>, EvalError> {
    let rule = g.rules.get(d.rule).ok_or(EvalError::RuleIndex(d.rule))?;
    if d.children.len() != rule.rhs.len() {
        return Err(EvalError::Arity {
            rule: d.rule,
            expected: rule.rhs.len(),
            found: d.children.len(),
        });
    }
    let mut args = Vec::with_capacity(d.children.len());
    for (i, child) in d.children.iter().enumerate() {
        let child_rule = g.rules.get(child.rule).ok_or(EvalError::RuleIndex(child.rule))?;
        if child_rule.lhs != rule.rhs[i] {
            return Err(EvalError::SortMismatch {
                rule: d.rule,
                child: i + 1,
                expected: rule.rhs[i].clone(),
                found: child_rule.lhs.clone(),
            });
        }
        args.push(evaluate_derivation(g, child)?);
    }
    rule.comp
        .apply(&args)
        .ok_or(EvalError::BadComposition(d.rule))
}

/// Enumerates `{ ⟦d⟧ : d complete, ≤ max_nodes nodes, |⟦d⟧| ≤ max_len }`.
///
/// This is a sound under-approximation of `L(G) ∩ Σ^{≤max_len}`: exact once
/// `max_nodes` dominates the minimal derivation size of every such word.
/// Grammars with ε-generating cycles admit words whose derivations can be
/// arbitrarily large, so no finite node budget is exact for every grammar;
/// pick the budget per use.
///
/// The enumeration is monotone in both budgets.
pub fn enumerate_bounded_language(g: &Pmcfg, max_len: usize, max_nodes: usize) -> BTreeSet<Word> {
    let by_count = bounded_tuples(g, max_len, max_nodes);
    let mut out = BTreeSet::new();
    for init in &g.initials {
        if let Some(per_count) = by_count.get(init) {
            for tuples in per_count {
                for tuple in tuples {
                    if tuple.len() == 1 && tuple[0].len() <= max_len {
                        out.insert(tuple[0].clone());
                    }
                }
            }
        }
    }
    out
}

type Tuple = Vec<Word>;

/// For every nonterminal, the distinct tuples derivable with exactly
/// `n` nodes, indexed by `n - 1`.
fn bounded_tuples(
    g: &Pmcfg,
    max_len: usize,
    max_nodes: usize,
) -> BTreeMap<Sym, Vec<BTreeSet<Tuple>>> {
    let mut by_count: BTreeMap<Sym, Vec<BTreeSet<Tuple>>> = g
        .nonterminals
        .keys()
        .map(|nt| (nt.clone(), vec![BTreeSet::new(); max_nodes]))
        .collect();
    if max_nodes == 0 {
        return by_count;
    }
    // In a non-deleting grammar every component of every subderivation is
    // embedded in the final word, so tuples whose total length exceeds
    // max_len can be dropped without losing any word.
    let prune_len = if classify(g).is_nondeleting {
        Some(max_len)
    } else {
        None
    };
    let keep = |tuple: &Tuple| match prune_len {
        Some(limit) => tuple.iter().map(Word::len).sum::<usize>() <= limit,
        None => true,
    };

    for n in 1..=max_nodes {
        for rule in &g.rules {
            if !g.nonterminals.contains_key(&rule.lhs) {
                continue;
            }
            let rank = rule.rhs.len();
            if rank == 0 {
                if n == 1 {
                    if let Some(tuple) = rule.comp.apply(&[]) {
                        if keep(&tuple) {
                            by_count.get_mut(&rule.lhs).unwrap()[n - 1].insert(tuple);
                        }
                    }
                }
                continue;
            }
            if n < rank + 1 {
                continue;
            }
            let mut results: Vec<Tuple> = Vec::new();
            let mut chosen: Vec<Tuple> = Vec::new();
            split_children(rule, &by_count, 0, n - 1, &mut chosen, &mut results);
            let slot = &mut by_count.get_mut(&rule.lhs).unwrap()[n - 1];
            for tuple in results {
                if keep(&tuple) {
                    slot.insert(tuple);
                }
            }
        }
    }
    by_count
}

/// Enumerates assignments of node counts to the children of `rule` summing
/// to `budget` with every child getting at least one node, applying the
/// composition function for each combination of child tuples.
fn split_children(
    rule: &Rule,
    by_count: &BTreeMap<Sym, Vec<BTreeSet<Tuple>>>,
    child: usize,
    budget: usize,
    chosen: &mut Vec<Tuple>,
    results: &mut Vec<Tuple>,
) {
    let rank = rule.rhs.len();
    if child == rank {
        if budget == 0 {
            if let Some(tuple) = rule.comp.apply(chosen) {
                results.push(tuple);
            }
        }
        return;
    }
    let remaining_children = rank - child - 1;
    let Some(per_count) = by_count.get(&rule.rhs[child]) else {
        return;
    };
    for n_child in 1..=budget.saturating_sub(remaining_children) {
        for tuple in &per_count[n_child - 1] {
            chosen.push(tuple.clone());
            split_children(rule, by_count, child + 1, budget - n_child, chosen, results);
            chosen.pop();
        }
    }
}

/// The least fixpoint of "some rule for A has only productive arguments".
pub fn productive_nonterminals(g: &Pmcfg) -> BTreeSet<Sym> {
    let mut productive: BTreeSet<Sym> = BTreeSet::new();
    loop {
        let mut changed = false;
        for rule in &g.rules {
            if productive.contains(&rule.lhs) {
                continue;
            }
            if rule.rhs.iter().all(|nt| productive.contains(nt)) {
                productive.insert(rule.lhs.clone());
                changed = true;
            }
        }
        if !changed {
            return productive;
        }
    }
}

/// Drops every rule that mentions an unproductive nonterminal. The declared
/// nonterminals, terminals and initials are kept; the language is unchanged.
pub fn restrict_to_productive(g: &Pmcfg) -> Pmcfg {
    let productive = productive_nonterminals(g);
    Pmcfg {
        nonterminals: g.nonterminals.clone(),
        terminals: g.terminals.clone(),
        initials: g.initials.clone(),
        rules: g
            .rules
            .iter()
            .filter(|r| {
                productive.contains(&r.lhs) && r.rhs.iter().all(|nt| productive.contains(nt))
            })
            .cloned()
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sym::char_word;

    fn sym(s: &str) -> Sym {
        Sym::new(s)
    }

    /// Independent reference evaluator used as an oracle: renders each
    /// component by naive textual substitution, bottom-up.
    fn oracle_eval(g: &Pmcfg, d: &Derivation) -> Vec<String> {
        let rule = &g.rules[d.rule];
        let child_values: Vec<Vec<String>> =
            d.children.iter().map(|c| oracle_eval(g, c)).collect();
        rule.comp
            .components
            .iter()
            .map(|comp| {
                let mut s = String::new();
                for item in comp {
                    match item {
                        Item::Terminal(t) => s.push_str(t.as_str()),
                        Item::Var(v) => {
                            s.push_str(&child_values[v.arg_index - 1][v.comp_index - 1])
                        }
                    }
                }
                s
            })
            .collect()
    }

    #[test]
    fn fixture_grammar_is_well_formed() {
        assert_eq!(validate_grammar(&fixtures::aibjcidj_grammar()), Vec::new());
    }

    #[test]
    fn initial_of_sort_two_is_flagged() {
        let mut g = fixtures::aibjcidj_grammar();
        g.nonterminals.insert(sym("S"), 2);
        let report = validate_grammar(&g);
        assert!(report.iter().any(|v| v.message.contains("initial not in N₁")));
    }

    #[test]
    fn variable_index_out_of_range_is_flagged() {
        let mut g = fixtures::aibjcidj_grammar();
        // x3.1 with only two rhs nonterminals
        g.rules[0].comp.components[0].push(Item::Var(Variable::new(3, 1)));
        let report = validate_grammar(&g);
        assert!(report
            .iter()
            .any(|v| v.message.contains("variable index out of range")));
    }

    #[test]
    fn classify_fixture_grammar() {
        let c = classify(&fixtures::aibjcidj_grammar());
        assert_eq!(
            c,
            Classification {
                is_mcfg: true,
                is_nondeleting: true,
                fan_out: 2
            }
        );
    }

    #[test]
    fn copying_rule_is_not_mcfg() {
        let g = Pmcfg {
            nonterminals: [(sym("S"), 1), (sym("A"), 1)].into_iter().collect(),
            terminals: [sym("a")].into_iter().collect(),
            initials: [sym("S")].into_iter().collect(),
            rules: vec![
                Rule {
                    lhs: sym("S"),
                    comp: Composition {
                        arg_sorts: vec![1],
                        components: vec![vec![
                            Item::Var(Variable::new(1, 1)),
                            Item::Var(Variable::new(1, 1)),
                        ]],
                    },
                    rhs: vec![sym("A")],
                },
                Rule {
                    lhs: sym("A"),
                    comp: Composition {
                        arg_sorts: vec![],
                        components: vec![vec![Item::Terminal(sym("a"))]],
                    },
                    rhs: vec![],
                },
            ],
        };
        assert!(validate_grammar(&g).is_empty());
        let c = classify(&g);
        assert!(!c.is_mcfg);
        assert!(c.is_nondeleting);
    }

    #[test]
    fn deleting_rule_is_flagged_by_classify() {
        let g = Pmcfg {
            nonterminals: [(sym("S"), 1), (sym("A"), 1)].into_iter().collect(),
            terminals: BTreeSet::new(),
            initials: [sym("S")].into_iter().collect(),
            rules: vec![
                Rule {
                    lhs: sym("S"),
                    comp: Composition {
                        arg_sorts: vec![1],
                        components: vec![vec![]],
                    },
                    rhs: vec![sym("A")],
                },
                Rule {
                    lhs: sym("A"),
                    comp: Composition {
                        arg_sorts: vec![],
                        components: vec![vec![]],
                    },
                    rhs: vec![],
                },
            ],
        };
        let c = classify(&g);
        assert!(c.is_mcfg);
        assert!(!c.is_nondeleting);
    }

    #[test]
    fn evaluation_substitutes_bottom_up() {
        let g = fixtures::aibjcidj_grammar();
        // rules: 0 = S-rule, 1 = A-recursion, 2 = A-base, 3 = B-recursion, 4 = B-base
        let d = Derivation::new(
            0,
            vec![
                Derivation::leaf(2),
                Derivation::new(3, vec![Derivation::leaf(4)]),
            ],
        );
        let value = evaluate_derivation(&g, &d).unwrap();
        assert_eq!(value, vec![char_word("bd")]);
        assert_eq!(oracle_eval(&g, &d), vec!["bd".to_string()]);
    }

    #[test]
    fn evaluating_a_base_rule_yields_the_empty_pair() {
        let g = fixtures::aibjcidj_grammar();
        let value = evaluate_derivation(&g, &Derivation::leaf(2)).unwrap();
        assert_eq!(value, vec![Word::new(), Word::new()]);
    }

    #[test]
    fn evaluation_substitutes_per_component() {
        let g = fixtures::aibjcidj_grammar();
        let d = Derivation::new(
            0,
            vec![
                Derivation::new(1, vec![Derivation::leaf(2)]),
                Derivation::leaf(4),
            ],
        );
        let value = evaluate_derivation(&g, &d).unwrap();
        assert_eq!(value, vec![char_word("ac")]);
        assert_eq!(oracle_eval(&g, &d), vec!["ac".to_string()]);
    }

    #[test]
    fn evaluation_rejects_sort_mismatch() {
        let g = fixtures::aibjcidj_grammar();
        // B-base in place of an A child
        let d = Derivation::new(0, vec![Derivation::leaf(4), Derivation::leaf(4)]);
        assert!(matches!(
            evaluate_derivation(&g, &d),
            Err(EvalError::SortMismatch { .. })
        ));
    }

    #[test]
    fn bounded_language_of_fixture_grammar() {
        let g = fixtures::aibjcidj_grammar();
        let words = enumerate_bounded_language(&g, 4, 12);
        let expected: BTreeSet<Word> = ["", "ac", "bd", "abcd", "aacc", "bbdd"]
            .iter()
            .map(|w| char_word(w))
            .collect();
        assert_eq!(words, expected);
    }

    #[test]
    fn bounded_language_at_len_zero_is_epsilon_when_derivable() {
        let g = fixtures::aibjcidj_grammar();
        let words = enumerate_bounded_language(&g, 0, 12);
        assert_eq!(words, [Word::new()].into_iter().collect());
    }

    #[test]
    fn bounded_language_without_initial_rules_is_empty() {
        let g = Pmcfg {
            nonterminals: [(sym("S"), 1)].into_iter().collect(),
            terminals: BTreeSet::new(),
            initials: [sym("S")].into_iter().collect(),
            rules: vec![],
        };
        assert!(enumerate_bounded_language(&g, 5, 5).is_empty());
    }

    #[test]
    fn productivity_of_fixture_grammar() {
        let g = fixtures::aibjcidj_grammar();
        let productive = productive_nonterminals(&g);
        let expected: BTreeSet<Sym> = [sym("S"), sym("A"), sym("B")].into_iter().collect();
        assert_eq!(productive, expected);
    }

    #[test]
    fn self_recursive_nonterminal_is_unproductive() {
        let g = Pmcfg {
            nonterminals: [(sym("S"), 1)].into_iter().collect(),
            terminals: BTreeSet::new(),
            initials: [sym("S")].into_iter().collect(),
            rules: vec![Rule {
                lhs: sym("S"),
                comp: Composition {
                    arg_sorts: vec![1],
                    components: vec![vec![Item::Var(Variable::new(1, 1))]],
                },
                rhs: vec![sym("S")],
            }],
        };
        assert!(productive_nonterminals(&g).is_empty());
        assert!(restrict_to_productive(&g).rules.is_empty());
    }

    #[test]
    fn rank_zero_rule_makes_lhs_productive() {
        let g = Pmcfg {
            nonterminals: [(sym("S"), 1)].into_iter().collect(),
            terminals: BTreeSet::new(),
            initials: [sym("S")].into_iter().collect(),
            rules: vec![Rule {
                lhs: sym("S"),
                comp: Composition {
                    arg_sorts: vec![],
                    components: vec![vec![]],
                },
                rhs: vec![],
            }],
        };
        assert_eq!(productive_nonterminals(&g), [sym("S")].into_iter().collect());
    }

    #[test]
    fn restriction_keeps_fully_productive_grammars_intact() {
        let g = fixtures::aibjcidj_grammar();
        assert_eq!(restrict_to_productive(&g), g);
    }

    #[test]
    fn restriction_drops_rules_mentioning_ruleless_nonterminals() {
        let g = Pmcfg {
            nonterminals: [(sym("S"), 1), (sym("T"), 1)].into_iter().collect(),
            terminals: BTreeSet::new(),
            initials: [sym("S")].into_iter().collect(),
            rules: vec![
                Rule {
                    lhs: sym("S"),
                    comp: Composition {
                        arg_sorts: vec![],
                        components: vec![vec![]],
                    },
                    rhs: vec![],
                },
                Rule {
                    lhs: sym("S"),
                    comp: Composition {
                        arg_sorts: vec![1],
                        components: vec![vec![Item::Var(Variable::new(1, 1))]],
                    },
                    rhs: vec![sym("T")],
                },
            ],
        };
        let restricted = restrict_to_productive(&g);
        assert_eq!(restricted.rules.len(), 1);
        assert_eq!(restricted.rules[0].rhs.len(), 0);
        // idempotent
        assert_eq!(restrict_to_productive(&restricted), restricted);
    }

    #[test]
    fn tuple_length_equals_lhs_sort() {
        let g = fixtures::aibjcidj_grammar();
        for (idx, rule) in g.rules.iter().enumerate() {
            if rule.rhs.is_empty() {
                let value = evaluate_derivation(&g, &Derivation::leaf(idx)).unwrap();
                assert_eq!(value.len(), g.sort_of(&rule.lhs).unwrap());
            }
        }
    }
}
