//! Automata with tree stack storage.
//!
//! A transition `(q, ω, p, f, q′)` fires from state `q` when the next input
//! symbol is `ω` (or immediately when `ω = ε`), the storage satisfies the
//! predicate `p`, and the instruction `f` is defined on the storage. A run
//! is a transition sequence replayable from the initial configuration; it is
//! *valid* (accepting) when it ends in a final state having consumed the
//! whole input.
//!
//! Recognition and language enumeration are nondeterministic searches. They
//! are budgeted: tree stack automata in general have no termination
//! guarantee, so the search takes explicit step and ε-progression bounds and
//! reports whether any live branch was cut (`truncated`), keeping "no result
//! within budget" apart from definite rejection.
//!
//! Per-position entry counters are tracked along runs: a position's counter
//! increments whenever a `push` or `up` moves the pointer onto it. An
//! automaton is `k`-restricted when no valid run ever drives a counter above
//! `k`. That property is quantified over all valid runs and is not decided
//! here; it is checked per run and optionally used as a search prune.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::sym::{Sym, Word};
use crate::treestack::{Instruction, Position, Predicate, TreeStack};

/// A transition `(source, read, predicate, instruction, target)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: Sym,
    /// The symbol read from the input; `None` reads ε.
    pub read: Option<Sym>,
    pub predicate: Predicate,
    pub instruction: Instruction,
    pub target: Sym,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let read = match &self.read {
            Some(s) => s.as_str(),
            None => "eps",
        };
        write!(
            f,
            "{} -{}-> {} [{}] {}",
            self.source, read, self.target, self.predicate, self.instruction
        )
    }
}

/// An automaton with tree stack storage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tsa {
    pub states: Vec<Sym>,
    pub stack_alphabet: Vec<Sym>,
    pub terminals: BTreeSet<Sym>,
    pub initial_state: Sym,
    pub transitions: Vec<Transition>,
    pub final_states: BTreeSet<Sym>,
}

impl Tsa {
    /// The configuration `(initial state, {(ε, @)}, word)`.
    pub fn initial_configuration(&self, word: Word) -> Configuration {
        Configuration {
            state: self.initial_state.clone(),
            storage: TreeStack::initial(),
            remaining: word,
        }
    }

    /// Structural well-formedness: declared states and symbols only, no
    /// reserved `@` in the stack alphabet, child indices positive.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let states: BTreeSet<&Sym> = self.states.iter().collect();
        if states.len() != self.states.len() {
            out.push("duplicate state".to_string());
        }
        let alphabet: BTreeSet<&Sym> = self.stack_alphabet.iter().collect();
        if alphabet.len() != self.stack_alphabet.len() {
            out.push("duplicate stack symbol".to_string());
        }
        if alphabet.contains(&crate::treestack::root_symbol()) {
            out.push("stack alphabet contains the reserved root symbol @".to_string());
        }
        if !states.contains(&self.initial_state) {
            out.push(format!("initial state {} is undeclared", self.initial_state));
        }
        for q in &self.final_states {
            if !states.contains(q) {
                out.push(format!("final state {q} is undeclared"));
            }
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let mut complain = |msg: String| out.push(format!("transition {}: {}", i + 1, msg));
            if !states.contains(&t.source) {
                complain(format!("source state {} is undeclared", t.source));
            }
            if !states.contains(&t.target) {
                complain(format!("target state {} is undeclared", t.target));
            }
            if let Some(read) = &t.read {
                if !self.terminals.contains(read) {
                    complain(format!("read symbol {read} is undeclared"));
                }
            }
            match &t.predicate {
                Predicate::Equals(s) if !alphabet.contains(s) => {
                    complain(format!("predicate symbol {s} is undeclared"));
                }
                _ => {}
            }
            match &t.instruction {
                Instruction::Push(n, s) => {
                    if *n == 0 {
                        complain("push child index must be positive".to_string());
                    }
                    if !alphabet.contains(s) {
                        complain(format!("pushed symbol {s} is undeclared"));
                    }
                }
                Instruction::Up(n) if *n == 0 => {
                    complain("up child index must be positive".to_string());
                }
                Instruction::Set(s) if !alphabet.contains(s) => {
                    complain(format!("set symbol {s} is undeclared"));
                }
                _ => {}
            }
        }
        out
    }

    /// The largest child index used by any `push` or `up` instruction.
    pub fn max_child_index(&self) -> u32 {
        self.transitions
            .iter()
            .filter_map(|t| t.instruction.child_index())
            .max()
            .unwrap_or(0)
    }
}

/// A configuration `(state, storage, remaining input)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub state: Sym,
    pub storage: TreeStack,
    pub remaining: Word,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.state,
            self.storage.render(),
            crate::sym::display_word(&self.remaining)
        )
    }
}

/// A run: indices into the automaton's transition sequence.
pub type Run = Vec<usize>;

/// Per-position entry counters; absent positions count 0.
pub type CounterMap = BTreeMap<Position, usize>;

/// Budgets for the nondeterministic searches.
///
/// `max_steps` bounds run length and `max_eps_between_reads` bounds ε-reading
/// progressions, the two ways a TSA search can fail to terminate.
/// `restriction_k` prunes branches whose entry counters exceed `k`; under the
/// caller's assertion that the automaton is `k`-restricted this loses no
/// valid run (counters grow monotonically along a run, so every prefix of a
/// valid run stays within `k`). `max_storage_nodes`, when set, additionally
/// caps the stack size; unlike the other prunes it genuinely narrows the
/// searched language, which is reported via the `truncated` flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_steps: usize,
    pub max_eps_between_reads: usize,
    pub restriction_k: Option<usize>,
    pub max_storage_nodes: Option<usize>,
}

impl SearchBudget {
    pub fn generous() -> Self {
        SearchBudget {
            max_steps: 200,
            max_eps_between_reads: 100,
            restriction_k: None,
            max_storage_nodes: None,
        }
    }

    pub fn with_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_eps(mut self, max_eps: usize) -> Self {
        self.max_eps_between_reads = max_eps;
        self
    }

    pub fn with_restriction(mut self, k: usize) -> Self {
        self.restriction_k = Some(k);
        self
    }

    pub fn with_storage_cap(mut self, nodes: usize) -> Self {
        self.max_storage_nodes = Some(nodes);
        self
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::generous()
    }
}

/// Why a single step does not apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum StepFailure {
    StateMismatch,
    ReadMismatch,
    InputExhausted,
    PredicateFails,
    InstructionUndefined,
}

fn step_detail(c: &Configuration, t: &Transition) -> Result<Configuration, StepFailure> {
    if c.state != t.source {
        return Err(StepFailure::StateMismatch);
    }
    let remaining = match &t.read {
        None => c.remaining.clone(),
        Some(sym) => {
            let Some(first) = c.remaining.first() else {
                return Err(StepFailure::InputExhausted);
            };
            if first != sym {
                return Err(StepFailure::ReadMismatch);
            }
            c.remaining[1..].to_vec()
        }
    };
    if !c.storage.check(&t.predicate) {
        return Err(StepFailure::PredicateFails);
    }
    let storage = c
        .storage
        .apply(&t.instruction)
        .ok_or(StepFailure::InstructionUndefined)?;
    Ok(Configuration {
        state: t.target.clone(),
        storage,
        remaining,
    })
}

/// Applies one transition to a configuration; `None` means inapplicable.
pub fn step(_m: &Tsa, c: &Configuration, t: &Transition) -> Option<Configuration> {
    step_detail(c, t).ok()
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {step} refers to transition index {index} outside the automaton")]
    BadIndex { step: usize, index: usize },
    #[error("step {step} is inapplicable")]
    Inapplicable { step: usize },
    #[error("step {step} reads past the end of the input")]
    InputUnderrun { step: usize },
    #[error("run ends with unread input {0}")]
    LeftoverInput(String),
}

/// Replays a run on a word from the initial configuration, returning the
/// full configuration trace (one entry more than the run length). The word
/// must be consumed exactly.
pub fn replay(m: &Tsa, word: &[Sym], run: &[usize]) -> Result<Vec<Configuration>, ReplayError> {
    let mut trace = vec![m.initial_configuration(word.to_vec())];
    for (i, &index) in run.iter().enumerate() {
        let t = m
            .transitions
            .get(index)
            .ok_or(ReplayError::BadIndex { step: i, index })?;
        match step_detail(trace.last().unwrap(), t) {
            Ok(next) => trace.push(next),
            Err(StepFailure::InputExhausted) => {
                return Err(ReplayError::InputUnderrun { step: i })
            }
            Err(_) => return Err(ReplayError::Inapplicable { step: i }),
        }
    }
    let last = trace.last().unwrap();
    if !last.remaining.is_empty() {
        return Err(ReplayError::LeftoverInput(crate::sym::display_word(
            &last.remaining,
        )));
    }
    Ok(trace)
}

/// The entry-counter map after a whole run: position `ρ` counts the steps
/// whose `push` or `up` instruction moved the pointer onto `ρ`.
///
/// The counting recurrence is defined on valid runs; it extends verbatim to
/// every replayable run, which is what makes it usable as a search prune.
pub fn counters(m: &Tsa, word: &[Sym], run: &[usize]) -> Result<CounterMap, ReplayError> {
    let trace = replay(m, word, run)?;
    let mut map = CounterMap::new();
    for (i, &index) in run.iter().enumerate() {
        if m.transitions[index].instruction.enters_from_below() {
            *map.entry(trace[i + 1].storage.pointer().clone())
                .or_insert(0) += 1;
        }
    }
    Ok(map)
}

/// True iff the run's counters never exceed `k`. Counters only grow along a
/// run, so the final map carries the maxima over all prefixes.
pub fn check_run_restriction(
    m: &Tsa,
    word: &[Sym],
    run: &[usize],
    k: usize,
) -> Result<bool, ReplayError> {
    Ok(counters(m, word, run)?.values().all(|&n| n <= k))
}

/// Outcome of bounded recognition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recognition {
    /// The least accepting run within budget, ordered lexicographically by
    /// transition index (runs revisiting a configuration are never reported;
    /// dropping such a no-progress loop always yields another accepting run).
    Accepted(Run),
    /// The search frontier was exhausted: definitely not accepted.
    Rejected,
    /// No accepting run found, but some live branch was cut by the budget.
    Truncated,
}

impl Recognition {
    pub fn run(&self) -> Option<&Run> {
        match self {
            Recognition::Accepted(run) => Some(run),
            _ => None,
        }
    }
}

/// Bounded recognition: searches for an accepting run on `word`.
pub fn recognize(m: &Tsa, word: &[Sym], budget: &SearchBudget) -> Recognition {
    struct Acceptor {
        word_len: usize,
        found: Option<Run>,
    }
    impl SearchVisitor for Acceptor {
        fn visit(&mut self, cursor: &SearchCursor) -> bool {
            if cursor.is_final && cursor.emitted.len() == self.word_len {
                self.found = Some(cursor.run.to_vec());
                return true;
            }
            false
        }
    }
    let mut acceptor = Acceptor {
        word_len: word.len(),
        found: None,
    };
    let truncated = search(m, budget, Some(word), word.len(), &mut acceptor);
    match acceptor.found {
        Some(run) => Recognition::Accepted(run),
        None if truncated => Recognition::Truncated,
        None => Recognition::Rejected,
    }
}

/// The words of all accepting runs within budget, with the truncation flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedLanguage {
    pub words: BTreeSet<Word>,
    pub truncated: bool,
}

/// Enumerates `{ w : |w| ≤ max_len, some accepting run emits w }` by direct
/// search over runs; exact relative to the budget.
pub fn enumerate_bounded_automaton_language(
    m: &Tsa,
    max_len: usize,
    budget: &SearchBudget,
) -> BoundedLanguage {
    struct Collector {
        words: BTreeSet<Word>,
    }
    impl SearchVisitor for Collector {
        fn visit(&mut self, cursor: &SearchCursor) -> bool {
            if cursor.is_final {
                self.words.insert(cursor.emitted.to_vec());
            }
            false
        }
    }
    let mut collector = Collector {
        words: BTreeSet::new(),
    };
    let truncated = search(m, budget, None, max_len, &mut collector);
    BoundedLanguage {
        words: collector.words,
        truncated,
    }
}

/// All accepting runs within budget, paired with the words they emit, in
/// lexicographic run order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptingRuns {
    pub runs: Vec<(Word, Run)>,
    pub truncated: bool,
}

pub fn enumerate_accepting_runs(m: &Tsa, max_len: usize, budget: &SearchBudget) -> AcceptingRuns {
    struct Collector {
        runs: Vec<(Word, Run)>,
    }
    impl SearchVisitor for Collector {
        fn visit(&mut self, cursor: &SearchCursor) -> bool {
            if cursor.is_final {
                self.runs.push((cursor.emitted.to_vec(), cursor.run.to_vec()));
            }
            false
        }
    }
    let mut collector = Collector { runs: Vec::new() };
    let truncated = search(m, budget, None, max_len, &mut collector);
    AcceptingRuns {
        runs: collector.runs,
        truncated,
    }
}

/// What a [`SearchVisitor`] sees at each reached configuration.
pub(crate) struct SearchCursor<'a> {
    pub storage: &'a TreeStack,
    pub emitted: &'a [Sym],
    pub run: &'a [usize],
    pub is_final: bool,
}

pub(crate) trait SearchVisitor {
    /// Called once per reached configuration, in lexicographic run order.
    /// Returning `true` stops the whole search.
    fn visit(&mut self, cursor: &SearchCursor) -> bool;
}

/// Depth-first search over runs from the initial configuration, in
/// lexicographic order by transition index.
///
/// With `target` set the search is input-directed (reads must match the
/// target word); otherwise it enumerates emissions of length ≤ `max_len`.
/// Returns whether any live branch was cut by `max_steps`,
/// `max_eps_between_reads`, or `max_storage_nodes`. Successors that
/// reproduce a configuration already on the current path are skipped: the
/// loop consumed no input and left the stack unchanged, so every
/// continuation is already explored from the earlier visit at no worse
/// ε- and counter-budgets.
pub(crate) fn search<V: SearchVisitor>(
    m: &Tsa,
    budget: &SearchBudget,
    target: Option<&[Sym]>,
    max_len: usize,
    visitor: &mut V,
) -> bool {
    let mut engine = Engine {
        m,
        budget,
        target,
        max_len,
        visitor,
        truncated: false,
        stopped: false,
    };
    let mut emitted = Vec::new();
    let mut run = Vec::new();
    let mut trail = Vec::new();
    engine.dfs(
        &m.initial_state.clone(),
        &TreeStack::initial(),
        &CounterMap::new(),
        0,
        &mut emitted,
        &mut run,
        &mut trail,
    );
    engine.truncated
}

struct Engine<'a, V: SearchVisitor> {
    m: &'a Tsa,
    budget: &'a SearchBudget,
    target: Option<&'a [Sym]>,
    max_len: usize,
    visitor: &'a mut V,
    truncated: bool,
    stopped: bool,
}

#[allow(clippy::too_many_arguments)]
impl<V: SearchVisitor> Engine<'_, V> {
    /// Whether the read constraint allows taking `t` after `emitted_len` symbols.
    fn read_allowed(&self, t: &Transition, emitted_len: usize) -> bool {
        match &t.read {
            None => true,
            Some(sym) => match self.target {
                Some(word) => word.get(emitted_len) == Some(sym),
                None => emitted_len < self.max_len,
            },
        }
    }

    fn dfs(
        &mut self,
        state: &Sym,
        storage: &TreeStack,
        counters: &CounterMap,
        eps_run: usize,
        emitted: &mut Vec<Sym>,
        run: &mut Vec<usize>,
        trail: &mut Vec<(Sym, TreeStack, usize)>,
    ) {
        let cursor = SearchCursor {
            storage,
            emitted,
            run,
            is_final: self.m.final_states.contains(state),
        };
        if self.visitor.visit(&cursor) {
            self.stopped = true;
            return;
        }
        if run.len() >= self.budget.max_steps {
            let live = self.m.transitions.iter().any(|t| {
                t.source == *state
                    && self.read_allowed(t, emitted.len())
                    && storage.check(&t.predicate)
                    && storage.apply(&t.instruction).is_some()
            });
            if live {
                self.truncated = true;
            }
            return;
        }
        trail.push((state.clone(), storage.clone(), emitted.len()));
        for (index, t) in self.m.transitions.iter().enumerate() {
            if self.stopped {
                break;
            }
            if t.source != *state || !self.read_allowed(t, emitted.len()) {
                continue;
            }
            if !storage.check(&t.predicate) {
                continue;
            }
            let Some(next_storage) = storage.apply(&t.instruction) else {
                continue;
            };
            if let Some(cap) = self.budget.max_storage_nodes {
                if next_storage.len() > cap {
                    self.truncated = true;
                    continue;
                }
            }
            let next_eps = if t.read.is_none() { eps_run + 1 } else { 0 };
            if next_eps > self.budget.max_eps_between_reads {
                self.truncated = true;
                continue;
            }
            let mut next_counters = None;
            if t.instruction.enters_from_below() {
                let mut map = counters.clone();
                let count = map.entry(next_storage.pointer().clone()).or_insert(0);
                *count += 1;
                if let Some(k) = self.budget.restriction_k {
                    if *count > k {
                        continue;
                    }
                }
                next_counters = Some(map);
            }
            let revisits_ancestor = t.read.is_none()
                && !matches!(t.instruction, Instruction::Push(..))
                && trail.iter().any(|(s, st, len)| {
                    *len == emitted.len() && s == &t.target && st == &next_storage
                });
            if revisits_ancestor {
                continue;
            }
            if let Some(sym) = &t.read {
                emitted.push(sym.clone());
            }
            run.push(index);
            self.dfs(
                &t.target,
                &next_storage,
                next_counters.as_ref().unwrap_or(counters),
                next_eps,
                emitted,
                run,
                trail,
            );
            run.pop();
            if t.read.is_some() {
                emitted.pop();
            }
        }
        trail.pop();
    }
}
