//! Compiling a cycle-free, `k`-restricted TSA in stack normal form into an
//! equivalent `k`-MCFG.
//!
//! The key observation: project an accepting run onto one stack node. The
//! pointer visits the node in at most `k` stretches (it is entered from
//! below at most `k` times), and each stretch decomposes into *segments* —
//! a possible arrival from the child region (`down`), a stay part (`id`/
//! `set` at the node), and a possible departure into a child (`push`/`up`).
//! Between two consecutive segments of a stretch the run makes an excursion
//! into one child subtree; that *gap* is exactly a stretch of the child
//! node, one level up.
//!
//! The *run grammar* makes this decomposition generative: a nonterminal
//! `⟨q₁,q̄₁,…,q_s,q̄_s;γ₀,…,γ_s⟩` derives the `s`-tuple of run stretches of a
//! node that is entered in state `qᵢ`, left in state `q̄ᵢ`, and whose symbol
//! evolves `γ₀ → γ₁ → … → γ_s` across the stretches. Rules assemble a
//! node's stretches from segments, with one variable per gap referring to
//! the child nonterminal that derives the child's stretches. Terminals of
//! the run grammar are the automaton's transitions (`τ1`, `τ2`, …); mapping
//! every transition to the symbol it reads turns the run grammar into a
//! grammar for the automaton's language.
//!
//! Cycle-freeness keeps the stay parts finite; stack normal form means the
//! whole accepting run is a single stretch of the root node, giving the
//! start nonterminals `⟨q_i,q;@,@⟩` for final states `q`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::automaton::{Run, SearchBudget, Tsa};
use crate::grammar::{
    restrict_to_productive, Composition, Item, Pmcfg, Rule, Variable,
};
use crate::normalform::{
    cycle_witness, is_stack_normal_form_bounded, remove_cycles, to_stack_normal_form, LoopWitness,
    SnfStatus, StayGraph, StayVertex,
};
use crate::sym::Sym;
use crate::treestack::{root_symbol, Instruction, Predicate};

/// The terminal symbol of the run grammar standing for transition `index`.
pub fn transition_token(index: usize) -> Sym {
    Sym::new(format!("τ{}", index + 1))
}

/// Parses a run-grammar terminal back into a transition index.
pub fn parse_transition_token(sym: &Sym) -> Option<usize> {
    let digits = sym.as_str().strip_prefix("τ")?;
    let n: usize = digits.parse().ok()?;
    (n >= 1).then(|| n - 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentKind {
    /// Stay part followed by a `push` or `up` (a stretch's opening segment).
    Up,
    /// A `down` followed by a stay part (a stretch's closing segment).
    Down,
    /// `down`, stay part, then `push` or `up` (an inner segment).
    DownUp,
    /// Only a stay part (the whole stretch never leaves the node).
    Stay,
}

/// One segment of a node stretch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub kind: SegmentKind,
    pub run: Run,
    /// State on entering the segment (source of its first transition).
    pub entry_state: Sym,
    /// State on leaving the segment (target of its last transition).
    pub exit_state: Sym,
    /// Node symbol when the stay part starts.
    pub parent_from: Sym,
    /// Node symbol after the stay part.
    pub parent_to: Sym,
    /// Symbol the closing `down` expects at the child (`Down`/`DownUp`).
    pub child_from: Option<Sym>,
    /// Symbol at the child on arrival: the pushed symbol for a `push`
    /// ending, a free choice recorded for chaining for an `up` ending.
    pub child_to: Option<Sym>,
    /// Child index of the ending `push`/`up`.
    pub child_index: Option<u32>,
    pub ends_with_push: bool,
}

/// The interface between two consecutive segments: an excursion into child
/// `child_index`, entered in `arrive_state` with symbol `enter_symbol`, left
/// from `leave_state` with symbol `exit_symbol`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gap {
    pub arrive_state: Sym,
    pub leave_state: Sym,
    pub child_index: u32,
    pub enter_symbol: Sym,
    pub exit_symbol: Sym,
    pub by_push: bool,
}

/// An admissible tuple of segments: one stretch of a node, with its gaps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentTuple {
    pub segments: Vec<Segment>,
    pub gaps: Vec<Gap>,
    pub entry_state: Sym,
    pub exit_state: Sym,
    pub sym_from: Sym,
    pub sym_to: Sym,
}

/// A nonterminal of the run grammar: `s` (entry, exit) state pairs and the
/// `s + 1` node symbols before and after each stretch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypedNonterminal {
    pub state_pairs: Vec<(Sym, Sym)>,
    pub symbols: Vec<Sym>,
}

impl TypedNonterminal {
    pub fn fan_out(&self) -> usize {
        self.state_pairs.len()
    }

    pub fn render(&self) -> Sym {
        Sym::new(self.to_string())
    }
}

impl fmt::Display for TypedNonterminal {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let states: Vec<&str> = self
            .state_pairs
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect();
        let symbols: Vec<&str> = self.symbols.iter().map(Sym::as_str).collect();
        write!(f, "⟨{};{}⟩", states.join(","), symbols.join(","))
    }
}

/// An admissible sequence: the stretches of one node across all its visits,
/// the type it gives rise to, and the variable assigned to each gap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentSequence {
    pub tuples: Vec<SegmentTuple>,
    pub lhs: TypedNonterminal,
    pub rhs: Vec<TypedNonterminal>,
    /// Per gap, in left-to-right scan order: the variable `x_φ.ψ` filling it
    /// (`φ` = which rhs nonterminal, `ψ` = which of its components).
    pub gap_vars: Vec<(usize, usize)>,
}

impl SegmentSequence {
    pub fn distinct_children(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Clone, Debug, Error)]
pub enum A2gError {
    #[error("automaton has a stay loop at state {} with symbol {}", .0.state, .0.symbol)]
    NotCycleFree(LoopWitness),
    #[error("automaton accepts away from the root; not in stack normal form")]
    NotStackNormalForm(Run),
    #[error("stay-run enumeration hit a cycle")]
    StayCycle(#[from] crate::normalform::StayCycle),
    #[error("loop removal did not terminate within {0} iterations")]
    CycleRemovalExceeded(usize),
    #[error("restriction bound k must be positive")]
    ZeroBound,
    #[error("run grammar terminal {0} is not a transition of the automaton")]
    UnknownTransition(Sym),
}

/// The stay runs from `(q, γ)` to `(q2, γ2)`: transition sequences of `id`/
/// `set` instructions, including ε when source and target coincide. Finite
/// on cycle-free automata; a reachable stay cycle is reported as an error.
pub fn stay_runs(
    m: &Tsa,
    q: &Sym,
    q2: &Sym,
    sym_from: &Sym,
    sym_to: &Sym,
) -> Result<BTreeSet<Run>, crate::normalform::StayCycle> {
    let graph = StayGraph::build(m);
    let paths = graph.paths_from(&(q.clone(), sym_from.clone()))?;
    Ok(paths
        .into_iter()
        .filter(|(_, end)| end.0 == *q2 && end.1 == *sym_to)
        .map(|(run, _)| run)
        .collect())
}

/// Child symbols a predicate can observe on a non-root node.
fn admitted_child_symbols(m: &Tsa, p: &Predicate) -> Vec<Sym> {
    match p {
        Predicate::True => m.stack_alphabet.clone(),
        Predicate::Equals(s) => vec![s.clone()],
        Predicate::Bottom => Vec::new(),
    }
}

/// Shared enumeration state for one automaton and bound.
struct Analyzer<'m> {
    m: &'m Tsa,
    k: usize,
    /// All stay paths per start vertex, as (run, end vertex).
    paths: HashMap<StayVertex, Vec<(Run, StayVertex)>>,
    ups: Vec<Segment>,
    downs: Vec<Segment>,
    downups: Vec<Segment>,
    tuple_cache: HashMap<(Sym, Sym, Sym, Sym), Vec<SegmentTuple>>,
}

impl<'m> Analyzer<'m> {
    fn new(m: &'m Tsa, k: usize) -> Result<Self, A2gError> {
        if k == 0 {
            return Err(A2gError::ZeroBound);
        }
        let graph = StayGraph::build(m);
        let mut paths = HashMap::new();
        for v in graph.vertices() {
            paths.insert(v.clone(), graph.paths_from(v)?);
        }
        let mut analyzer = Analyzer {
            m,
            k,
            paths,
            ups: Vec::new(),
            downs: Vec::new(),
            downups: Vec::new(),
            tuple_cache: HashMap::new(),
        };
        analyzer.build_segments();
        Ok(analyzer)
    }

    fn parent_symbols(&self) -> Vec<Sym> {
        let mut symbols = vec![root_symbol()];
        symbols.extend(self.m.stack_alphabet.iter().cloned());
        symbols
    }

    fn build_segments(&mut self) {
        // opening segments: stay part, then push or up
        for (start, paths) in &self.paths {
            for (stay, (mid_state, mid_sym)) in paths {
                for (index, t) in self.m.transitions.iter().enumerate() {
                    if t.source != *mid_state || !t.predicate.admits(mid_sym) {
                        continue;
                    }
                    let mut run = stay.clone();
                    run.push(index);
                    match &t.instruction {
                        Instruction::Push(j, pushed) => self.ups.push(Segment {
                            kind: SegmentKind::Up,
                            run,
                            entry_state: start.0.clone(),
                            exit_state: t.target.clone(),
                            parent_from: start.1.clone(),
                            parent_to: mid_sym.clone(),
                            child_from: None,
                            child_to: Some(pushed.clone()),
                            child_index: Some(*j),
                            ends_with_push: true,
                        }),
                        Instruction::Up(j) => {
                            for arrival in &self.m.stack_alphabet {
                                let mut run_up = stay.clone();
                                run_up.push(index);
                                self.ups.push(Segment {
                                    kind: SegmentKind::Up,
                                    run: run_up,
                                    entry_state: start.0.clone(),
                                    exit_state: t.target.clone(),
                                    parent_from: start.1.clone(),
                                    parent_to: mid_sym.clone(),
                                    child_from: None,
                                    child_to: Some(arrival.clone()),
                                    child_index: Some(*j),
                                    ends_with_push: false,
                                });
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        self.ups.sort();
        self.ups.dedup();

        // closing segments: down, then stay part
        let parent_symbols = self.parent_symbols();
        for (index, t) in self.m.transitions.iter().enumerate() {
            if t.instruction != Instruction::Down {
                continue;
            }
            for left_symbol in admitted_child_symbols(self.m, &t.predicate) {
                for parent_sym in &parent_symbols {
                    let start = (t.target.clone(), parent_sym.clone());
                    for (stay, (end_state, end_sym)) in &self.paths[&start] {
                        let mut run = vec![index];
                        run.extend(stay.iter().copied());
                        self.downs.push(Segment {
                            kind: SegmentKind::Down,
                            run,
                            entry_state: t.source.clone(),
                            exit_state: end_state.clone(),
                            parent_from: parent_sym.clone(),
                            parent_to: end_sym.clone(),
                            child_from: Some(left_symbol.clone()),
                            child_to: None,
                            child_index: None,
                            ends_with_push: false,
                        });
                    }
                }
            }
        }
        self.downs.sort();
        self.downs.dedup();

        // inner segments: a down prefix glued onto an opening segment
        for (index, t) in self.m.transitions.iter().enumerate() {
            if t.instruction != Instruction::Down {
                continue;
            }
            for left_symbol in admitted_child_symbols(self.m, &t.predicate) {
                for up in &self.ups {
                    if up.entry_state != t.target {
                        continue;
                    }
                    let mut run = vec![index];
                    run.extend(up.run.iter().copied());
                    self.downups.push(Segment {
                        kind: SegmentKind::DownUp,
                        run,
                        entry_state: t.source.clone(),
                        exit_state: up.exit_state.clone(),
                        parent_from: up.parent_from.clone(),
                        parent_to: up.parent_to.clone(),
                        child_from: Some(left_symbol.clone()),
                        child_to: up.child_to.clone(),
                        child_index: up.child_index,
                        ends_with_push: up.ends_with_push,
                    });
                }
            }
        }
        self.downups.sort();
        self.downups.dedup();
    }

    /// All admissible tuples whose type is `⟨q,q̄;γ,γ̄⟩`, with at most `k`
    /// gaps per child index.
    fn tuples_of_type(&mut self, q: Sym, q2: Sym, sym_from: Sym, sym_to: Sym) -> &[SegmentTuple] {
        let key = (q, q2, sym_from, sym_to);
        if !self.tuple_cache.contains_key(&key) {
            let tuples = self.enumerate_tuples(&key.0, &key.1, &key.2, &key.3);
            self.tuple_cache.insert(key.clone(), tuples);
        }
        &self.tuple_cache[&key]
    }

    fn enumerate_tuples(
        &self,
        q: &Sym,
        q2: &Sym,
        sym_from: &Sym,
        sym_to: &Sym,
    ) -> Vec<SegmentTuple> {
        let mut out = Vec::new();
        // a stretch that never leaves the node
        for (stay, end) in &self.paths[&(q.clone(), sym_from.clone())] {
            if end.0 == *q2 && end.1 == *sym_to {
                out.push(SegmentTuple {
                    segments: vec![Segment {
                        kind: SegmentKind::Stay,
                        run: stay.clone(),
                        entry_state: q.clone(),
                        exit_state: q2.clone(),
                        parent_from: sym_from.clone(),
                        parent_to: sym_to.clone(),
                        child_from: None,
                        child_to: None,
                        child_index: None,
                        ends_with_push: false,
                    }],
                    gaps: Vec::new(),
                    entry_state: q.clone(),
                    exit_state: q2.clone(),
                    sym_from: sym_from.clone(),
                    sym_to: sym_to.clone(),
                });
            }
        }
        // stretches with excursions: opening segment, inner segments, close
        for opening in &self.ups {
            if opening.entry_state != *q || opening.parent_from != *sym_from {
                continue;
            }
            let mut segments = vec![opening.clone()];
            let mut gap_counts = BTreeMap::new();
            self.extend_tuple(q2, sym_to, &mut segments, &mut gap_counts, &mut out);
        }
        out.sort();
        out.dedup();
        out
    }

    fn extend_tuple(
        &self,
        q2: &Sym,
        sym_to: &Sym,
        segments: &mut Vec<Segment>,
        gap_counts: &mut BTreeMap<u32, usize>,
        out: &mut Vec<SegmentTuple>,
    ) {
        let last = segments.last().unwrap().clone();
        let gap_index = last.child_index.unwrap();
        let used = gap_counts.get(&gap_index).copied().unwrap_or(0);
        if used + 1 > self.k {
            return;
        }
        *gap_counts.entry(gap_index).or_insert(0) += 1;
        let current_symbol = last.parent_to.clone();

        for closing in &self.downs {
            if closing.parent_from != current_symbol
                || closing.exit_state != *q2
                || closing.parent_to != *sym_to
            {
                continue;
            }
            segments.push(closing.clone());
            out.push(self.make_tuple(segments));
            segments.pop();
        }
        for inner in &self.downups {
            if inner.parent_from != current_symbol {
                continue;
            }
            segments.push(inner.clone());
            self.extend_tuple(q2, sym_to, segments, gap_counts, out);
            segments.pop();
        }

        *gap_counts.get_mut(&gap_index).unwrap() -= 1;
    }

    fn make_tuple(&self, segments: &[Segment]) -> SegmentTuple {
        let gaps = segments
            .windows(2)
            .map(|w| Gap {
                arrive_state: w[0].exit_state.clone(),
                leave_state: w[1].entry_state.clone(),
                child_index: w[0].child_index.unwrap(),
                enter_symbol: w[0].child_to.clone().unwrap(),
                exit_symbol: w[1].child_from.clone().unwrap(),
                by_push: w[0].ends_with_push,
            })
            .collect();
        let first = segments.first().unwrap();
        let last = segments.last().unwrap();
        SegmentTuple {
            segments: segments.to_vec(),
            gaps,
            entry_state: first.entry_state.clone(),
            exit_state: last.exit_state.clone(),
            sym_from: first.parent_from.clone(),
            sym_to: last.parent_to.clone(),
        }
    }

    /// Checks sequence admissibility and computes the type data: push on
    /// exactly the first entry into each child, chained child symbols, at
    /// most `k` entries per child.
    fn admit_sequence(&self, tuples: &[SegmentTuple]) -> Option<SegmentSequence> {
        let mut order: Vec<u32> = Vec::new();
        let mut gaps_per_child: BTreeMap<u32, Vec<&Gap>> = BTreeMap::new();
        let mut gap_vars = Vec::new();
        for tuple in tuples {
            for gap in &tuple.gaps {
                let child = gap.child_index;
                let phi = match order.iter().position(|&j| j == child) {
                    Some(p) => p + 1,
                    None => {
                        order.push(child);
                        order.len()
                    }
                };
                let entries = gaps_per_child.entry(child).or_default();
                entries.push(gap);
                let psi = entries.len();
                if psi > self.k {
                    return None;
                }
                // a child node is created by push on its first entry and
                // must be re-entered by up afterwards
                if gap.by_push != (psi == 1) {
                    return None;
                }
                gap_vars.push((phi, psi));
            }
        }
        for entries in gaps_per_child.values() {
            for pair in entries.windows(2) {
                if pair[0].exit_symbol != pair[1].enter_symbol {
                    return None;
                }
            }
        }
        let mut symbols = vec![tuples[0].sym_from.clone()];
        symbols.extend(tuples.iter().map(|t| t.sym_to.clone()));
        let lhs = TypedNonterminal {
            state_pairs: tuples
                .iter()
                .map(|t| (t.entry_state.clone(), t.exit_state.clone()))
                .collect(),
            symbols,
        };
        let rhs = order
            .iter()
            .map(|child| {
                let entries = &gaps_per_child[child];
                let mut symbols = vec![entries[0].enter_symbol.clone()];
                symbols.extend(entries.iter().map(|g| g.exit_symbol.clone()));
                TypedNonterminal {
                    state_pairs: entries
                        .iter()
                        .map(|g| (g.arrive_state.clone(), g.leave_state.clone()))
                        .collect(),
                    symbols,
                }
            })
            .collect();
        Some(SegmentSequence {
            tuples: tuples.to_vec(),
            lhs,
            rhs,
            gap_vars,
        })
    }

    /// All admissible sequences of the given type.
    fn sequences_of_type(&mut self, lhs: &TypedNonterminal) -> Vec<SegmentSequence> {
        let s = lhs.fan_out();
        let mut per_visit: Vec<Vec<SegmentTuple>> = Vec::with_capacity(s);
        for i in 0..s {
            let (q, q2) = lhs.state_pairs[i].clone();
            let tuples = self
                .tuples_of_type(q, q2, lhs.symbols[i].clone(), lhs.symbols[i + 1].clone())
                .to_vec();
            if tuples.is_empty() {
                return Vec::new();
            }
            per_visit.push(tuples);
        }
        let mut out = Vec::new();
        let mut chosen: Vec<SegmentTuple> = Vec::with_capacity(s);
        self.combine_visits(&per_visit, 0, &mut chosen, &mut out);
        out
    }

    fn combine_visits(
        &self,
        per_visit: &[Vec<SegmentTuple>],
        visit: usize,
        chosen: &mut Vec<SegmentTuple>,
        out: &mut Vec<SegmentSequence>,
    ) {
        if visit == per_visit.len() {
            if let Some(seq) = self.admit_sequence(chosen) {
                out.push(seq);
            }
            return;
        }
        for tuple in &per_visit[visit] {
            chosen.push(tuple.clone());
            self.combine_visits(per_visit, visit + 1, chosen, out);
            chosen.pop();
        }
    }
}

/// All segments of the three excursion groups, in a canonical order.
pub fn enumerate_segments(m: &Tsa) -> Result<Vec<Segment>, A2gError> {
    if let Some(witness) = cycle_witness(m) {
        return Err(A2gError::NotCycleFree(witness));
    }
    let analyzer = Analyzer::new(m, 1)?;
    let mut out = analyzer.ups;
    out.extend(analyzer.downs);
    out.extend(analyzer.downups);
    Ok(out)
}

/// All admissible tuples with at most `k` gaps per child index, across all
/// types.
pub fn admissible_tuples(m: &Tsa, k: usize) -> Result<Vec<SegmentTuple>, A2gError> {
    if let Some(witness) = cycle_witness(m) {
        return Err(A2gError::NotCycleFree(witness));
    }
    let mut analyzer = Analyzer::new(m, k)?;
    let mut out = Vec::new();
    let symbols = analyzer.parent_symbols();
    for q in m.states.clone() {
        for q2 in m.states.clone() {
            for sym_from in &symbols {
                for sym_to in &symbols {
                    out.extend(
                        analyzer
                            .tuples_of_type(q.clone(), q2.clone(), sym_from.clone(), sym_to.clone())
                            .to_vec(),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// All admissible sequences of at most `k` tuples, across all types.
pub fn admissible_sequences(m: &Tsa, k: usize) -> Result<Vec<SegmentSequence>, A2gError> {
    if let Some(witness) = cycle_witness(m) {
        return Err(A2gError::NotCycleFree(witness));
    }
    let mut analyzer = Analyzer::new(m, k)?;
    let symbols = analyzer.parent_symbols();
    let mut out = Vec::new();
    // all chained type shapes (state pairs are free, symbols must chain)
    type Shape = (Vec<(Sym, Sym)>, Vec<Sym>);
    let mut types: Vec<TypedNonterminal> = Vec::new();
    for s in 1..=k {
        let mut shapes: Vec<Shape> = Vec::new();
        for sym0 in &symbols {
            shapes.push((Vec::new(), vec![sym0.clone()]));
        }
        for _ in 0..s {
            let mut next = Vec::new();
            for (pairs, syms) in shapes {
                for q in &m.states {
                    for q2 in &m.states {
                        for sym in &symbols {
                            let mut pairs = pairs.clone();
                            pairs.push((q.clone(), q2.clone()));
                            let mut syms = syms.clone();
                            syms.push(sym.clone());
                            next.push((pairs, syms));
                        }
                    }
                }
            }
            shapes = next;
        }
        types.extend(shapes.into_iter().map(|(state_pairs, symbols)| {
            TypedNonterminal {
                state_pairs,
                symbols,
            }
        }));
    }
    for t in types {
        out.extend(analyzer.sequences_of_type(&t));
    }
    Ok(out)
}

fn sequence_to_rule(seq: &SegmentSequence) -> Rule {
    let mut components = Vec::with_capacity(seq.tuples.len());
    let mut gap_cursor = 0;
    for tuple in &seq.tuples {
        let mut items = Vec::new();
        for (i, segment) in tuple.segments.iter().enumerate() {
            for &t in &segment.run {
                items.push(Item::Terminal(transition_token(t)));
            }
            if i + 1 < tuple.segments.len() {
                let (phi, psi) = seq.gap_vars[gap_cursor];
                gap_cursor += 1;
                items.push(Item::Var(Variable::new(phi, psi)));
            }
        }
        components.push(items);
    }
    Rule {
        lhs: seq.lhs.render(),
        comp: Composition {
            arg_sorts: seq.rhs.iter().map(TypedNonterminal::fan_out).collect(),
            components,
        },
        rhs: seq.rhs.iter().map(TypedNonterminal::render).collect(),
    }
}

/// Builds the run grammar of a cycle-free `k`-restricted TSA in stack
/// normal form: a `k`-MCFG over the automaton's transitions generating
/// exactly its valid runs. The result is pruned to productive rules
/// reachable from the start nonterminals.
///
/// Cycle-freeness is checked exactly; stack normal form only has a bounded
/// check, which is run at a small budget to catch blatant violations.
pub fn automaton_to_run_grammar(m: &Tsa, k: usize) -> Result<Pmcfg, A2gError> {
    if let Some(witness) = cycle_witness(m) {
        return Err(A2gError::NotCycleFree(witness));
    }
    let snf_budget = SearchBudget {
        max_steps: 60,
        max_eps_between_reads: 40,
        restriction_k: Some(k),
        max_storage_nodes: Some(8),
    };
    if let SnfStatus::Violated(run) = is_stack_normal_form_bounded(m, 4, &snf_budget) {
        return Err(A2gError::NotStackNormalForm(run));
    }
    let mut analyzer = Analyzer::new(m, k)?;

    let initial_types: Vec<TypedNonterminal> = m
        .final_states
        .iter()
        .map(|q| TypedNonterminal {
            state_pairs: vec![(m.initial_state.clone(), q.clone())],
            symbols: vec![root_symbol(), root_symbol()],
        })
        .collect();

    let mut queue: VecDeque<TypedNonterminal> = initial_types.iter().cloned().collect();
    let mut seen: BTreeSet<TypedNonterminal> = queue.iter().cloned().collect();
    let mut rules = Vec::new();
    let mut rule_keys: BTreeSet<Rule> = BTreeSet::new();
    let mut nonterminals: BTreeMap<Sym, usize> = BTreeMap::new();
    for t in &initial_types {
        nonterminals.insert(t.render(), t.fan_out());
    }
    while let Some(lhs) = queue.pop_front() {
        for seq in analyzer.sequences_of_type(&lhs) {
            let rule = sequence_to_rule(&seq);
            if rule_keys.insert(rule.clone()) {
                rules.push(rule);
            }
            for b in &seq.rhs {
                nonterminals.insert(b.render(), b.fan_out());
                if seen.insert(b.clone()) {
                    queue.push_back(b.clone());
                }
            }
        }
    }

    let raw = Pmcfg {
        nonterminals,
        terminals: (0..m.transitions.len()).map(transition_token).collect(),
        initials: initial_types.iter().map(TypedNonterminal::render).collect(),
        rules,
    };
    Ok(prune(&restrict_to_productive(&raw)))
}

/// Keeps only rules whose left-hand side is reachable from the initials,
/// and only nonterminal declarations that still occur.
fn prune(g: &Pmcfg) -> Pmcfg {
    let mut reachable: BTreeSet<Sym> = g.initials.iter().cloned().collect();
    loop {
        let mut changed = false;
        for rule in &g.rules {
            if reachable.contains(&rule.lhs) {
                for nt in &rule.rhs {
                    changed |= reachable.insert(nt.clone());
                }
            }
        }
        if !changed {
            break;
        }
    }
    let rules: Vec<Rule> = g
        .rules
        .iter()
        .filter(|r| reachable.contains(&r.lhs))
        .cloned()
        .collect();
    let mut mentioned: BTreeSet<Sym> = g.initials.iter().cloned().collect();
    for rule in &rules {
        mentioned.insert(rule.lhs.clone());
        mentioned.extend(rule.rhs.iter().cloned());
    }
    Pmcfg {
        nonterminals: g
            .nonterminals
            .iter()
            .filter(|(nt, _)| mentioned.contains(*nt))
            .map(|(nt, &s)| (nt.clone(), s))
            .collect(),
        terminals: g.terminals.clone(),
        initials: g.initials.clone(),
        rules,
    }
}

/// Replaces every transition terminal of a run grammar by the input symbol
/// that transition reads, deleting ε-reading transitions. The substitution
/// is alphabetic, so linearity and fan-out are untouched.
pub fn apply_output_homomorphism(g_runs: &Pmcfg, m: &Tsa) -> Result<Pmcfg, A2gError> {
    let map_item = |item: &Item| -> Result<Option<Item>, A2gError> {
        match item {
            Item::Var(v) => Ok(Some(Item::Var(*v))),
            Item::Terminal(t) => {
                let index = parse_transition_token(t)
                    .filter(|&i| i < m.transitions.len())
                    .ok_or_else(|| A2gError::UnknownTransition(t.clone()))?;
                Ok(m.transitions[index].read.clone().map(Item::Terminal))
            }
        }
    };
    let mut rules = Vec::with_capacity(g_runs.rules.len());
    for rule in &g_runs.rules {
        let mut components = Vec::with_capacity(rule.comp.components.len());
        for comp in &rule.comp.components {
            let mut items = Vec::new();
            for item in comp {
                if let Some(mapped) = map_item(item)? {
                    items.push(mapped);
                }
            }
            components.push(items);
        }
        rules.push(Rule {
            lhs: rule.lhs.clone(),
            comp: Composition {
                arg_sorts: rule.comp.arg_sorts.clone(),
                components,
            },
            rhs: rule.rhs.clone(),
        });
    }
    Ok(Pmcfg {
        nonterminals: g_runs.nonterminals.clone(),
        terminals: m.terminals.clone(),
        initials: g_runs.initials.clone(),
        rules,
    })
}

/// How many loop-removal iterations [`automaton_to_grammar`] attempts.
pub const CYCLE_REMOVAL_CAP: usize = 100;

/// The whole pipeline from an asserted `k`-restricted TSA to a `k`-MCFG:
/// remove stay loops, move to stack normal form, build the run grammar,
/// apply the output homomorphism, and drop unproductive rules.
pub fn automaton_to_grammar(m: &Tsa, k: usize) -> Result<Pmcfg, A2gError> {
    let cycle_free = remove_cycles(m, CYCLE_REMOVAL_CAP)
        .map_err(|e| A2gError::CycleRemovalExceeded(e.iterations))?;
    let normal = to_stack_normal_form(&cycle_free);
    let run_grammar = automaton_to_run_grammar(&normal, k)?;
    let image = apply_output_homomorphism(&run_grammar, &normal)?;
    Ok(restrict_to_productive(&image))
}
