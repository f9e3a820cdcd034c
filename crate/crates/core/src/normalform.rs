//! Normal forms for tree stack automata.
//!
//! *Stay runs* use only `id` and `set` instructions, so the pointer never
//! moves; their behaviour is fully captured by a finite graph over
//! (state, pointer symbol) pairs, the [`StayGraph`]. An automaton is
//! *cycle-free* when no nonempty stay run returns to the same state with the
//! same symbol — equivalently, when the stay graph is acyclic. It is in
//! *stack normal form* when every acceptance happens with the pointer at the
//! root.
//!
//! Both properties can be established by language-preserving constructions:
//! [`remove_cycles`] reroutes each stay loop through freshly pushed scratch
//! nodes (one push per iteration, matched by downs afterwards), and
//! [`to_stack_normal_form`] funnels every final state through a new
//! down-spinning state that accepts only at the root. Neither construction
//! adds `push`/`up` traffic to pre-existing positions, so `k`-restriction is
//! preserved.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::automaton::{search, Run, SearchBudget, SearchCursor, SearchVisitor, Transition, Tsa};
use crate::sym::Sym;
use crate::treestack::{root_symbol, Instruction, Predicate};

/// A vertex of the stay graph: a state paired with the pointer symbol.
pub type StayVertex = (Sym, Sym);

/// The finite graph of stay-run behaviour.
///
/// There is an edge `(q, γ) → (q′, γ′)` labelled by transition `τ` exactly
/// when `τ = (q, ω, p, f, q′)` with `p` admitting `γ` and either `f = id`
/// (then `γ′ = γ`) or `f = set(γ′)` with `γ ≠ @` (no writes at the root).
pub struct StayGraph {
    vertices: Vec<StayVertex>,
    edges: HashMap<StayVertex, Vec<(usize, StayVertex)>>,
}

impl StayGraph {
    pub fn build(m: &Tsa) -> Self {
        let mut symbols = vec![root_symbol()];
        symbols.extend(m.stack_alphabet.iter().cloned());
        let mut vertices = Vec::new();
        for q in &m.states {
            for sym in &symbols {
                vertices.push((q.clone(), sym.clone()));
            }
        }
        let mut edges: HashMap<StayVertex, Vec<(usize, StayVertex)>> = HashMap::new();
        for (q, sym) in &vertices {
            let mut out = Vec::new();
            for (index, t) in m.transitions.iter().enumerate() {
                if t.source != *q || !t.predicate.admits(sym) {
                    continue;
                }
                match &t.instruction {
                    Instruction::Id => out.push((index, (t.target.clone(), sym.clone()))),
                    Instruction::Set(written) if *sym != root_symbol() => {
                        out.push((index, (t.target.clone(), written.clone())));
                    }
                    _ => {}
                }
            }
            edges.insert((q.clone(), sym.clone()), out);
        }
        StayGraph { vertices, edges }
    }

    pub fn vertices(&self) -> &[StayVertex] {
        &self.vertices
    }

    pub fn edges_from(&self, v: &StayVertex) -> &[(usize, StayVertex)] {
        self.edges.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The lexicographically least transition sequence of exact length `len`
    /// leading from `start` back to `start`, if any.
    fn least_cycle_from(&self, start: &StayVertex, len: usize) -> Option<Run> {
        fn dfs(
            graph: &StayGraph,
            start: &StayVertex,
            at: &StayVertex,
            remaining: usize,
            path: &mut Run,
        ) -> bool {
            if remaining == 0 {
                return at == start;
            }
            let mut out: Vec<&(usize, StayVertex)> = graph.edges_from(at).iter().collect();
            out.sort_by_key(|(i, _)| *i);
            for (index, next) in out {
                path.push(*index);
                if dfs(graph, start, next, remaining - 1, path) {
                    return true;
                }
                path.pop();
            }
            false
        }
        let mut path = Run::new();
        dfs(self, start, start, len, &mut path).then_some(path)
    }

    /// A shortest cycle, as (start vertex, transition sequence); ties on
    /// length are broken by lexicographic transition order.
    pub fn shortest_cycle(&self) -> Option<(StayVertex, Run)> {
        let bound = self.vertices.len();
        for len in 1..=bound {
            let mut best: Option<(StayVertex, Run)> = None;
            for v in &self.vertices {
                if let Some(run) = self.least_cycle_from(v, len) {
                    let better = match &best {
                        None => true,
                        Some((_, current)) => run < *current,
                    };
                    if better {
                        best = Some((v.clone(), run));
                    }
                }
            }
            if best.is_some() {
                return best;
            }
        }
        None
    }

    /// All paths from `v`, as (transition sequence, end vertex), the empty
    /// path included. Only meaningful on acyclic graphs; errs on a cycle
    /// reachable from `v`.
    pub fn paths_from(&self, v: &StayVertex) -> Result<Vec<(Run, StayVertex)>, StayCycle> {
        let mut memo: HashMap<StayVertex, Vec<(Run, StayVertex)>> = HashMap::new();
        let mut on_path: BTreeSet<StayVertex> = BTreeSet::new();
        self.paths_rec(v, &mut memo, &mut on_path)?;
        Ok(memo.remove(v).unwrap())
    }

    fn paths_rec(
        &self,
        v: &StayVertex,
        memo: &mut HashMap<StayVertex, Vec<(Run, StayVertex)>>,
        on_path: &mut BTreeSet<StayVertex>,
    ) -> Result<(), StayCycle> {
        if memo.contains_key(v) {
            return Ok(());
        }
        if !on_path.insert(v.clone()) {
            return Err(StayCycle {
                state: v.0.clone(),
                symbol: v.1.clone(),
            });
        }
        let mut paths = vec![(Run::new(), v.clone())];
        for (index, next) in self.edges_from(v).to_vec() {
            if !memo.contains_key(&next) {
                self.paths_rec(&next, memo, on_path)?;
            }
            for (suffix, end) in memo[&next].clone() {
                let mut run = vec![index];
                run.extend(suffix);
                paths.push((run, end));
            }
        }
        on_path.remove(v);
        memo.insert(v.clone(), paths);
        Ok(())
    }
}

/// A stay cycle discovered where none was allowed.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("stay cycle through state {state} with symbol {symbol}")]
pub struct StayCycle {
    pub state: Sym,
    pub symbol: Sym,
}

/// A nonempty stay run returning to the same state and symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopWitness {
    pub state: Sym,
    pub symbol: Sym,
    pub run: Run,
}

/// A shortest stay loop, or `None` when the automaton is cycle-free.
pub fn cycle_witness(m: &Tsa) -> Option<LoopWitness> {
    StayGraph::build(m)
        .shortest_cycle()
        .map(|((state, symbol), run)| LoopWitness { state, symbol, run })
}

pub fn is_cycle_free(m: &Tsa) -> bool {
    cycle_witness(m).is_none()
}

#[derive(Clone, Debug, Error)]
#[error("automaton still has a stay loop after {iterations} removal iterations")]
pub struct RemoveCyclesExceeded {
    pub iterations: usize,
    pub witness: LoopWitness,
    /// The automaton after the performed iterations.
    pub automaton: Box<Tsa>,
}

/// Picks a name based on `base` that does not occur in `taken`, and claims it.
fn fresh(taken: &mut BTreeSet<Sym>, base: &str) -> Sym {
    let mut candidate = Sym::new(base);
    let mut n = 2;
    while taken.contains(&candidate) {
        candidate = Sym::new(format!("{base}{n}"));
        n += 1;
    }
    taken.insert(candidate.clone());
    candidate
}

/// Removes stay loops, shortest first, until the automaton is cycle-free or
/// the iteration cap is hit. The bounded language is preserved, as is
/// `k`-restriction: the rerouted loop pushes only onto fresh scratch
/// positions, one level deeper per iteration.
pub fn remove_cycles(m: &Tsa, max_iterations: usize) -> Result<Tsa, RemoveCyclesExceeded> {
    let mut current = m.clone();
    for _ in 0..max_iterations {
        match cycle_witness(&current) {
            None => return Ok(current),
            Some(witness) => current = remove_one_loop(&current, &witness),
        }
    }
    match cycle_witness(&current) {
        None => Ok(current),
        Some(witness) => Err(RemoveCyclesExceeded {
            iterations: max_iterations,
            witness,
            automaton: Box::new(current),
        }),
    }
}

/// One loop-removal iteration. Instead of iterating the loop in place, the
/// rewritten automaton pushes a `#`-marked scratch node, then one `*`-marked
/// node per loop iteration (replaying the loop's reads with `id`
/// instructions), and afterwards pops `*`s down to the `#` and once more to
/// return to the original position and a fresh copy of the loop's entry
/// state that cannot re-enter the loop.
fn remove_one_loop(m: &Tsa, witness: &LoopWitness) -> Tsa {
    let n = witness.run.len();
    let loop_transitions: Vec<Transition> = witness
        .run
        .iter()
        .map(|&i| m.transitions[i].clone())
        .collect();
    let first = loop_transitions.first().unwrap().clone();
    let last = loop_transitions.last().unwrap().clone();
    let entry = witness.state.clone();

    let mut taken_states: BTreeSet<Sym> = m.states.iter().cloned().collect();
    let iteration_states: Vec<Sym> = (0..n)
        .map(|i| fresh(&mut taken_states, &format!("{entry}_it{i}")))
        .collect();
    let push_state = fresh(&mut taken_states, &format!("{entry}_push"));
    let pop_state = fresh(&mut taken_states, &format!("{entry}_pop"));
    let exit_state = fresh(&mut taken_states, &format!("{entry}_exit"));

    let mut taken_symbols: BTreeSet<Sym> = m.stack_alphabet.iter().cloned().collect();
    taken_symbols.insert(root_symbol());
    let star = fresh(&mut taken_symbols, "*");
    let hash = fresh(&mut taken_symbols, "#");

    let scratch_index = m.max_child_index() + 1;

    let mut transitions: Vec<Transition> = m
        .transitions
        .iter()
        .filter(|t| **t != last)
        .cloned()
        .collect();
    // the exit state behaves like the entry state minus the loop's first step
    for t in &m.transitions {
        if t.source == entry && *t != first {
            transitions.push(Transition {
                source: exit_state.clone(),
                ..t.clone()
            });
        }
    }
    transitions.push(Transition {
        source: last.source.clone(),
        read: last.read.clone(),
        predicate: last.predicate.clone(),
        instruction: last.instruction.clone(),
        target: exit_state.clone(),
    });
    transitions.push(Transition {
        source: entry.clone(),
        read: None,
        predicate: Predicate::True,
        instruction: Instruction::Push(scratch_index, hash.clone()),
        target: push_state.clone(),
    });
    transitions.push(Transition {
        source: push_state.clone(),
        read: None,
        predicate: Predicate::True,
        instruction: Instruction::Push(scratch_index, star.clone()),
        target: iteration_states[0].clone(),
    });
    for k in 1..n {
        transitions.push(Transition {
            source: iteration_states[k - 1].clone(),
            read: loop_transitions[k - 1].read.clone(),
            predicate: Predicate::True,
            instruction: Instruction::Id,
            target: iteration_states[k].clone(),
        });
    }
    transitions.push(Transition {
        source: iteration_states[n - 1].clone(),
        read: last.read.clone(),
        predicate: Predicate::True,
        instruction: Instruction::Id,
        target: push_state.clone(),
    });
    transitions.push(Transition {
        source: push_state.clone(),
        read: None,
        predicate: Predicate::True,
        instruction: Instruction::Id,
        target: pop_state.clone(),
    });
    transitions.push(Transition {
        source: pop_state.clone(),
        read: None,
        predicate: Predicate::Equals(star.clone()),
        instruction: Instruction::Down,
        target: pop_state.clone(),
    });
    transitions.push(Transition {
        source: pop_state.clone(),
        read: None,
        predicate: Predicate::Equals(hash.clone()),
        instruction: Instruction::Down,
        target: entry.clone(),
    });

    let mut states = m.states.clone();
    states.extend(iteration_states);
    states.push(push_state);
    states.push(pop_state);
    states.push(exit_state.clone());

    let mut stack_alphabet = m.stack_alphabet.clone();
    stack_alphabet.push(star);
    stack_alphabet.push(hash);

    let mut final_states = m.final_states.clone();
    if final_states.contains(&entry) {
        final_states.insert(exit_state);
    }

    Tsa {
        states,
        stack_alphabet,
        terminals: m.terminals.clone(),
        initial_state: m.initial_state.clone(),
        transitions,
        final_states,
    }
}

/// Verdict of the bounded stack-normal-form check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnfStatus {
    /// No acceptance away from the root within the explored bounds.
    Holds,
    /// A run reaching a final state with the pointer away from the root.
    Violated(Run),
    /// The search was truncated before the bounded space was exhausted.
    Inconclusive,
}

/// Stack normal form is a property of all reachable acceptances, so only a
/// bounded surrogate is decidable here: search all configurations reachable
/// while emitting at most `max_len` symbols within the budget.
pub fn is_stack_normal_form_bounded(m: &Tsa, max_len: usize, budget: &SearchBudget) -> SnfStatus {
    struct SnfVisitor {
        witness: Option<Run>,
    }
    impl SearchVisitor for SnfVisitor {
        fn visit(&mut self, cursor: &SearchCursor) -> bool {
            if cursor.is_final && !cursor.storage.pointer().is_root() {
                self.witness = Some(cursor.run.to_vec());
                return true;
            }
            false
        }
    }
    let mut visitor = SnfVisitor { witness: None };
    let truncated = search(m, budget, None, max_len, &mut visitor);
    match visitor.witness {
        Some(run) => SnfStatus::Violated(run),
        None if truncated => SnfStatus::Inconclusive,
        None => SnfStatus::Holds,
    }
}

/// Funnels all acceptance through a fresh final state reachable only at the
/// root: every old final state may step into a down-spinning state, which
/// enters the new final state once the bottom predicate holds. Adds exactly
/// two states and `|Q_f| + 2` transitions and no `push`/`up` instructions.
pub fn to_stack_normal_form(m: &Tsa) -> Tsa {
    let mut taken: BTreeSet<Sym> = m.states.iter().cloned().collect();
    let descend = fresh(&mut taken, "qdown");
    let accept = fresh(&mut taken, "qfin");

    let mut transitions = m.transitions.clone();
    for q in &m.final_states {
        transitions.push(Transition {
            source: q.clone(),
            read: None,
            predicate: Predicate::True,
            instruction: Instruction::Id,
            target: descend.clone(),
        });
    }
    transitions.push(Transition {
        source: descend.clone(),
        read: None,
        predicate: Predicate::True,
        instruction: Instruction::Down,
        target: descend.clone(),
    });
    transitions.push(Transition {
        source: descend.clone(),
        read: None,
        predicate: Predicate::Bottom,
        instruction: Instruction::Id,
        target: accept.clone(),
    });

    let mut states = m.states.clone();
    states.push(descend);
    states.push(accept.clone());

    Tsa {
        states,
        stack_alphabet: m.stack_alphabet.clone(),
        terminals: m.terminals.clone(),
        initial_state: m.initial_state.clone(),
        transitions,
        final_states: [accept].into_iter().collect(),
    }
}
