//! The tree stack storage type.
//!
//! A tree stack is a finite, prefix-closed partial map from positions
//! (sequences of positive integers) to stack symbols, together with a stack
//! pointer into the tree. The root is always labelled with the reserved
//! symbol `@`, which occurs nowhere else. The pointer may sit on any node,
//! including the root.
//!
//! Five partial instructions manipulate a tree stack and three predicates
//! observe it; an instruction that is undefined on the current tree stack
//! yields a first-class "inapplicable" result (`None`) rather than an error,
//! so a nondeterministic search can treat it as a dead branch.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::sym::Sym;

/// The reserved root symbol `@`. It is not a member of any stack alphabet.
pub fn root_symbol() -> Sym {
    static ROOT: OnceLock<Sym> = OnceLock::new();
    ROOT.get_or_init(|| Sym::new("@")).clone()
}

/// A position in a tree: a sequence of positive child indices, ε being the root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position(Vec<u32>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn from_indices(indices: impl IntoIterator<Item = u32>) -> Self {
        let v: Vec<u32> = indices.into_iter().collect();
        debug_assert!(v.iter().all(|&n| n >= 1));
        Position(v)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    /// The position of the `n`-th child.
    pub fn child(&self, n: u32) -> Position {
        let mut v = self.0.clone();
        v.push(n);
        Position(v)
    }

    /// The parent position, or `None` at the root.
    pub fn parent(&self) -> Option<Position> {
        if self.0.is_empty() {
            None
        } else {
            Some(Position(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        if self.0.iter().all(|&n| n <= 9) {
            for n in &self.0 {
                write!(f, "{n}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
            f.write_str(&parts.join("."))
        }
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A predicate on tree stacks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    /// The trivial predicate; holds on every tree stack.
    True,
    /// Holds iff the pointer is at the root.
    Bottom,
    /// Holds iff the pointer's node carries the given symbol (never `@`).
    Equals(Sym),
}

impl Predicate {
    /// Symbol-level satisfaction: whether the predicate holds on a tree stack
    /// whose pointer node carries `symbol`. Exact, because a node carries `@`
    /// iff it is the root, which is also exactly where `Bottom` holds.
    pub fn admits(&self, symbol: &Sym) -> bool {
        match self {
            Predicate::True => true,
            Predicate::Bottom => *symbol == root_symbol(),
            Predicate::Equals(s) => symbol == s,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Predicate::True => f.write_str("true"),
            Predicate::Bottom => f.write_str("bottom"),
            Predicate::Equals(s) => write!(f, "eq({s})"),
        }
    }
}

/// A tree stack instruction. All of these are partial functions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Instruction {
    /// Leaves the tree stack unchanged.
    Id,
    /// Adds child `n` of the pointer with the given symbol and moves there;
    /// defined iff that child position is vacant.
    Push(u32, Sym),
    /// Moves the pointer to child `n`; defined iff that child exists.
    Up(u32),
    /// Moves the pointer to the parent; defined iff the pointer is not at the root.
    Down,
    /// Overwrites the symbol under the pointer; defined iff the pointer is not
    /// at the root (the root symbol is immutable).
    Set(Sym),
}

impl Instruction {
    /// True for `Push` and `Up`, the instructions that enter a position from below.
    pub fn enters_from_below(&self) -> bool {
        matches!(self, Instruction::Push(..) | Instruction::Up(..))
    }

    /// The child index of a `Push` or `Up`.
    pub fn child_index(&self) -> Option<u32> {
        match self {
            Instruction::Push(n, _) | Instruction::Up(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Instruction::Id => f.write_str("id"),
            Instruction::Push(n, s) => write!(f, "push({n},{s})"),
            Instruction::Up(n) => write!(f, "up({n})"),
            Instruction::Down => f.write_str("down"),
            Instruction::Set(s) => write!(f, "set({s})"),
        }
    }
}

/// A tree stack: a prefix-closed tree of symbols plus the stack pointer.
///
/// Values are immutable; applying an instruction yields a new tree stack.
/// The node map is shared between values whenever an instruction does not
/// change the tree itself (`id`, `up`, `down`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeStack {
    nodes: Arc<BTreeMap<Position, Sym>>,
    pointer: Position,
}

impl TreeStack {
    /// The initial tree stack: the lone root node `{(ε, @)}` with the pointer on it.
    pub fn initial() -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(Position::root(), root_symbol());
        TreeStack {
            nodes: Arc::new(nodes),
            pointer: Position::root(),
        }
    }

    /// Builds a tree stack from explicit nodes; intended for tests and fixtures.
    ///
    /// Panics when the node set is not a valid tree stack (missing or
    /// mislabelled root, non-prefix-closed domain, dangling pointer, `@`
    /// away from the root).
    pub fn from_nodes(
        nodes: impl IntoIterator<Item = (Position, Sym)>,
        pointer: Position,
    ) -> Self {
        let nodes: BTreeMap<Position, Sym> = nodes.into_iter().collect();
        let ts = TreeStack {
            nodes: Arc::new(nodes),
            pointer,
        };
        assert!(ts.is_well_formed(), "malformed tree stack: {ts}");
        ts
    }

    /// Checks the structural invariants: nonempty prefix-closed domain,
    /// `@` exactly at the root, pointer inside the domain.
    pub fn is_well_formed(&self) -> bool {
        if self.nodes.get(&Position::root()) != Some(&root_symbol()) {
            return false;
        }
        if !self.nodes.contains_key(&self.pointer) {
            return false;
        }
        for (pos, sym) in self.nodes.iter() {
            if pos.is_root() {
                continue;
            }
            if *sym == root_symbol() {
                return false;
            }
            match pos.parent() {
                Some(parent) if self.nodes.contains_key(&parent) => {}
                _ => return false,
            }
        }
        true
    }

    pub fn nodes(&self) -> &BTreeMap<Position, Sym> {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a tree stack always contains at least the root
    }

    pub fn pointer(&self) -> &Position {
        &self.pointer
    }

    /// The symbol under the pointer (`@` iff the pointer is at the root).
    pub fn symbol(&self) -> &Sym {
        &self.nodes[&self.pointer]
    }

    /// Evaluates a predicate on this tree stack.
    pub fn check(&self, p: &Predicate) -> bool {
        match p {
            Predicate::True => true,
            Predicate::Bottom => self.pointer.is_root(),
            Predicate::Equals(sym) => self.symbol() == sym,
        }
    }

    /// Applies an instruction, or reports it inapplicable (`None`).
    pub fn apply(&self, instr: &Instruction) -> Option<TreeStack> {
        match instr {
            Instruction::Id => Some(self.clone()),
            Instruction::Push(n, sym) => {
                let target = self.pointer.child(*n);
                if self.nodes.contains_key(&target) {
                    return None;
                }
                let mut nodes = (*self.nodes).clone();
                nodes.insert(target.clone(), sym.clone());
                Some(TreeStack {
                    nodes: Arc::new(nodes),
                    pointer: target,
                })
            }
            Instruction::Up(n) => {
                let target = self.pointer.child(*n);
                if !self.nodes.contains_key(&target) {
                    return None;
                }
                Some(TreeStack {
                    nodes: Arc::clone(&self.nodes),
                    pointer: target,
                })
            }
            Instruction::Down => self.pointer.parent().map(|parent| TreeStack {
                nodes: Arc::clone(&self.nodes),
                pointer: parent,
            }),
            Instruction::Set(sym) => {
                if self.pointer.is_root() {
                    return None;
                }
                let mut nodes = (*self.nodes).clone();
                nodes.insert(self.pointer.clone(), sym.clone());
                Some(TreeStack {
                    nodes: Arc::new(nodes),
                    pointer: self.pointer.clone(),
                })
            }
        }
    }

    /// Renders the tree stack in set notation with the pointer entry
    /// underlined, e.g. `{(ε,@), _(1,*)_, (11,#)}`.
    pub fn render(&self) -> String {
        let entries: Vec<String> = self
            .nodes
            .iter()
            .map(|(pos, sym)| {
                if *pos == self.pointer {
                    format!("_({pos},{sym})_")
                } else {
                    format!("({pos},{sym})")
                }
            })
            .collect();
        format!("{{{}}}", entries.join(", "))
    }
}

impl fmt::Display for TreeStack {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for TreeStack {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(indices: &[u32]) -> Position {
        Position::from_indices(indices.iter().copied())
    }

    fn star() -> Sym {
        Sym::new("*")
    }

    fn hash() -> Sym {
        Sym::new("#")
    }

    #[test]
    fn initial_is_lone_marked_root() {
        let ts = TreeStack::initial();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts.symbol(), &root_symbol());
        assert!(ts.pointer().is_root());
        assert!(ts.check(&Predicate::Bottom));
        assert!(ts.check(&Predicate::True));
        assert!(!ts.check(&Predicate::Equals(star())));
    }

    #[test]
    fn push_adds_node_and_moves_pointer() {
        let ts = TreeStack::initial();
        let pushed = ts.apply(&Instruction::Push(1, star())).unwrap();
        assert_eq!(pushed.pointer(), &pos(&[1]));
        assert_eq!(pushed.symbol(), &star());
        assert_eq!(pushed.len(), 2);
        // the original value is untouched
        assert_eq!(ts.len(), 1);
    }

    #[test]
    fn push_onto_occupied_child_is_inapplicable() {
        let ts = TreeStack::initial()
            .apply(&Instruction::Push(1, star()))
            .unwrap()
            .apply(&Instruction::Down)
            .unwrap();
        assert_eq!(ts.apply(&Instruction::Push(1, star())), None);
        // a different child index is still free
        assert!(ts.apply(&Instruction::Push(2, star())).is_some());
    }

    #[test]
    fn down_keeps_tree_and_moves_pointer() {
        let ts = TreeStack::initial()
            .apply(&Instruction::Push(1, star()))
            .unwrap()
            .apply(&Instruction::Push(1, hash()))
            .unwrap();
        assert_eq!(ts.pointer(), &pos(&[1, 1]));
        assert!(ts.check(&Predicate::Equals(hash())));
        let down = ts.apply(&Instruction::Down).unwrap();
        assert_eq!(down.pointer(), &pos(&[1]));
        assert_eq!(down.len(), 3);
        assert_eq!(down.nodes(), ts.nodes());
    }

    #[test]
    fn down_at_root_is_inapplicable() {
        assert_eq!(TreeStack::initial().apply(&Instruction::Down), None);
    }

    #[test]
    fn up_requires_existing_child() {
        let ts = TreeStack::initial();
        assert_eq!(ts.apply(&Instruction::Up(1)), None);
        let ts = ts
            .apply(&Instruction::Push(1, star()))
            .unwrap()
            .apply(&Instruction::Down)
            .unwrap();
        let up = ts.apply(&Instruction::Up(1)).unwrap();
        assert_eq!(up.pointer(), &pos(&[1]));
    }

    #[test]
    fn set_overwrites_one_entry_but_not_the_root() {
        let ts = TreeStack::initial()
            .apply(&Instruction::Push(1, star()))
            .unwrap();
        let set = ts.apply(&Instruction::Set(hash())).unwrap();
        assert_eq!(set.symbol(), &hash());
        assert_eq!(set.pointer(), ts.pointer());
        assert_eq!(set.len(), ts.len());
        let at_root = set.apply(&Instruction::Down).unwrap();
        assert_eq!(at_root.apply(&Instruction::Set(star())), None);
    }

    #[test]
    fn gaps_in_child_indices_are_allowed() {
        // child 3 may exist without children 1 and 2
        let ts = TreeStack::initial()
            .apply(&Instruction::Push(3, star()))
            .unwrap();
        assert!(ts.is_well_formed());
        assert_eq!(ts.pointer(), &pos(&[3]));
    }

    #[test]
    fn renders_in_set_notation_with_pointer_marked() {
        let ts = TreeStack::from_nodes(
            [
                (pos(&[]), root_symbol()),
                (pos(&[1]), star()),
                (pos(&[1, 1]), hash()),
            ],
            pos(&[1, 1]),
        );
        assert_eq!(ts.render(), "{(ε,@), (1,*), _(11,#)_}");
        assert!(ts.check(&Predicate::Equals(hash())));
        assert!(!ts.check(&Predicate::Equals(star())));
        assert!(!ts.check(&Predicate::Bottom));
    }

    #[test]
    fn wide_child_indices_render_with_separators() {
        let ts = TreeStack::initial()
            .apply(&Instruction::Push(12, star()))
            .unwrap();
        let deeper = ts.apply(&Instruction::Push(3, hash())).unwrap();
        assert_eq!(deeper.pointer().to_string(), "12.3");
    }
}
