use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

/// An interned symbol: a state name, stack symbol, terminal, or nonterminal.
///
/// Cloning is cheap (a reference-count bump), which matters because symbols
/// are copied freely into tree stacks, configurations, and search frontiers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: impl AsRef<str>) -> Self {
        Sym(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl Borrow<str> for Sym {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

impl From<String> for Sym {
    fn from(s: String) -> Self {
        Sym(Arc::from(s))
    }
}

impl From<char> for Sym {
    fn from(c: char) -> Self {
        Sym::new(c.to_string())
    }
}

/// A word over some alphabet of symbols.
pub type Word = Vec<Sym>;

/// Splits a string into a word of single-character symbols.
pub fn char_word(s: &str) -> Word {
    s.chars().map(Sym::from).collect()
}

/// Concatenates the symbols of a word for display; the empty word renders as `ε`.
pub fn display_word(w: &[Sym]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.iter().map(Sym::as_str).collect()
    }
}
