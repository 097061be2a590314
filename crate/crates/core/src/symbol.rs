use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::FxHashMap;

/// Interned categorical token.
///
/// Symbols compare by interning order, not by spelling. Use
/// [`SymbolTable::resolve`] when the textual value matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u32);

impl Symbol {
    pub const fn from_raw(raw: u32) -> Self {
        Symbol(raw)
    }

    pub const fn raw(self) -> u32 {
        self.0
    }
}

/// Bidirectional token <-> [`Symbol`] map.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    lookup: FxHashMap<Box<str>, Symbol>,
    names: Vec<Box<str>>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> Symbol {
        if let Some(&sym) = self.lookup.get(token) {
            return sym;
        }
        let sym = Symbol(u32::try_from(self.names.len()).expect("symbol table overflow"));
        self.names.push(token.into());
        self.lookup.insert(token.into(), sym);
        sym
    }

    pub fn get(&self, token: &str) -> Option<Symbol> {
        self.lookup.get(token).copied()
    }

    /// Panics if `sym` was not produced by this table.
    pub fn resolve(&self, sym: Symbol) -> &str {
        &self.names[sym.0 as usize]
    }

    pub fn try_resolve(&self, sym: Symbol) -> Option<&str> {
        self.names.get(sym.0 as usize).map(|s| &**s)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}
