//! Raw and preprocessed stream records.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::symbol::{Symbol, SymbolTable};

/// Declared kind of one attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttributeKind {
    Categorical,
    Numeric,
}

/// One raw cell, as it arrives from a source.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Categorical(String),
    Numeric(f64),
    Missing,
}

impl Value {
    pub fn categorical(token: impl Into<String>) -> Self {
        Value::Categorical(token.into())
    }
}

/// A preprocessed record: every cell is an interned token or missing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Record {
    cells: Vec<Option<Symbol>>,
}

impl Record {
    pub fn new(cells: Vec<Option<Symbol>>) -> Self {
        Record { cells }
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        Record {
            cells: symbols.into_iter().map(Some).collect(),
        }
    }

    /// Interns every token; `None` marks a missing cell.
    pub fn from_tokens<'a>(
        symbols: &mut SymbolTable,
        tokens: impl IntoIterator<Item = Option<&'a str>>,
    ) -> Self {
        Record {
            cells: tokens.into_iter().map(|t| t.map(|t| symbols.intern(t))).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Option<Symbol>] {
        &self.cells
    }

    pub fn get(&self, index: usize) -> Option<Symbol> {
        self.cells.get(index).copied().flatten()
    }

    pub fn has_missing(&self) -> bool {
        self.cells.iter().any(Option::is_none)
    }

    /// All cells as symbols, or the index of the first missing one.
    pub fn complete(&self) -> Result<Vec<Symbol>> {
        self.cells
            .iter()
            .enumerate()
            .map(|(index, c)| c.ok_or(Error::MissingCell { index }))
            .collect()
    }
}
