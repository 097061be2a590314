//! Seeded synthetic categorical streams with planted classes.
//!
//! Every class owns one dominant token per attribute; within an attribute the
//! dominant tokens of different classes are distinct. A record of class `c`
//! takes its class's dominant token with probability `purity`, otherwise a
//! uniformly drawn other token of the attribute's domain. Classes are
//! balanced (sizes differ by at most one) and rows come out shuffled.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::record::{Record, Value};
use crate::symbol::SymbolTable;

/// Identifies the random source so other implementations can reproduce output.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64 (rand_chacha 0.3)";

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub rows: usize,
    pub attrs: usize,
    pub classes: usize,
    /// Tokens per attribute.
    pub domain_size: usize,
    /// Probability that a cell carries its class's dominant token.
    pub purity: f64,
    pub seed: u64,
}

impl GenSpec {
    /// Domain of `2 * classes` tokens, purity 0.9, seed 0.
    pub fn new(rows: usize, attrs: usize, classes: usize) -> Self {
        GenSpec {
            rows,
            attrs,
            classes,
            domain_size: 2 * classes,
            purity: 0.9,
            seed: 0,
        }
    }

    pub fn with_domain_size(mut self, domain_size: usize) -> Self {
        self.domain_size = domain_size;
        self
    }

    pub fn with_purity(mut self, purity: f64) -> Self {
        self.purity = purity;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.rows == 0 || self.attrs == 0 || self.classes == 0 {
            return fail("rows, attrs and classes must be positive".into());
        }
        if self.classes > self.domain_size {
            return fail(format!(
                "classes ({}) exceed the domain size ({})",
                self.classes, self.domain_size
            ));
        }
        if u32::try_from(self.domain_size).is_err() {
            return fail(format!("domain size {} is too large", self.domain_size));
        }
        if !(self.purity > 0.0 && self.purity <= 1.0) {
            return fail(format!("purity must lie in (0, 1], got {}", self.purity));
        }
        if self.purity < 1.0 && self.domain_size < 2 {
            return fail("noise needs a domain of at least two tokens".into());
        }
        Ok(())
    }
}

/// Generated rows (row-major domain indices) with their class labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    attrs: usize,
    cells: Vec<u32>,
    labels: Vec<usize>,
    vocabulary: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn attrs(&self) -> usize {
        self.attrs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Token spelling of domain index `i`.
    pub fn token(&self, i: u32) -> &str {
        &self.vocabulary[i as usize]
    }

    /// Domain indices of row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.cells[i * self.attrs..(i + 1) * self.attrs]
    }

    pub fn row_tokens(&self, i: usize) -> impl Iterator<Item = &str> + '_ {
        self.row(i).iter().map(|t| self.token(*t))
    }

    pub fn raw_record(&self, i: usize) -> Vec<Value> {
        self.row_tokens(i).map(Value::categorical).collect()
    }

    /// Raw rows in order, produced lazily.
    pub fn raw_records(&self) -> impl Iterator<Item = Vec<Value>> + '_ {
        (0..self.len()).map(|i| self.raw_record(i))
    }

    /// Interns the vocabulary once and returns the first `limit` rows as records.
    pub fn interned(&self, symbols: &mut SymbolTable, limit: usize) -> Vec<Record> {
        let syms: Vec<_> = self.vocabulary.iter().map(|t| symbols.intern(t)).collect();
        (0..self.len().min(limit))
            .map(|i| Record::from_symbols(self.row(i).iter().map(|t| syms[*t as usize])))
            .collect()
    }
}

pub fn generate(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let domain = spec.domain_size as u32;

    // dominant[c * attrs + j]: distinct across classes within attribute j
    let mut dominant = alloc::vec![0u32; spec.classes * spec.attrs];
    let mut perm: Vec<u32> = (0..domain).collect();
    for j in 0..spec.attrs {
        perm.shuffle(&mut rng);
        for c in 0..spec.classes {
            dominant[c * spec.attrs + j] = perm[c];
        }
    }

    let mut labels: Vec<usize> = (0..spec.rows).map(|i| i % spec.classes).collect();
    labels.shuffle(&mut rng);

    let mut cells = Vec::with_capacity(spec.rows * spec.attrs);
    for &c in &labels {
        let dom = &dominant[c * spec.attrs..(c + 1) * spec.attrs];
        for &d in dom {
            let v = if rng.gen::<f64>() < spec.purity {
                d
            } else {
                let r = rng.gen_range(0..domain - 1);
                if r >= d {
                    r + 1
                } else {
                    r
                }
            };
            cells.push(v);
        }
    }

    Ok(Dataset {
        attrs: spec.attrs,
        cells,
        labels,
        vocabulary: (0..domain).map(|i| format!("v{i}")).collect(),
    })
}
