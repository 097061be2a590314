//! Per-cluster value histograms maintained under Lossy Counting.
//!
//! Every cluster runs its own bucket clock: with `w = ceil(1/epsilon)`, the
//! current bucket of a cluster holding `size` records is `ceil(size / w)`.
//! A value seen for the first time in bucket `b` enters as `(value, 1, b - 1)`;
//! whenever `size` reaches a multiple of `w` the histogram drops every entry
//! with `f + delta <= b`. Estimates never exceed the true count and undercount
//! it by at most `epsilon * size`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::record::Record;
use crate::symbol::Symbol;
use crate::FxHashMap;

/// Error and support parameters shared by every histogram of a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossyParams {
    epsilon: f64,
    support: f64,
    bucket_width: u64,
}

impl LossyParams {
    /// `support` may be smaller than `epsilon`; the output threshold is then
    /// negative and every stored entry qualifies.
    pub fn new(epsilon: f64, support: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Epsilon(epsilon));
        }
        if !(0.0..1.0).contains(&support) {
            return Err(Error::Support(support));
        }
        Ok(LossyParams {
            epsilon,
            support,
            bucket_width: libm::ceil(1.0 / epsilon) as u64,
        })
    }

    /// Parameters under which no histogram of a stream of at most `n`
    /// records is ever pruned or filtered (`support = epsilon < 1/n`).
    pub fn exact_for(n: u64) -> Self {
        let epsilon = 1.0 / (n as f64 + 2.0);
        Self::new(epsilon, epsilon).expect("epsilon in (0, 1)")
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn bucket_width(&self) -> u64 {
        self.bucket_width
    }

    pub fn is_exact_for(&self, n: u64) -> bool {
        self.support == self.epsilon && (n == 0 || self.epsilon < 1.0 / n as f64)
    }

    /// Bucket id after `count` items: `ceil(count / w)`.
    pub fn bucket_id(&self, count: u64) -> u64 {
        count.div_ceil(self.bucket_width)
    }

    /// `(support - epsilon) * cluster_size`.
    pub fn qualifying_threshold(&self, cluster_size: u64) -> f64 {
        (self.support - self.epsilon) * cluster_size as f64
    }

    pub fn is_boundary(&self, count: u64) -> bool {
        count % self.bucket_width == 0
    }
}

/// One Lossy Counting triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LossyEntry {
    pub value: Symbol,
    /// Occurrences counted since the entry was (re)inserted.
    pub f: u64,
    /// Upper bound on occurrences missed before insertion.
    pub delta: u64,
}

/// Entries of one attribute within one cluster, at most one per value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttributeHistogram {
    entries: FxHashMap<Symbol, LossyEntry>,
}

impl AttributeHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insertion rule. `bucket` is the current bucket id of the owning cluster.
    pub fn observe(&mut self, value: Symbol, bucket: u64) {
        self.entries
            .entry(value)
            .and_modify(|e| e.f += 1)
            .or_insert(LossyEntry {
                value,
                f: 1,
                delta: bucket.saturating_sub(1),
            });
    }

    /// Deletion rule; returns how many entries were dropped.
    pub fn prune(&mut self, bucket: u64) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| e.f + e.delta > bucket);
        before - self.entries.len()
    }

    pub fn estimated_frequency(&self, value: Symbol) -> u64 {
        self.entries.get(&value).map_or(0, |e| e.f)
    }

    pub fn entry(&self, value: Symbol) -> Option<&LossyEntry> {
        self.entries.get(&value)
    }

    /// Entries with `f >= (s - epsilon) * cluster_size`, in no particular order.
    pub fn qualifying_entries(
        &self,
        params: &LossyParams,
        cluster_size: u64,
    ) -> impl Iterator<Item = (Symbol, u64)> + '_ {
        let threshold = params.qualifying_threshold(cluster_size);
        self.entries
            .values()
            .filter(move |e| e.f as f64 >= threshold)
            .map(|e| (e.value, e.f))
    }

    pub fn iter(&self) -> impl Iterator<Item = &LossyEntry> + '_ {
        self.entries.values()
    }

    /// Entries ordered by symbol, for stable output.
    pub fn sorted_entries(&self) -> Vec<LossyEntry> {
        let mut out: Vec<LossyEntry> = self.entries.values().copied().collect();
        out.sort_unstable_by_key(|e| e.value);
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of stored `f`.
    pub fn total_frequency(&self) -> u64 {
        self.entries.values().map(|e| e.f).sum()
    }

    /// Inserts an entry verbatim, replacing any entry for the same value.
    /// Meant for reloading dumped models.
    pub fn insert_entry(&mut self, entry: LossyEntry) {
        self.entries.insert(entry.value, entry);
    }
}

/// Compact representation of one cluster: `m` attribute histograms and the
/// number of records absorbed.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterHistogram {
    attributes: Vec<AttributeHistogram>,
    size: u64,
    prune_count: u64,
}

impl ClusterHistogram {
    pub fn new(arity: usize) -> Self {
        ClusterHistogram {
            attributes: (0..arity).map(|_| AttributeHistogram::new()).collect(),
            size: 0,
            prune_count: 0,
        }
    }

    /// Rebuilds a histogram from its parts (model reload).
    pub fn from_parts(attributes: Vec<AttributeHistogram>, size: u64, prune_count: u64) -> Self {
        ClusterHistogram {
            attributes,
            size,
            prune_count,
        }
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    /// `N_i`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn prune_count(&self) -> u64 {
        self.prune_count
    }

    pub fn attributes(&self) -> &[AttributeHistogram] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> Option<&AttributeHistogram> {
        self.attributes.get(index)
    }

    pub fn current_bucket(&self, params: &LossyParams) -> u64 {
        params.bucket_id(self.size)
    }

    /// Counts one more record. Must precede the per-attribute [`observe`]
    /// calls for that record.
    ///
    /// [`observe`]: ClusterHistogram::observe
    pub fn begin_record(&mut self) {
        self.size += 1;
    }

    /// Inserts `value` into attribute `attr` using the cluster's current bucket.
    pub fn observe(&mut self, attr: usize, value: Symbol, params: &LossyParams) -> Result<()> {
        let bucket = self.current_bucket(params);
        let arity = self.attributes.len();
        self.attributes
            .get_mut(attr)
            .ok_or(Error::AttributeOutOfRange { index: attr, arity })?
            .observe(value, bucket);
        Ok(())
    }

    /// Prunes every attribute histogram against the current bucket id.
    /// Returns the number of entries deleted.
    pub fn prune(&mut self, params: &LossyParams) -> usize {
        debug_assert!(params.is_boundary(self.size), "prune off a bucket boundary");
        let bucket = self.current_bucket(params);
        self.prune_count += 1;
        self.attributes.iter_mut().map(|h| h.prune(bucket)).sum()
    }

    /// Absorbs a whole record: size increment, one observe per present cell,
    /// then pruning if the cluster sits on a bucket boundary. Returns the
    /// number of entries pruned.
    pub fn absorb(&mut self, record: &Record, params: &LossyParams) -> Result<usize> {
        if record.arity() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: record.arity(),
            });
        }
        self.begin_record();
        let bucket = self.current_bucket(params);
        for (hist, cell) in self.attributes.iter_mut().zip(record.cells()) {
            if let Some(value) = *cell {
                hist.observe(value, bucket);
            }
        }
        if params.is_boundary(self.size) {
            Ok(self.prune(params))
        } else {
            Ok(0)
        }
    }

    /// Total entries across all attributes; the memory metric.
    pub fn entry_count(&self) -> usize {
        self.attributes.iter().map(AttributeHistogram::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(i: u32) -> Symbol {
        Symbol::from_raw(i)
    }

    #[test]
    fn bucket_width_is_ceil_of_inverse_epsilon() {
        assert_eq!(LossyParams::new(0.25, 0.5).unwrap().bucket_width(), 4);
        assert_eq!(LossyParams::new(0.001, 0.5).unwrap().bucket_width(), 1000);
        assert_eq!(LossyParams::new(0.03, 0.5).unwrap().bucket_width(), 34);
        assert_eq!(LossyParams::new(0.05, 0.5).unwrap().bucket_width(), 20);
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        assert_eq!(LossyParams::new(0.0, 0.5), Err(Error::Epsilon(0.0)));
        assert_eq!(LossyParams::new(1.0, 0.5), Err(Error::Epsilon(1.0)));
        assert!(matches!(LossyParams::new(f64::NAN, 0.5), Err(Error::Epsilon(_))));
        assert_eq!(LossyParams::new(0.1, 1.0), Err(Error::Support(1.0)));
        assert_eq!(LossyParams::new(0.1, -0.1), Err(Error::Support(-0.1)));
        // support below epsilon is allowed: every entry qualifies
        assert!(LossyParams::new(0.001, 0.0).is_ok());
    }

    #[test]
    fn exact_params_never_reach_a_boundary() {
        let p = LossyParams::exact_for(5000);
        assert!(p.is_exact_for(5000));
        assert!(p.bucket_width() > 5000);
        assert_eq!(p.qualifying_threshold(5000), 0.0);
    }

    #[test]
    fn observe_into_empty_histogram() {
        let p = LossyParams::new(0.25, 0.5).unwrap();
        let mut h = ClusterHistogram::new(1);
        h.begin_record();
        h.observe(0, sym(0), &p).unwrap();
        let e = *h.attribute(0).unwrap().entry(sym(0)).unwrap();
        assert_eq!((e.f, e.delta), (1, 0));
    }

    #[test]
    fn observe_existing_increments() {
        let p = LossyParams::new(0.25, 0.5).unwrap();
        let mut h = ClusterHistogram::new(1);
        for _ in 0..3 {
            h.begin_record();
            h.observe(0, sym(0), &p).unwrap();
        }
        let e = *h.attribute(0).unwrap().entry(sym(0)).unwrap();
        assert_eq!((e.f, e.delta), (3, 0));
    }

    #[test]
    fn observe_new_value_in_second_bucket() {
        // w = 4, size 5 -> b_current = 2 -> delta = 1
        let p = LossyParams::new(0.25, 0.5).unwrap();
        let mut h = ClusterHistogram::new(1);
        for _ in 0..4 {
            h.begin_record();
            h.observe(0, sym(0), &p).unwrap();
        }
        h.begin_record();
        h.observe(0, sym(1), &p).unwrap();
        let e = *h.attribute(0).unwrap().entry(sym(1)).unwrap();
        assert_eq!((e.f, e.delta), (1, 1));
    }

    #[test]
    fn observe_rejects_bad_attribute() {
        let p = LossyParams::new(0.25, 0.5).unwrap();
        let mut h = ClusterHistogram::new(2);
        h.begin_record();
        assert_eq!(
            h.observe(2, sym(0), &p),
            Err(Error::AttributeOutOfRange { index: 2, arity: 2 })
        );
    }

    #[test]
    fn prune_empty_is_noop() {
        let p = LossyParams::new(0.5, 0.5).unwrap();
        let mut h = ClusterHistogram::new(3);
        assert_eq!(h.prune(&p), 0);
        assert_eq!(h.entry_count(), 0);
        assert_eq!(h.prune_count(), 1);
    }

    #[test]
    fn prune_keeps_repeated_value() {
        let p = LossyParams::new(0.5, 0.5).unwrap();
        let mut h = ClusterHistogram::new(1);
        let a = Record::from_symbols([sym(0)]);
        assert_eq!(h.absorb(&a, &p).unwrap(), 0);
        // size 2 is a boundary: ("a", 2, 0) has f + delta = 2 > 1
        assert_eq!(h.absorb(&a, &p).unwrap(), 0);
        assert_eq!(h.attribute(0).unwrap().estimated_frequency(sym(0)), 2);
        assert_eq!(h.prune_count(), 1);
    }

    #[test]
    fn prune_drops_singletons() {
        let p = LossyParams::new(0.5, 0.5).unwrap();
        let mut h = ClusterHistogram::new(1);
        h.absorb(&Record::from_symbols([sym(0)]), &p).unwrap();
        let pruned = h.absorb(&Record::from_symbols([sym(1)]), &p).unwrap();
        assert_eq!(pruned, 2);
        assert_eq!(h.entry_count(), 0);
    }

    #[test]
    fn qualifying_entries_threshold() {
        let mut h = AttributeHistogram::new();
        for _ in 0..3 {
            h.observe(sym(0), 1);
        }
        h.observe(sym(1), 1);

        let all = LossyParams::new(0.001, 0.0).unwrap();
        assert_eq!(h.qualifying_entries(&all, 4).count(), 2);

        // threshold (0.5 - 0.001) * 4 = 1.996
        let p = LossyParams::new(0.001, 0.5).unwrap();
        let q: Vec<_> = h.qualifying_entries(&p, 4).collect();
        assert_eq!(q, [(sym(0), 3)]);

        let exact = LossyParams::exact_for(4);
        let mut q: Vec<_> = h.qualifying_entries(&exact, 4).collect();
        q.sort();
        assert_eq!(q, [(sym(0), 3), (sym(1), 1)]);
    }

    #[test]
    fn estimated_frequency_lookup() {
        let mut h = AttributeHistogram::new();
        assert_eq!(h.estimated_frequency(sym(7)), 0);
        for _ in 0..3 {
            h.observe(sym(7), 1);
        }
        assert_eq!(h.estimated_frequency(sym(7)), 3);
    }

    #[test]
    fn entry_count_one_record() {
        let p = LossyParams::new(0.001, 0.5).unwrap();
        let mut h = ClusterHistogram::new(22);
        assert_eq!(h.entry_count(), 0);
        h.absorb(&Record::from_symbols((0..22).map(sym)), &p).unwrap();
        assert_eq!(h.entry_count(), 22);
    }

    #[test]
    fn missing_cells_are_not_inserted() {
        let p = LossyParams::new(0.001, 0.5).unwrap();
        let mut h = ClusterHistogram::new(3);
        h.absorb(&Record::new(alloc::vec![Some(sym(0)), None, Some(sym(2))]), &p)
            .unwrap();
        assert_eq!(h.size(), 1);
        assert_eq!(h.entry_count(), 2);
        assert!(h.attribute(1).unwrap().is_empty());
    }

    #[test]
    fn absorb_checks_arity() {
        let p = LossyParams::new(0.1, 0.5).unwrap();
        let mut h = ClusterHistogram::new(3);
        let err = h.absorb(&Record::from_symbols([sym(0)]), &p).unwrap_err();
        assert_eq!(err, Error::ArityMismatch { expected: 3, found: 1 });
        assert_eq!(h.size(), 0);
    }
}
