//! Ordered key stores with Get, Scan and Seek.

mod btree;
mod dump;
mod measure;
mod partition;
mod sorted;

pub use btree::BTreeStore;
pub use dump::{read_dump, write_dump, DUMP_MAGIC};
pub use measure::{measure_scan_seek_ratio, scan_seek_samples};
pub use partition::{Partition, PartitionPolicy, PartitionedStore};
pub use sorted::SortedKeys;

use std::cell::Cell;

use serde::Serialize;

/// Cardinality and extreme keys.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct KeyStats {
    pub card: u64,
    pub min: Option<u128>,
    pub max: Option<u128>,
}

/// A forward cursor. A fresh cursor sits before the first key.
pub trait KeyCursor {
    /// Moves to the smallest key `>= key` and returns it.
    fn seek(&mut self, key: u128) -> Option<u128>;
    /// Moves to the key after the current one and returns it.
    fn next(&mut self) -> Option<u128>;
}

/// Immutable ordered set of keys of one width, with optional payloads.
pub trait OrderedStore: Sync {
    type Cursor<'a>: KeyCursor
    where
        Self: 'a;

    fn width(&self) -> u32;
    fn stats(&self) -> KeyStats;
    /// Payload of a stored key; empty for key-only stores.
    fn get(&self, key: u128) -> Option<&[u8]>;
    /// Smallest stored key `> key`.
    fn scan_next(&self, key: u128) -> Option<u128>;
    /// Smallest stored key `>= key`.
    fn seek(&self, key: u128) -> Option<u128>;
    fn cursor(&self) -> Self::Cursor<'_>;
    /// Keys in `[lo, hi]`, ascending.
    fn iter_range(&self, lo: u128, hi: u128) -> Box<dyn Iterator<Item = u128> + '_>;
    fn count_range(&self, lo: u128, hi: u128) -> u64;

    fn contains(&self, key: u128) -> bool {
        self.get(key).is_some()
    }
}

/// Event tallies of one scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounters {
    pub n_get: u64,
    pub n_scan: u64,
    pub n_seek: u64,
    pub n_match: u64,
    pub n_mismatch: u64,
    pub n_hint: u64,
}

impl OpCounters {
    pub fn merge(&mut self, o: &OpCounters) {
        self.n_get += o.n_get;
        self.n_scan += o.n_scan;
        self.n_seek += o.n_seek;
        self.n_match += o.n_match;
        self.n_mismatch += o.n_mismatch;
        self.n_hint += o.n_hint;
    }

    pub fn store_ops(&self) -> u64 {
        self.n_get + self.n_scan + self.n_seek
    }
}

/// Counting view of a store, local to one scan.
pub struct Instrumented<'s, S> {
    inner: &'s S,
    counters: Cell<OpCounters>,
}

impl<'s, S: OrderedStore> Instrumented<'s, S> {
    pub fn new(inner: &'s S) -> Self {
        Self {
            inner,
            counters: Cell::new(OpCounters::default()),
        }
    }

    pub fn inner(&self) -> &'s S {
        self.inner
    }

    #[inline]
    pub(crate) fn bump(&self, f: impl FnOnce(&mut OpCounters)) {
        let mut c = self.counters.get();
        f(&mut c);
        self.counters.set(c);
    }

    pub fn snapshot(&self) -> OpCounters {
        self.counters.get()
    }

    pub fn reset(&self) {
        self.counters.set(OpCounters::default());
    }

    pub fn get(&self, key: u128) -> Option<&'s [u8]> {
        self.bump(|c| c.n_get += 1);
        self.inner.get(key)
    }

    pub fn scan_next(&self, key: u128) -> Option<u128> {
        self.bump(|c| c.n_scan += 1);
        self.inner.scan_next(key)
    }

    pub fn seek(&self, key: u128) -> Option<u128> {
        self.bump(|c| c.n_seek += 1);
        self.inner.seek(key)
    }

    pub fn cursor(&self) -> CountingCursor<'_, S::Cursor<'s>> {
        CountingCursor {
            inner: self.inner.cursor(),
            counters: &self.counters,
        }
    }
}

pub struct CountingCursor<'c, C> {
    inner: C,
    counters: &'c Cell<OpCounters>,
}

impl<C: KeyCursor> KeyCursor for CountingCursor<'_, C> {
    #[inline]
    fn seek(&mut self, key: u128) -> Option<u128> {
        let mut c = self.counters.get();
        c.n_seek += 1;
        self.counters.set(c);
        self.inner.seek(key)
    }

    #[inline]
    fn next(&mut self) -> Option<u128> {
        let mut c = self.counters.get();
        c.n_scan += 1;
        self.counters.set(c);
        self.inner.next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn both(keys: &[u128]) -> (SortedKeys, BTreeStore) {
        (
            SortedKeys::from_keys(8, keys.to_vec()).unwrap(),
            BTreeStore::from_keys(8, keys.iter().copied()).unwrap(),
        )
    }

    fn contract<S: OrderedStore>(s: &S) {
        assert!(s.get(9).is_some());
        assert!(s.get(7).is_none());
        assert_eq!(s.scan_next(5), Some(9));
        assert_eq!(s.scan_next(12), None);
        assert_eq!(s.scan_next(0), Some(5));
        assert_eq!(s.seek(6), Some(9));
        assert_eq!(s.seek(9), Some(9));
        assert_eq!(s.seek(13), None);
        assert_eq!(
            s.stats(),
            KeyStats {
                card: 3,
                min: Some(5),
                max: Some(12)
            }
        );
        let mut c = s.cursor();
        assert_eq!(c.next(), Some(5));
        assert_eq!(c.next(), Some(9));
        assert_eq!(c.seek(10), Some(12));
        assert_eq!(c.next(), None);
        assert_eq!(s.count_range(6, 12), 2);
        assert_eq!(s.iter_range(0, 9).collect::<Vec<_>>(), vec![5, 9]);
    }

    #[test]
    fn small_store_contract() {
        let (a, b) = both(&[12, 5, 9]);
        contract(&a);
        contract(&b);
    }

    #[test]
    fn empty_stores() {
        let (a, b) = both(&[]);
        assert_eq!(a.stats().card, 0);
        assert_eq!(b.stats(), KeyStats::default());
        assert!(a.get(0).is_none());
        assert_eq!(a.cursor().next(), None);
        assert_eq!(b.cursor().seek(0), None);
    }

    #[test]
    fn instrumentation() {
        let (a, _) = both(&[5, 9, 12]);
        let view = Instrumented::new(&a);
        {
            let mut c = view.cursor();
            while c.next().is_some() {}
        }
        // three keys plus the step past the end
        assert_eq!(view.snapshot().n_scan, 4);
        view.seek(3);
        view.get(5);
        assert_eq!(view.snapshot().n_seek, 1);
        assert_eq!(view.snapshot().n_get, 1);
        view.reset();
        assert_eq!(view.snapshot(), OpCounters::default());
    }

    proptest! {
        #[test]
        fn stores_agree(keys in prop::collection::vec(0u128..256, 0..60), probes in prop::collection::vec(0u128..256, 1..30)) {
            let (a, b) = both(&keys);
            prop_assert_eq!(a.stats(), b.stats());
            for &x in &probes {
                prop_assert_eq!(a.seek(x), b.seek(x));
                prop_assert_eq!(a.scan_next(x), b.scan_next(x));
                prop_assert_eq!(a.get(x).is_some(), b.get(x).is_some());
                if x < 255 {
                    prop_assert_eq!(a.scan_next(x), a.seek(x + 1));
                }
            }
            let (mut ca, mut cb) = (a.cursor(), b.cursor());
            for &x in &probes {
                prop_assert_eq!(ca.next(), cb.next());
                if x % 3 == 0 {
                    prop_assert_eq!(ca.seek(x), cb.seek(x));
                }
            }
        }
    }
}
