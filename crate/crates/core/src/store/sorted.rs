use crate::bitkey::low_ones;
use crate::error::{Error, Result};

use super::{KeyCursor, KeyStats, OrderedStore};

/// Sorted array of keys with binary-search Seek.
#[derive(Clone, Debug, Default)]
pub struct SortedKeys {
    width: u32,
    keys: Vec<u128>,
    payloads: Option<Vec<Box<[u8]>>>,
}

fn check_keys(width: u32, keys: &[u128]) -> Result<()> {
    if !(1..=128).contains(&width) {
        return Err(Error::WidthOutOfRange(width));
    }
    if let Some(k) = keys.iter().find(|k| **k & !low_ones(width) != 0) {
        return Err(Error::Format(format!("key {k:#x} exceeds {width} bits")));
    }
    Ok(())
}

impl SortedKeys {
    /// Sorts and deduplicates.
    pub fn from_keys(width: u32, mut keys: Vec<u128>) -> Result<Self> {
        check_keys(width, &keys)?;
        keys.sort_unstable();
        keys.dedup();
        Ok(Self {
            width,
            keys,
            payloads: None,
        })
    }

    /// Takes keys already strictly increasing.
    pub fn from_sorted(width: u32, keys: Vec<u128>) -> Result<Self> {
        check_keys(width, &keys)?;
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("keys are not strictly increasing".into()));
        }
        Ok(Self {
            width,
            keys,
            payloads: None,
        })
    }

    /// Later duplicates of a key are dropped.
    pub fn from_entries(width: u32, mut entries: Vec<(u128, Vec<u8>)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by_key(|e| e.0);
        let (keys, payloads): (Vec<u128>, Vec<Box<[u8]>>) = entries
            .into_iter()
            .map(|(k, v)| (k, v.into_boxed_slice()))
            .unzip();
        check_keys(width, &keys)?;
        Ok(Self {
            width,
            keys,
            payloads: Some(payloads),
        })
    }

    pub fn keys(&self) -> &[u128] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    fn lower_bound(&self, key: u128) -> usize {
        self.keys.partition_point(|k| *k < key)
    }
}

impl OrderedStore for SortedKeys {
    type Cursor<'a> = SortedCursor<'a>;

    fn width(&self) -> u32 {
        self.width
    }

    fn stats(&self) -> KeyStats {
        KeyStats {
            card: self.keys.len() as u64,
            min: self.keys.first().copied(),
            max: self.keys.last().copied(),
        }
    }

    fn get(&self, key: u128) -> Option<&[u8]> {
        let i = self.keys.binary_search(&key).ok()?;
        Some(self.payloads.as_ref().map_or(&[][..], |p| &p[i]))
    }

    fn scan_next(&self, key: u128) -> Option<u128> {
        let i = self.keys.partition_point(|k| *k <= key);
        self.keys.get(i).copied()
    }

    fn seek(&self, key: u128) -> Option<u128> {
        self.keys.get(self.lower_bound(key)).copied()
    }

    fn cursor(&self) -> SortedCursor<'_> {
        SortedCursor {
            keys: &self.keys,
            pos: None,
        }
    }

    fn iter_range(&self, lo: u128, hi: u128) -> Box<dyn Iterator<Item = u128> + '_> {
        let start = self.lower_bound(lo);
        Box::new(
            self.keys[start..]
                .iter()
                .copied()
                .take_while(move |k| *k <= hi),
        )
    }

    fn count_range(&self, lo: u128, hi: u128) -> u64 {
        if lo > hi {
            return 0;
        }
        let start = self.lower_bound(lo);
        let end = self.keys.partition_point(|k| *k <= hi);
        (end - start) as u64
    }
}

pub struct SortedCursor<'a> {
    keys: &'a [u128],
    pos: Option<usize>,
}

impl KeyCursor for SortedCursor<'_> {
    fn seek(&mut self, key: u128) -> Option<u128> {
        let from = match self.pos {
            Some(p) if p < self.keys.len() && self.keys[p] <= key => p,
            _ => 0,
        };
        // Gallop forward from the current position, then bisect.
        let rest = &self.keys[from..];
        let mut step = 1;
        while step < rest.len() && rest[step] < key {
            step *= 2;
        }
        let lo = step / 2;
        let hi = (step + 1).min(rest.len());
        let idx = from + lo + rest[lo..hi].partition_point(|k| *k < key);
        self.pos = Some(idx);
        self.keys.get(idx).copied()
    }

    fn next(&mut self) -> Option<u128> {
        let idx = self.pos.map_or(0, |p| (p + 1).min(self.keys.len()));
        self.pos = Some(idx);
        self.keys.get(idx).copied()
    }
}
