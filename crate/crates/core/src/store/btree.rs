use std::collections::btree_map::{BTreeMap, Range};
use std::iter::Peekable;

use crate::bitkey::low_ones;
use crate::error::{Error, Result};

use super::{KeyCursor, KeyStats, OrderedStore};

/// Ordered map store.
#[derive(Clone, Debug, Default)]
pub struct BTreeStore {
    width: u32,
    map: BTreeMap<u128, Vec<u8>>,
}

impl BTreeStore {
    pub fn new(width: u32) -> Result<Self> {
        if !(1..=128).contains(&width) {
            return Err(Error::WidthOutOfRange(width));
        }
        Ok(Self {
            width,
            map: BTreeMap::new(),
        })
    }

    pub fn from_keys<I: IntoIterator<Item = u128>>(width: u32, keys: I) -> Result<Self> {
        let mut s = Self::new(width)?;
        for k in keys {
            s.insert(k, Vec::new())?;
        }
        Ok(s)
    }

    /// Replaces the payload of an existing key.
    pub fn insert(&mut self, key: u128, value: Vec<u8>) -> Result<()> {
        if key & !low_ones(self.width) != 0 {
            return Err(Error::Format(format!(
                "key {key:#x} exceeds {} bits",
                self.width
            )));
        }
        self.map.insert(key, value);
        Ok(())
    }
}

impl OrderedStore for BTreeStore {
    type Cursor<'a> = BTreeCursor<'a>;

    fn width(&self) -> u32 {
        self.width
    }

    fn stats(&self) -> KeyStats {
        KeyStats {
            card: self.map.len() as u64,
            min: self.map.keys().next().copied(),
            max: self.map.keys().next_back().copied(),
        }
    }

    fn get(&self, key: u128) -> Option<&[u8]> {
        self.map.get(&key).map(Vec::as_slice)
    }

    fn scan_next(&self, key: u128) -> Option<u128> {
        let start = key.checked_add(1)?;
        self.seek(start)
    }

    fn seek(&self, key: u128) -> Option<u128> {
        self.map.range(key..).next().map(|(k, _)| *k)
    }

    fn cursor(&self) -> BTreeCursor<'_> {
        BTreeCursor {
            map: &self.map,
            iter: self.map.range(..).peekable(),
            started: false,
        }
    }

    fn iter_range(&self, lo: u128, hi: u128) -> Box<dyn Iterator<Item = u128> + '_> {
        if lo > hi {
            return Box::new(std::iter::empty());
        }
        Box::new(self.map.range(lo..=hi).map(|(k, _)| *k))
    }

    fn count_range(&self, lo: u128, hi: u128) -> u64 {
        self.iter_range(lo, hi).count() as u64
    }
}

pub struct BTreeCursor<'a> {
    map: &'a BTreeMap<u128, Vec<u8>>,
    iter: Peekable<Range<'a, u128, Vec<u8>>>,
    started: bool,
}

impl KeyCursor for BTreeCursor<'_> {
    fn seek(&mut self, key: u128) -> Option<u128> {
        self.iter = self.map.range(key..).peekable();
        self.started = true;
        self.iter.peek().map(|(k, _)| **k)
    }

    fn next(&mut self) -> Option<u128> {
        if self.started {
            self.iter.next();
        }
        self.started = true;
        self.iter.peek().map(|(k, _)| **k)
    }
}
