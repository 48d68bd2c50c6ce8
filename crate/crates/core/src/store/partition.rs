use serde::Serialize;

use crate::bitkey::{above, low_ones, top_bit, Mask};
use crate::error::{Error, Result};

use super::{KeyStats, OrderedStore};

/// How a store is cut into key ranges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionPolicy {
    /// A power-of-two count of equal ranges over the whole key space.
    EqualRanges(u32),
    /// Consecutive runs of at most this many keys.
    TargetSize(usize),
}

/// An inclusive key range and the senior bit-run its keys share.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub lo: u128,
    pub hi: u128,
    pub stats: KeyStats,
    #[serde(skip)]
    pub prefix_mask: Mask,
    pub prefix: u128,
}

impl Partition {
    fn new<S: OrderedStore>(store: &S, lo: u128, hi: u128) -> Self {
        let width = store.width();
        let bits = if lo == hi {
            low_ones(width)
        } else {
            low_ones(width) & above(top_bit(lo ^ hi))
        };
        let card = store.count_range(lo, hi);
        let (min, max) = if card == 0 {
            (None, None)
        } else {
            let min = store.seek(lo);
            let max = store.iter_range(lo, hi).last();
            (min, max)
        };
        Self {
            lo,
            hi,
            stats: KeyStats { card, min, max },
            prefix_mask: Mask::from_raw(bits, width),
            prefix: lo & bits,
        }
    }

    pub fn prefix_width(&self) -> u32 {
        self.prefix_mask.dims()
    }
}

/// A store together with a fixed cut into partitions.
#[derive(Clone, Debug)]
pub struct PartitionedStore<S> {
    store: S,
    partitions: Vec<Partition>,
}

impl<S: OrderedStore> PartitionedStore<S> {
    pub fn new(store: S, policy: PartitionPolicy) -> Result<Self> {
        let width = store.width();
        let partitions = match policy {
            PartitionPolicy::EqualRanges(count) => {
                if count == 0 || !count.is_power_of_two() || count.trailing_zeros() > width {
                    return Err(Error::Contract(format!(
                        "cannot split {width}-bit keys into {count} equal ranges"
                    )));
                }
                let k = count.trailing_zeros();
                let span_bits = width - k;
                (0..count as u128)
                    .map(|i| {
                        let lo = if span_bits >= 128 { 0 } else { i << span_bits };
                        Partition::new(&store, lo, lo | low_ones(span_bits))
                    })
                    .collect()
            }
            PartitionPolicy::TargetSize(size) => {
                if size == 0 {
                    return Err(Error::Contract("partition size must be positive".into()));
                }
                let stats = store.stats();
                let starts: Vec<u128> =
                    store.iter_range(0, low_ones(width)).step_by(size).collect();
                let mut out = Vec::with_capacity(starts.len());
                for (i, &lo) in starts.iter().enumerate() {
                    let hi = match starts.get(i + 1) {
                        Some(next) => next - 1,
                        None => stats.max.expect("nonempty store"),
                    };
                    out.push(Partition::new(&store, lo, hi));
                }
                out
            }
        };
        Ok(Self { store, partitions })
    }

    pub fn store(&self) -> &S {
        &self.store
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn into_inner(self) -> S {
        self.store
    }
}
