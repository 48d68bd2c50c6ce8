use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::bitkey::{low_ones, BitKey, Mask};
use crate::locus::{frog_gate, tail_of, threshold, FrogGate, RegionDistribution, StoreStats};
use crate::matcher::{Matcher, Triviality};
use crate::store::OrderedStore;

use super::Strategy;

/// Frog when the gate says so, otherwise a grasshopper at the threshold.
pub fn choose_strategy(
    matcher: &Matcher,
    stats: &StoreStats,
    dist: &RegionDistribution,
) -> Strategy {
    choose(matcher, stats, dist).0
}

fn gate_mask(matcher: &Matcher, width: u32) -> Mask {
    Mask::from_raw(matcher.mask().bits() & low_ones(width), width)
}

fn choose(
    matcher: &Matcher,
    stats: &StoreStats,
    dist: &RegionDistribution,
) -> (Strategy, Option<FrogGate>) {
    if matcher.triviality() != Triviality::None || matcher.mask().is_empty() {
        return (Strategy::Crawler, None);
    }
    let gate = frog_gate(gate_mask(matcher, stats.width), stats, dist);
    let strategy = if gate.frog_wins {
        Strategy::Grasshopper(0)
    } else {
        Strategy::Grasshopper(threshold(matcher, stats))
    };
    (strategy, Some(gate))
}

#[derive(Clone, Debug, Serialize)]
pub struct Plan {
    #[serde(serialize_with = "serialize_strategy")]
    pub strategy: Strategy,
    pub stats: StoreStats,
    pub gate: Option<FrogGate>,
}

fn serialize_strategy<S: serde::Serializer>(s: &Strategy, ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_str(s)
}

type CacheKey = (u128, u128, u32, u32);

/// Strategy selection with region distributions cached per key range and
/// region order. One planner serves one store.
#[derive(Debug, Default)]
pub struct Planner {
    cache: Mutex<HashMap<CacheKey, Arc<RegionDistribution>>>,
}

impl Planner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Distribution of the keys of `[lo, hi]`, reduced to their low
    /// `space_width` bits, over regions of order `tail_bit`.
    pub fn distribution<S: OrderedStore>(
        &self,
        store: &S,
        lo: u128,
        hi: u128,
        space_width: u32,
        tail_bit: u32,
    ) -> Arc<RegionDistribution> {
        let key = (lo, hi, space_width, tail_bit);
        if let Some(d) = self.cache.lock().expect("planner lock").get(&key) {
            return d.clone();
        }
        let low = low_ones(space_width);
        let dist = Arc::new(RegionDistribution::from_sorted_keys(
            space_width,
            tail_bit,
            store.iter_range(lo, hi).map(|k| k & low),
        ));
        self.cache
            .lock()
            .expect("planner lock")
            .insert(key, dist.clone());
        dist
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("planner lock").len()
    }

    /// Plans a scan of the keys in `[lo, hi]`.
    pub fn plan<S: OrderedStore>(
        &self,
        store: &S,
        matcher: &Matcher,
        lo: u128,
        hi: u128,
        r: f64,
    ) -> Plan {
        let width = matcher.width();
        let space = matcher.space_width();
        let card = if lo <= hi {
            store.count_range(lo, hi)
        } else {
            0
        };
        let stats = StoreStats {
            width: space,
            card,
            min_key: store
                .seek(lo)
                .filter(|k| *k <= hi)
                .map(|k| BitKey::from_raw(k, width)),
            max_key: (card > 0)
                .then(|| store.iter_range(lo, hi).last())
                .flatten()
                .map(|k| BitKey::from_raw(k, width)),
            r,
        };
        if matcher.triviality() != Triviality::None || matcher.mask().is_empty() || card == 0 {
            return Plan {
                strategy: Strategy::Crawler,
                stats,
                gate: None,
            };
        }
        let tail = tail_of(matcher.mask().bits());
        let dist = self.distribution(store, lo, hi, space, tail);
        let (strategy, gate) = choose(matcher, &stats, &dist);
        Plan {
            strategy,
            stats,
            gate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::Filter;
    use crate::store::SortedKeys;

    fn point(width: u32, positions: &[u32], pattern: u128) -> Matcher {
        let m = Mask::from_positions(width, positions.iter().copied()).unwrap();
        Matcher::from_filters(width, &[Filter::point(m, pattern).unwrap()]).unwrap()
    }

    #[test]
    fn f1_dense_store_prefers_frog() {
        let s = SortedKeys::from_keys(6, (0..64).collect()).unwrap();
        let m = point(6, &[1, 3, 5], 17);
        let planner = Planner::new();
        // R1 = 0.125 on this fixture
        let p = planner.plan(&s, &m, 0, 63, 0.2);
        assert_eq!(p.strategy, Strategy::Grasshopper(0));
        assert!(p.gate.unwrap().frog_wins);
        planner.plan(&s, &m, 0, 63, 0.05);
        assert_eq!(planner.cached(), 1);
    }

    #[test]
    fn junior_bit_mask_crawls() {
        let s = SortedKeys::from_keys(8, (0..256).step_by(3).collect()).unwrap();
        let m = point(8, &[1], 1);
        let p = Planner::new().plan(&s, &m, 0, 255, 0.5);
        assert_eq!(p.strategy, Strategy::Grasshopper(8));
    }

    #[test]
    fn sparse_store_with_high_tail_mask() {
        let width = 20;
        let keys: Vec<u128> = (0..4096u128).map(|i| i * 255 + i % 7).collect();
        let s = SortedKeys::from_keys(width, keys).unwrap();
        let m = point(width, &[2, 3, 12, 13, 14], 0b11 << 1);
        let p = Planner::new().plan(&s, &m, 0, low_ones(width), 0.5);
        match p.strategy {
            Strategy::Grasshopper(t) => assert_eq!(t, 11),
            other => panic!("unexpected {other}"),
        }
    }
}
