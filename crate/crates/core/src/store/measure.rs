use std::hint::black_box;
use std::time::Instant;

use super::{KeyCursor, OrderedStore};

const STRIDE: u64 = 0x9e37_79b9_7f4a_7c15;

/// Median of [`scan_seek_samples`].
pub fn measure_scan_seek_ratio<S: OrderedStore>(
    store: &S,
    ops: usize,
    trials: usize,
) -> Option<f64> {
    let mut ratios = scan_seek_samples(store, ops, trials)?;
    ratios.sort_by(f64::total_cmp);
    Some(ratios[ratios.len() / 2])
}

/// Per trial, the cost of one cursor step divided by the cost of one seek to
/// a scattered stored key. `None` for stores with fewer than two keys.
pub fn scan_seek_samples<S: OrderedStore>(
    store: &S,
    ops: usize,
    trials: usize,
) -> Option<Vec<f64>> {
    let stats = store.stats();
    let (lo, hi) = (stats.min?, stats.max?);
    let keys: Vec<u128> = store.iter_range(lo, hi).collect();
    if keys.len() < 2 || ops == 0 || trials == 0 {
        return None;
    }
    let len = keys.len() as u64;
    let ratios: Vec<f64> = (0..trials as u64)
        .map(|trial| {
            let targets: Vec<u128> = (0..ops as u64)
                .map(|i| keys[((i + 1 + trial * ops as u64).wrapping_mul(STRIDE) % len) as usize])
                .collect();

            let mut cursor = store.cursor();
            cursor.seek(lo);
            let started = Instant::now();
            for _ in 0..ops {
                if black_box(cursor.next()).is_none() {
                    cursor.seek(lo);
                }
            }
            let scan = started.elapsed().as_secs_f64();

            let mut cursor = store.cursor();
            let started = Instant::now();
            for t in &targets {
                black_box(cursor.seek(*t));
            }
            let seek = started.elapsed().as_secs_f64();
            scan / seek.max(f64::MIN_POSITIVE)
        })
        .collect();
    Some(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::SortedKeys;

    #[test]
    fn ratio_is_positive_and_finite() {
        let s = SortedKeys::from_keys(20, (0..20_000u128).map(|i| i * 37 % (1 << 20)).collect())
            .unwrap();
        let r = measure_scan_seek_ratio(&s, 2_000, 3).unwrap();
        assert!(r > 0.0 && r.is_finite());
        let one = SortedKeys::from_keys(4, vec![3]).unwrap();
        assert!(measure_scan_seek_ratio(&one, 10, 1).is_none());
    }
}
