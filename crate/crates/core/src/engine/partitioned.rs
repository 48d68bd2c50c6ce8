use std::time::Instant;

use crate::error::Result;
use crate::matcher::{Matcher, Specialization};
use crate::store::{Instrumented, KeyCursor, OrderedStore, Partition, PartitionedStore};

use super::{check_width, scan_bounded, Planner, ScanOptions, ScanReport, Strategy};

fn scan_partition<S: OrderedStore>(
    store: &S,
    part: &Partition,
    matcher: &Matcher,
    strategy: Strategy,
    opts: &ScanOptions,
    planner: &Planner,
) -> Result<ScanReport> {
    let mut report = ScanReport::default();
    let (lo, hi) = match (part.stats.min, part.stats.max) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            report.partitions_skipped = 1;
            return Ok(report);
        }
    };
    match matcher.specialize(part.prefix_mask, part.prefix)? {
        Specialization::TrivialMismatch => {
            report.partitions_skipped = 1;
        }
        Specialization::TrivialMatch => {
            report.partitions_trivial = 1;
            if !opts.collect_keys && !opts.fetch_values {
                report.result_count = part.stats.card;
                return Ok(report);
            }
            let view = Instrumented::new(store);
            {
                let mut cursor = view.cursor();
                let mut x = cursor.seek(lo);
                while let Some(k) = x.filter(|k| *k <= hi) {
                    report.result_count += 1;
                    if opts.collect_keys {
                        report.keys.push(k);
                    }
                    if opts.fetch_values {
                        view.get(k);
                    }
                    x = cursor.next();
                }
            }
            report.counters = view.snapshot();
        }
        Specialization::Reduced(local) => {
            let resolved = match strategy {
                Strategy::Auto => {
                    planner
                        .plan(store, &local, lo, hi, opts.scan_seek_ratio)
                        .strategy
                }
                s => s,
            };
            report = scan_bounded(store, &local, resolved, opts, lo, hi);
            report.partitions_visited = 1;
        }
    }
    Ok(report)
}

/// Per-partition reports, in partition order.
pub fn scan_partitions<S: OrderedStore>(
    store: &PartitionedStore<S>,
    matcher: &Matcher,
    strategy: Strategy,
    opts: &ScanOptions,
    parallelism: usize,
) -> Result<Vec<ScanReport>> {
    check_width(store.store(), matcher)?;
    let planner = opts.planner.clone().unwrap_or_default();
    let inner = store.store();
    let scan = |p: &Partition| scan_partition(inner, p, matcher, strategy, opts, &planner);
    run_all(store.partitions(), parallelism, scan)?
        .into_iter()
        .collect()
}

/// Scans every partition with a matcher specialized to it and merges the
/// reports in partition order. `parallelism` 1 runs sequentially, 0 uses the
/// global thread pool.
pub fn run_partitioned<S: OrderedStore>(
    store: &PartitionedStore<S>,
    matcher: &Matcher,
    strategy: Strategy,
    opts: &ScanOptions,
    parallelism: usize,
) -> Result<ScanReport> {
    let started = Instant::now();
    let parts = scan_partitions(store, matcher, strategy, opts, parallelism)?;
    let mut merged = ScanReport {
        strategy: strategy.to_string(),
        threshold: match strategy {
            Strategy::Grasshopper(t) => Some(t),
            Strategy::Frog => Some(0),
            _ => None,
        },
        ..ScanReport::default()
    };
    for p in parts {
        merged.absorb(p);
    }
    merged.wall_ns = started.elapsed().as_nanos() as u64;
    Ok(merged)
}

#[cfg(feature = "parallel")]
fn run_all<F>(parts: &[Partition], parallelism: usize, scan: F) -> Result<Vec<Result<ScanReport>>>
where
    F: Fn(&Partition) -> Result<ScanReport> + Sync,
{
    use rayon::prelude::*;
    match parallelism {
        1 => Ok(parts.iter().map(scan).collect()),
        0 => Ok(parts.par_iter().map(&scan).collect()),
        k => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| crate::Error::Contract(format!("thread pool: {e}")))?;
            Ok(pool.install(|| parts.par_iter().map(&scan).collect()))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all<F>(parts: &[Partition], _parallelism: usize, scan: F) -> Result<Vec<Result<ScanReport>>>
where
    F: Fn(&Partition) -> Result<ScanReport>,
{
    Ok(parts.iter().map(scan).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitkey::Mask;
    use crate::engine::run_scan;
    use crate::matcher::Filter;
    use crate::store::{PartitionPolicy, SortedKeys};

    fn f1_store(parts: u32) -> PartitionedStore<SortedKeys> {
        let s = SortedKeys::from_keys(6, (0..64).collect()).unwrap();
        PartitionedStore::new(s, PartitionPolicy::EqualRanges(parts)).unwrap()
    }

    fn point(positions: &[u32], pattern: u128) -> Matcher {
        let m = Mask::from_positions(6, positions.iter().copied()).unwrap();
        Matcher::from_filters(6, &[Filter::point(m, pattern).unwrap()]).unwrap()
    }

    #[test]
    fn f1_four_partitions() {
        let p = f1_store(4);
        let m = point(&[1, 3, 5], 17);
        for st in [
            Strategy::Crawler,
            Strategy::Frog,
            Strategy::Grasshopper(3),
            Strategy::Auto,
        ] {
            let r = run_partitioned(&p, &m, st, &ScanOptions::default(), 1).unwrap();
            assert_eq!(r.keys, vec![17, 19, 25, 27, 49, 51, 57, 59]);
            assert_eq!(r.partitions_skipped, 2);
            assert_eq!(r.partitions_visited, 2);
        }
    }

    #[test]
    fn trivially_counted_partitions() {
        let p = f1_store(4);
        let m = point(&[6], 32);
        let opts = ScanOptions {
            collect_keys: false,
            ..ScanOptions::default()
        };
        let r = run_partitioned(&p, &m, Strategy::Frog, &opts, 1).unwrap();
        assert_eq!(r.result_count, 32);
        assert_eq!(r.partitions_trivial, 2);
        assert_eq!(r.partitions_skipped, 2);
        assert_eq!(
            r.counters.store_ops() + r.counters.n_match + r.counters.n_mismatch,
            0
        );

        let listed = run_partitioned(&p, &m, Strategy::Frog, &ScanOptions::default(), 1).unwrap();
        assert_eq!(listed.keys, (32..64).collect::<Vec<_>>());
        assert_eq!(listed.counters.n_match + listed.counters.n_mismatch, 0);
    }

    #[test]
    fn parallelism_is_deterministic() {
        let keys: Vec<u128> = (0..4000u128).map(|i| (i * 7919) % 65_536).collect();
        let s = SortedKeys::from_keys(16, keys).unwrap();
        let p = PartitionedStore::new(s.clone(), PartitionPolicy::EqualRanges(16)).unwrap();
        let mask = Mask::from_positions(16, [2, 5, 9, 14]).unwrap();
        let m = Matcher::from_filters(16, &[Filter::range(mask, 2, 8210).unwrap()]).unwrap();
        let whole = run_scan(&s, &m, Strategy::Crawler, &ScanOptions::default()).unwrap();
        let one =
            run_partitioned(&p, &m, Strategy::Grasshopper(6), &ScanOptions::default(), 1).unwrap();
        let four =
            run_partitioned(&p, &m, Strategy::Grasshopper(6), &ScanOptions::default(), 4).unwrap();
        let global =
            run_partitioned(&p, &m, Strategy::Grasshopper(6), &ScanOptions::default(), 0).unwrap();
        assert_eq!(one.keys, whole.keys);
        assert_eq!(one.keys, four.keys);
        assert_eq!(one.counters, four.counters);
        assert_eq!(one.counters, global.counters);
    }
}
