//! Crawler, frog and grasshopper scans.

mod partitioned;
mod plan;

pub use partitioned::{run_partitioned, scan_partitions};
pub use plan::{choose_strategy, Plan, Planner};

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::locus::CostCounters;
use crate::matcher::{Matcher, Triviality};
use crate::store::{Instrumented, KeyCursor, OpCounters, OrderedStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Scan every key in the bounding interval.
    Crawler,
    /// Jump to the hint on every mismatch.
    Frog,
    /// Jump when the mismatch position exceeds the threshold, else scan.
    Grasshopper(u32),
    /// Pick by the frog gate and the threshold rule.
    Auto,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Crawler => write!(f, "crawler"),
            Strategy::Frog => write!(f, "frog"),
            Strategy::Grasshopper(t) => write!(f, "grasshopper({t})"),
            Strategy::Auto => write!(f, "auto"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Keep matched keys in the report, not just their count.
    pub collect_keys: bool,
    /// Get the payload of every matched key.
    pub fetch_values: bool,
    /// Scan-to-seek cost ratio used by `Auto`.
    pub scan_seek_ratio: f64,
    /// Shared cache of region distributions for `Auto`.
    pub planner: Option<Arc<Planner>>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            collect_keys: true,
            fetch_values: false,
            scan_seek_ratio: 0.5,
            planner: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ScanReport {
    pub strategy: String,
    pub threshold: Option<u32>,
    pub result_count: u64,
    #[serde(skip)]
    pub keys: Vec<u128>,
    #[serde(flatten)]
    pub counters: OpCounters,
    /// Keys of the store visited by the loop.
    pub examined: u64,
    /// Mismatch decisions that led to a Hint.
    pub jumps: u64,
    /// Mismatches followed by a Scan.
    pub crawls: u64,
    pub wall_ns: u64,
    pub partitions_visited: u64,
    pub partitions_skipped: u64,
    pub partitions_trivial: u64,
}

impl ScanReport {
    pub fn mismatched(&self) -> u64 {
        self.examined - self.result_count.min(self.examined)
    }

    /// Cost-model tallies: a crawl of this run would pay `n0` Scans.
    pub fn cost_counters(&self) -> CostCounters {
        CostCounters {
            n0: self.mismatched(),
            n1: self.jumps,
            n2: self.jumps,
            n3: self.crawls,
        }
    }

    pub(crate) fn absorb(&mut self, o: ScanReport) {
        self.result_count += o.result_count;
        self.keys.extend(o.keys);
        self.counters.merge(&o.counters);
        self.examined += o.examined;
        self.jumps += o.jumps;
        self.crawls += o.crawls;
        self.partitions_visited += o.partitions_visited;
        self.partitions_skipped += o.partitions_skipped;
        self.partitions_trivial += o.partitions_trivial;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn check_width<S: OrderedStore>(store: &S, matcher: &Matcher) -> Result<()> {
    if store.width() != matcher.width() {
        return Err(Error::WidthMismatch {
            expected: store.width(),
            found: matcher.width(),
        });
    }
    Ok(())
}

pub fn run_scan<S: OrderedStore>(
    store: &S,
    matcher: &Matcher,
    strategy: Strategy,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    check_width(store, matcher)?;
    let started = Instant::now();
    let stats = store.stats();
    let (lo, hi) = match (stats.min, stats.max) {
        (Some(a), Some(b)) => (a, b),
        _ => (1, 0),
    };
    let resolved = match strategy {
        Strategy::Auto => {
            let planner = opts.planner.clone().unwrap_or_default();
            planner
                .plan(store, matcher, lo, hi, opts.scan_seek_ratio)
                .strategy
        }
        s => s,
    };
    let mut report = scan_bounded(store, matcher, resolved, opts, lo, hi);
    if strategy == Strategy::Auto {
        report.strategy = format!("auto:{}", report.strategy);
    }
    report.wall_ns = started.elapsed().as_nanos() as u64;
    Ok(report)
}

fn label(strategy: Strategy) -> (String, Option<u32>) {
    let t = match strategy {
        Strategy::Grasshopper(t) => Some(t),
        Strategy::Frog => Some(0),
        _ => None,
    };
    (strategy.to_string(), t)
}

/// Scans keys of `[lo, hi]` that can match, without timing.
pub(crate) fn scan_bounded<S: OrderedStore>(
    store: &S,
    matcher: &Matcher,
    strategy: Strategy,
    opts: &ScanOptions,
    lo: u128,
    hi: u128,
) -> ScanReport {
    let (name, threshold) = label(strategy);
    let mut report = ScanReport {
        strategy: name,
        threshold,
        ..ScanReport::default()
    };
    let view = Instrumented::new(store);
    if let Some(k) = matcher.exact_key() {
        let k = k.value();
        if (lo..=hi).contains(&k) && view.get(k).is_some() {
            report.result_count = 1;
            report.examined = 1;
            if opts.collect_keys {
                report.keys.push(k);
            }
        }
        report.counters = view.snapshot();
        return report;
    }
    let (a, b) = match matcher.bounding_interval() {
        Some((a, b)) => (a.value().max(lo), b.value().min(hi)),
        None => return report,
    };
    if a > b {
        return report;
    }
    let emit = |report: &mut ScanReport, k: u128| {
        report.result_count += 1;
        if opts.collect_keys {
            report.keys.push(k);
        }
        if opts.fetch_values {
            view.get(k);
        }
    };
    let mut cursor = view.cursor();
    let mut x = cursor.seek(a);
    let jump_above = match strategy {
        Strategy::Frog => 0,
        Strategy::Grasshopper(t) if t < matcher.width() => t,
        // No mismatch can exceed the width, so no jump is ever taken.
        _ => u32::MAX,
    };

    if jump_above == u32::MAX || matcher.triviality() == Triviality::AlwaysTrue {
        while let Some(k) = x.filter(|k| *k <= b) {
            report.examined += 1;
            view.bump(|c| c.n_match += 1);
            if matcher.matches_raw(k) {
                emit(&mut report, k);
            } else {
                report.crawls += 1;
            }
            x = cursor.next();
        }
    } else {
        while let Some(k) = x.filter(|k| *k <= b) {
            report.examined += 1;
            view.bump(|c| c.n_mismatch += 1);
            let mm = matcher.mismatch_raw(k);
            if mm == 0 {
                emit(&mut report, k);
                x = cursor.next();
            } else if mm.unsigned_abs() > jump_above {
                report.jumps += 1;
                view.bump(|c| c.n_hint += 1);
                x = match matcher.hint_raw(k, mm) {
                    Some(h) if h <= b => cursor.seek(h),
                    _ => None,
                };
            } else {
                report.crawls += 1;
                x = cursor.next();
            }
        }
    }
    drop(cursor);
    report.counters = view.snapshot();
    report
}
