use std::sync::Arc;

use anyhow::{bail, Result};
use clap::ValueEnum;
use grasshopper::engine::Planner;
use grasshopper::locus::{threshold, StoreStats};
use grasshopper::store::{measure_scan_seek_ratio, PartitionPolicy, PartitionedStore, SortedKeys};
use grasshopper::{run_partitioned, run_scan, Matcher, ScanOptions, ScanReport, Strategy};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

pub const DEFAULT_OPS: usize = 10_000;
pub const DEFAULT_TRIALS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Crawler,
    Frog,
    Hopper,
    Auto,
}

/// How queries are executed against one dataset.
pub struct Executor<'d> {
    pub dataset: &'d Dataset,
    pub r: f64,
    threshold: Option<u32>,
    partitions: Option<PartitionedStore<SortedKeys>>,
    parallel: usize,
    planner: Arc<Planner>,
}

impl<'d> Executor<'d> {
    pub fn new(
        dataset: &'d Dataset,
        r_override: Option<f64>,
        threshold: Option<u32>,
        partitions: Option<u32>,
        parallel: usize,
    ) -> Result<Self> {
        let r = match (r_override, &dataset.meta.ratio) {
            (Some(r), _) => r,
            (None, Some(rec)) => rec.r,
            (None, None) => {
                measure_scan_seek_ratio(&dataset.store, DEFAULT_OPS, DEFAULT_TRIALS).unwrap_or(1.0)
            }
        };
        if !(r > 0.0 && r.is_finite()) {
            bail!("scan-to-seek ratio must be positive, got {r}");
        }
        let partitions = match partitions {
            None | Some(1) => None,
            Some(k) => Some(PartitionedStore::new(
                dataset.store.clone(),
                PartitionPolicy::EqualRanges(k),
            )?),
        };
        Ok(Self {
            dataset,
            r,
            threshold,
            partitions,
            parallel,
            planner: Arc::new(Planner::new()),
        })
    }

    pub fn strategy(&self, arg: StrategyArg, matcher: &Matcher) -> Strategy {
        match arg {
            StrategyArg::Crawler => Strategy::Crawler,
            StrategyArg::Frog => Strategy::Frog,
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Hopper => Strategy::Grasshopper(self.threshold.unwrap_or_else(|| {
                let stats = StoreStats {
                    width: matcher.space_width(),
                    card: self.dataset.store.len() as u64,
                    min_key: None,
                    max_key: None,
                    r: self.r,
                };
                threshold(matcher, &stats)
            })),
        }
    }

    pub fn run(
        &self,
        matcher: &Matcher,
        arg: StrategyArg,
        collect_keys: bool,
    ) -> Result<ScanReport> {
        let opts = ScanOptions {
            collect_keys,
            fetch_values: false,
            scan_seek_ratio: self.r,
            planner: Some(self.planner.clone()),
        };
        let strategy = self.strategy(arg, matcher);
        Ok(match &self.partitions {
            Some(p) => run_partitioned(p, matcher, strategy, &opts, self.parallel)?,
            None => run_scan(&self.dataset.store, matcher, strategy, &opts)?,
        })
    }
}
