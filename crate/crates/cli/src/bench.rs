use std::collections::BTreeSet;

use anyhow::{bail, Result};
use grasshopper::{Layout, Matcher};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::{parse, Clause, Predicate, Query};
use crate::runner::{Executor, StrategyArg};

/// Filter templates: `point:DIM` (every value, or a sample of them),
/// `range:DIM:LEN` (sampled ranges of LEN values), or a literal filter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub template: String,
    pub strategies: Vec<StrategyArg>,
    pub repetitions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchMatrix {
    pub cells: Vec<MatrixCell>,
}

impl BenchMatrix {
    /// A point template for every dimension.
    pub fn all_points(layout: &Layout, strategies: &[StrategyArg], repetitions: usize) -> Self {
        Self {
            cells: layout
                .dimensions()
                .iter()
                .map(|d| MatrixCell {
                    template: format!("point:{}", d.name),
                    strategies: strategies.to_vec(),
                    repetitions,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.cells {
            if c.repetitions < 3 {
                bail!(
                    "cell `{}` has {} repetitions; dropping the fastest and slowest run needs at least 3",
                    c.template,
                    c.repetitions
                );
            }
            if c.strategies.is_empty() {
                bail!("cell `{}` lists no strategies", c.template);
            }
        }
        Ok(())
    }
}

/// Mean after dropping one minimum and one maximum.
pub fn trimmed_mean(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let inner = &s[1..s.len() - 1];
    inner.iter().sum::<f64>() / inner.len() as f64
}

fn cardinality(layout: &Layout, dim: &str) -> Result<u128> {
    let i = layout.dim_index(dim)?;
    Ok(layout.dimensions()[i].cardinality())
}

pub fn instantiate(
    template: &str,
    layout: &Layout,
    max_filters: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Query>> {
    let single = |dim: &str, predicate: Predicate| Query {
        clauses: vec![Clause {
            dim: dim.to_string(),
            predicate,
        }],
    };
    let parts: Vec<&str> = template.split(':').collect();
    match parts.as_slice() {
        ["point", dim] => {
            let card = cardinality(layout, dim)?;
            let values: Vec<u64> = if card <= max_filters as u128 {
                (0..card as u64).collect()
            } else {
                let mut picked = BTreeSet::new();
                while picked.len() < max_filters {
                    picked.insert(rng.random_range(0..card) as u64);
                }
                picked.into_iter().collect()
            };
            Ok(values
                .into_iter()
                .map(|v| single(dim, Predicate::Eq(v)))
                .collect())
        }
        ["range", dim, len] => {
            let card = cardinality(layout, dim)?;
            let len: u128 = len
                .parse()
                .map_err(|_| anyhow::anyhow!("bad range length `{len}`"))?;
            if len == 0 || len > card {
                bail!("range length {len} does not fit dimension `{dim}`");
            }
            let starts = card - len + 1;
            let picks: Vec<u128> = if starts <= max_filters as u128 {
                (0..starts).collect()
            } else {
                sample(rng, starts.min(usize::MAX as u128) as usize, max_filters)
                    .into_iter()
                    .map(|i| i as u128)
                    .collect()
            };
            Ok(picks
                .into_iter()
                .map(|lo| single(dim, Predicate::Range(lo as u64, (lo + len - 1) as u64)))
                .collect())
        }
        _ => Ok(vec![parse(template)?]),
    }
}

/// One row per (cell, strategy).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchRow {
    pub template: String,
    pub strategy: String,
    pub filters: usize,
    pub repetitions: usize,
    pub result_count: u64,
    pub n_seek: u64,
    pub n_scan: u64,
    pub n_get: u64,
    pub n_match: u64,
    pub n_mismatch: u64,
    pub n_hint: u64,
    pub jumps: u64,
    pub crawls: u64,
    /// Sum over filters of the trimmed mean wall time.
    pub wall_ns: f64,
    pub modeled_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    pub template: String,
    pub filter: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub r: f64,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    pub divergences: Vec<Divergence>,
}

/// Runs a matrix. Result counts are compared across strategies for every
/// filter and key bags for `bag_checks` sampled filters per cell.
pub fn run_matrix(
    exec: &Executor<'_>,
    matrix: &BenchMatrix,
    max_filters: usize,
    bag_checks: usize,
    seed: u64,
) -> Result<BenchReport> {
    matrix.validate()?;
    let layout = &exec.dataset.layout;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut divergences = Vec::new();
    for cell in &matrix.cells {
        let queries = instantiate(&cell.template, layout, max_filters, &mut rng)?;
        let matchers: Vec<Matcher> = queries
            .iter()
            .map(|q| {
                Ok(Matcher::from_filters(
                    layout.width(),
                    &q.to_filters(layout)?,
                )?)
            })
            .collect::<Result<_>>()?;
        let checked: BTreeSet<usize> =
            sample(&mut rng, queries.len(), bag_checks.min(queries.len()))
                .into_iter()
                .collect();
        let mut counts: Vec<Option<u64>> = vec![None; queries.len()];
        let mut bags: Vec<Option<Vec<u128>>> = vec![None; queries.len()];
        for &arg in &cell.strategies {
            let mut row = BenchRow {
                template: cell.template.clone(),
                strategy: format!("{arg:?}").to_lowercase(),
                filters: queries.len(),
                repetitions: cell.repetitions,
                ..BenchRow::default()
            };
            for (i, m) in matchers.iter().enumerate() {
                let mut walls = Vec::with_capacity(cell.repetitions);
                let mut first = None;
                for _ in 0..cell.repetitions {
                    let rep = exec.run(m, arg, false)?;
                    walls.push(rep.wall_ns as f64);
                    first.get_or_insert(rep);
                }
                let rep = first.expect("at least one repetition");
                row.wall_ns += trimmed_mean(&walls);
                row.result_count += rep.result_count;
                row.n_seek += rep.counters.n_seek;
                row.n_scan += rep.counters.n_scan;
                row.n_get += rep.counters.n_get;
                row.n_match += rep.counters.n_match;
                row.n_mismatch += rep.counters.n_mismatch;
                row.n_hint += rep.counters.n_hint;
                row.jumps += rep.jumps;
                row.crawls += rep.crawls;
                row.modeled_cost +=
                    rep.counters.n_seek as f64 + exec.r * rep.counters.n_scan as f64;

                match counts[i] {
                    Some(c) if c != rep.result_count => divergences.push(Divergence {
                        template: cell.template.clone(),
                        filter: queries[i].to_string(),
                        detail: format!(
                            "{} found {} rows, earlier strategies {c}",
                            row.strategy, rep.result_count
                        ),
                    }),
                    Some(_) => {}
                    None => counts[i] = Some(rep.result_count),
                }
                if checked.contains(&i) {
                    let keys = exec.run(m, arg, true)?.keys;
                    match &bags[i] {
                        Some(b) if *b != keys => divergences.push(Divergence {
                            template: cell.template.clone(),
                            filter: queries[i].to_string(),
                            detail: format!("{} returned a different key bag", row.strategy),
                        }),
                        Some(_) => {}
                        None => bags[i] = Some(keys),
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(BenchReport {
        r: exec.r,
        seed,
        rows,
        divergences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use grasshopper::{build_layout, Dimension, LayoutStrategy};

    #[test]
    fn trimmed_mean_drops_extremes() {
        let reps: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(trimmed_mean(&reps), (2..=9).sum::<i32>() as f64 / 8.0);
        assert_eq!(trimmed_mean(&[5.0, 1.0, 100.0]), 5.0);
    }

    #[test]
    fn templates() {
        let layout = build_layout(
            vec![Dimension::new("Y", 3), Dimension::new("X", 3)],
            LayoutStrategy::InterleaveByCardinality,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            instantiate("point:X", &layout, 100, &mut rng)
                .unwrap()
                .len(),
            8
        );
        assert_eq!(
            instantiate("point:X", &layout, 5, &mut rng).unwrap().len(),
            5
        );
        let ranges = instantiate("range:Y:3", &layout, 100, &mut rng).unwrap();
        assert_eq!(ranges.len(), 6);
        assert_eq!(ranges[5].to_string(), "Y IN [5,7]");
        assert_eq!(
            instantiate("X=1 AND Y=2", &layout, 5, &mut rng)
                .unwrap()
                .len(),
            1
        );
        assert!(instantiate("range:Y:9", &layout, 5, &mut rng).is_err());
        assert!(instantiate("point:W", &layout, 5, &mut rng).is_err());

        let m = BenchMatrix::all_points(&layout, &[StrategyArg::Crawler], 2);
        assert!(m.validate().is_err());
        assert_eq!(
            BenchMatrix::all_points(&layout, &[StrategyArg::Crawler], 3)
                .cells
                .len(),
            2
        );
    }
}
