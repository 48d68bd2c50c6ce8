use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use grasshopper::Layout;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

/// Value distribution of generated rows, per dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueDistribution {
    Uniform,
    /// Zipf with exponent `s`; small values are the frequent ones.
    Zipf(f64),
    /// Rows scattered around this many random centers.
    Clustered(usize),
}

impl FromStr for ValueDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("uniform", None) => Ok(Self::Uniform),
            ("zipf", Some(a)) => match a.parse::<f64>() {
                Ok(v) if v > 0.0 => Ok(Self::Zipf(v)),
                _ => Err(format!(
                    "zipf exponent must be a positive number, got `{a}`"
                )),
            },
            ("clustered", Some(a)) => match a.parse::<usize>() {
                Ok(k) if k > 0 => Ok(Self::Clustered(k)),
                _ => Err(format!(
                    "cluster count must be a positive integer, got `{a}`"
                )),
            },
            _ => Err(format!(
                "unknown distribution `{s}`; use uniform, zipf:S or clustered:K"
            )),
        }
    }
}

impl fmt::Display for ValueDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform => f.write_str("uniform"),
            Self::Zipf(s) => write!(f, "zipf:{s}"),
            Self::Clustered(k) => write!(f, "clustered:{k}"),
        }
    }
}

/// `rows` random keys, deduplicated and sorted.
pub fn generate(
    layout: &Layout,
    rows: usize,
    dist: ValueDistribution,
    seed: u64,
) -> Result<Vec<u128>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cards: Vec<u128> = layout
        .dimensions()
        .iter()
        .map(|d| d.cardinality())
        .collect();
    if cards.iter().any(|c| *c > 1u128 << 64) {
        bail!("generated dimensions are limited to 64 bits");
    }
    let top = |c: u128| (c - 1) as u64;
    let mut keys = Vec::with_capacity(rows);
    match dist {
        ValueDistribution::Uniform => {
            for _ in 0..rows {
                let values: Vec<u64> = cards
                    .iter()
                    .map(|c| rng.random_range(0..=top(*c)))
                    .collect();
                keys.push(layout.compose(&values)?.value());
            }
        }
        ValueDistribution::Zipf(s) => {
            let zipfs = cards
                .iter()
                .map(|c| Zipf::new(*c as f64, s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| anyhow::anyhow!("zipf: {e}"))?;
            for _ in 0..rows {
                let values: Vec<u64> = zipfs
                    .iter()
                    .zip(&cards)
                    .map(|(z, c)| (z.sample(&mut rng) as u64).saturating_sub(1).min(top(*c)))
                    .collect();
                keys.push(layout.compose(&values)?.value());
            }
        }
        ValueDistribution::Clustered(k) => {
            let centers: Vec<Vec<u64>> = (0..k)
                .map(|_| {
                    cards
                        .iter()
                        .map(|c| rng.random_range(0..=top(*c)))
                        .collect()
                })
                .collect();
            for _ in 0..rows {
                let center = &centers[rng.random_range(0..k)];
                let values: Vec<u64> = center
                    .iter()
                    .zip(&cards)
                    .map(|(v, c)| {
                        let spread = (c >> 5).max(1) as i128;
                        let off = rng.random_range(-spread..=spread);
                        (*v as i128 + off).clamp(0, top(*c) as i128) as u64
                    })
                    .collect();
                keys.push(layout.compose(&values)?.value());
            }
        }
    }
    keys.sort_unstable();
    keys.dedup();
    Ok(keys)
}
