use serde::Serialize;

use crate::bitkey::{above, below, compress, low_ones, top_bit, Mask};

use super::{tail_of, StoreStats};

/// Distribution of keys over the fundamental regions of one order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionDistribution {
    pub width: u32,
    pub tail_bit: u32,
    pub card: u64,
    /// Nonempty regions as `(index, count)`, ascending.
    pub counts: Vec<(u128, u64)>,
}

impl RegionDistribution {
    /// One pass over keys in ascending order.
    pub fn from_sorted_keys<I: IntoIterator<Item = u128>>(
        width: u32,
        tail_bit: u32,
        keys: I,
    ) -> Self {
        let mut counts: Vec<(u128, u64)> = Vec::new();
        let mut card = 0u64;
        for k in keys {
            card += 1;
            let region = if tail_bit >= 128 { 0 } else { k >> tail_bit };
            match counts.last_mut() {
                Some((r, c)) if *r == region => *c += 1,
                _ => counts.push((region, 1)),
            }
        }
        Self {
            width,
            tail_bit,
            card,
            counts,
        }
    }

    pub fn region_count(&self) -> f64 {
        2f64.powi((self.width - self.tail_bit.min(self.width)) as i32)
    }

    /// Average frequency per region.
    pub fn mean(&self) -> f64 {
        1.0 / self.region_count()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = (u128, f64)> + '_ {
        let card = self.card as f64;
        self.counts.iter().map(move |(i, c)| (*i, *c as f64 / card))
    }

    /// Standard deviation of the frequencies over all regions.
    pub fn sigma(&self) -> f64 {
        if self.card == 0 {
            return 0.0;
        }
        let mean = self.mean();
        let empty = self.region_count() - self.counts.len() as f64;
        let dev: f64 = self
            .frequencies()
            .map(|(_, p)| (p - mean) * (p - mean))
            .sum();
        ((dev + empty * mean * mean) * mean).sqrt()
    }

    /// `Σ kᵢPᵢ` for the given mask.
    pub fn weighted_cofrequency(&self, m: Mask) -> f64 {
        self.frequencies()
            .map(|(i, p)| co_frequency(m, self.tail_bit, i) as f64 * p)
            .sum()
    }
}

/// Number of patterns below a key, `#{p ⊆ m : p < s}`.
fn patterns_below(m: u128, s: u128) -> u128 {
    if s == 0 {
        return 0;
    }
    let v = s - 1;
    let stray = v & !m;
    let largest = if stray == 0 {
        v
    } else {
        let k = top_bit(stray);
        (v & m & above(k)) | (m & below(k))
    };
    compress(largest, m) + 1
}

/// Number of patterns whose locus ends at or before a key,
/// `#{p ⊆ m : p | !m ≤ e}`.
fn patterns_ending_by(m: u128, width: u32, e: u128) -> u128 {
    let co = low_ones(width) & !m;
    let gaps = co & !e;
    if gaps == 0 {
        return compress(e & m, m) + 1;
    }
    let k = top_bit(gaps);
    compress(e & m & above(k), m)
}

/// How many patterns on `m` leave region `index` of order `tail_bit`
/// strictly inside a lacuna of their locus.
pub fn co_frequency(m: Mask, tail_bit: u32, index: u128) -> u128 {
    let bits = m.bits();
    let width = m.width();
    let start = index << tail_bit;
    let end = start | low_ones(tail_bit);
    let before = patterns_below(bits, start);
    let after_from = patterns_ending_by(bits, width, end);
    if before <= after_from {
        return 0;
    }
    // Patterns with keys inside the region form one run of pattern ranks.
    let first_inside = compress(start & bits, bits);
    let last_inside = compress(end & bits, bits);
    let overlap = (before.min(last_inside + 1)).saturating_sub(after_from.max(first_inside));
    before - after_from - overlap
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrogGate {
    pub r1: f64,
    pub r2: f64,
    pub sigma: f64,
    pub sigma0: f64,
    /// Defined only when `sigma < sigma0`.
    pub r2_prime: Option<f64>,
    pub frog_wins: bool,
    pub frog_wins_sufficient: bool,
    /// Set when the store is empty and the verdict is vacuous.
    pub vacuous: bool,
}

/// Frog against crawler for a point restriction on `m`. `dist` is taken at
/// the order `tail(m)`.
pub fn frog_gate(m: Mask, stats: &StoreStats, dist: &RegionDistribution) -> FrogGate {
    let n = m.width() as f64;
    let d = m.dims() as f64;
    let t = tail_of(m.bits()) as f64;
    let r = stats.r;
    if stats.card == 0 {
        return FrogGate {
            r1: 0.0,
            r2: 0.0,
            sigma: 0.0,
            sigma0: f64::INFINITY,
            r2_prime: Some(0.0),
            frog_wins: true,
            frog_wins_sufficient: true,
            vacuous: true,
        };
    }
    let card = stats.card as f64;
    let r1 = (2f64.powf(n - d - t) - 1.0) / (card * (1.0 - 2f64.powf(-d)));
    let r2 = dist.weighted_cofrequency(m) / (2f64.powf(d) - 1.0);
    let a = 1.0 - 2f64.powf(d - n);
    let sigma = dist.sigma();
    let sigma0 = if a > 0.0 {
        2f64.powf(1.0 - 1.5 * (n - t) + 1.5 * (d - n)) / (27f64.sqrt() * a)
    } else {
        f64::INFINITY
    };
    let r2_prime = (sigma < sigma0)
        .then(|| a + 1.5 * (2f64.powf(3.0 * (n - t) + 1.0) * a * a * sigma * sigma).cbrt());
    let frog_wins = r > r1.min(r2);
    let frog_wins_sufficient = match r2_prime {
        Some(rp) => r > r1.min(rp),
        None => r > r1,
    };
    FrogGate {
        r1,
        r2,
        sigma,
        sigma0,
        r2_prime,
        frog_wins,
        frog_wins_sufficient,
        vacuous: false,
    }
}
