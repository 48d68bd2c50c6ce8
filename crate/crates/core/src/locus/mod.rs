//! Locus geometry and strategy analytics.
//!
//! Region orders and mask tails here follow the cluster convention: the tail
//! of a mask is its number of trailing zero bits, so clusters of a point
//! locus have length `2^tail`, while heads stay 1-based.

mod region;

pub use region::{co_frequency, frog_gate, FrogGate, RegionDistribution};

use serde::Serialize;

use crate::bitkey::{compress, low_ones, runs, top_bit, BitKey, Mask};
use crate::error::{Error, Result};
use crate::matcher::{FilterKind, Matcher, Triviality};

#[inline]
pub(crate) fn tail_of(bits: u128) -> u32 {
    bits.trailing_zeros()
}

fn pow2(k: u32) -> u128 {
    1u128 << k
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointLocusStats {
    pub cluster_count: u128,
    pub cluster_len: u128,
    pub spread: u128,
    pub total_lacunae: u128,
    /// Partial sums, most senior component first.
    pub sigmas: Vec<u128>,
    /// `(length, count)` of the lacunae between consecutive clusters, by length.
    pub lacunae: Vec<(u128, u128)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RangeLocusStats {
    pub spread: u128,
    pub total_lacunae: u128,
    /// Number of admissible values of the masked bits.
    pub r: u128,
    pub sigmas: Vec<u128>,
}

/// Suffix sums of per-component contributions, senior first.
fn suffix_sums(parts: &[u128]) -> Vec<u128> {
    let mut out = vec![0u128; parts.len()];
    let mut acc = 0u128;
    for (i, p) in parts.iter().enumerate().rev() {
        acc += p;
        out[i] = acc;
    }
    out
}

pub fn point_locus_stats(m: Mask) -> Result<PointLocusStats> {
    if m.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = m.width();
    let bits = m.bits();
    let d = m.dims();
    let tail = tail_of(bits);
    let comps = runs(bits);
    let sigmas = suffix_sums(&comps);
    let spread = (low_ones(n) & !bits) + 1;
    let total_lacunae = spread - pow2(n - d);

    let free = low_ones(n) & !bits & !low_ones(tail);
    let f_count = free.count_ones();
    let mut lacunae: Vec<(u128, u128)> = Vec::new();
    let mut rest = free;
    let mut rank = 0;
    while rest != 0 {
        let f = rest.trailing_zeros() + 1;
        rest &= rest - 1;
        let len = bits & low_ones(f - 1);
        let count = pow2(f_count - rank - 1);
        match lacunae.iter_mut().find(|(l, _)| *l == len) {
            Some(entry) => entry.1 += count,
            None => lacunae.push((len, count)),
        }
        rank += 1;
    }
    lacunae.sort_unstable();

    Ok(PointLocusStats {
        cluster_count: pow2(n - d - tail),
        cluster_len: pow2(tail),
        spread,
        total_lacunae,
        sigmas,
        lacunae,
    })
}

fn range_sigmas(bits: u128, a: u128, b: u128) -> Vec<u128> {
    let parts: Vec<u128> = runs(bits).iter().map(|c| (a & c) + (!b & c)).collect();
    suffix_sums(&parts)
}

/// Range `[a, b]` on `m`, values in place. The range must already be reduced.
pub fn range_locus_stats(m: Mask, a: u128, b: u128) -> Result<RangeLocusStats> {
    let bits = m.bits();
    if bits == 0 {
        return Err(Error::EmptyMask);
    }
    if (a | b) & !bits != 0 || a > b {
        return Err(Error::InvalidFilter(format!(
            "[{a}, {b}] is not a range on {m}"
        )));
    }
    let senior = bit_at(top_bit(bits));
    let complete = a == 0 && b == bits;
    if a == b || (a ^ b) & senior == 0 || complete {
        return Err(Error::Factorizable);
    }
    let n = m.width();
    let d = m.dims();
    let r = compress(b, bits) - compress(a, bits) + 1;
    let spread = (b | (low_ones(n) & !bits)) - a + 1;
    Ok(RangeLocusStats {
        spread,
        total_lacunae: spread - r * pow2(n - d),
        r,
        sigmas: range_sigmas(bits, a, b),
    })
}

fn bit_at(j: u32) -> u128 {
    1u128 << (j - 1)
}

/// Store statistics used by the strategy analytics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StoreStats {
    pub width: u32,
    pub card: u64,
    pub min_key: Option<BitKey>,
    pub max_key: Option<BitKey>,
    /// Cost of a Scan relative to a Seek.
    pub r: f64,
}

/// Per-restriction `(sigmas, component masks)` of a matcher.
fn restriction_sigmas(matcher: &Matcher) -> Vec<(Vec<u128>, Vec<u128>)> {
    let mut out = Vec::new();
    for f in matcher.filters() {
        let bits = f.mask().bits();
        let comps = runs(bits);
        let sigmas = match f.kind() {
            FilterKind::Point(_) => suffix_sums(&comps),
            FilterKind::Range(a, b) => range_sigmas(bits, *a, *b),
            FilterKind::Set(e) => range_sigmas(bits, e[0], e[e.len() - 1]),
        };
        out.push((sigmas, comps));
    }
    out
}

/// Jump threshold by the largest-lacuna rule, per restriction, minimized.
/// Returns the full width when no lacuna is worth a jump.
pub fn threshold(matcher: &Matcher, stats: &StoreStats) -> u32 {
    let n = matcher.width();
    if matcher.triviality() != Triviality::None || stats.card == 0 || stats.r <= 0.0 {
        return n;
    }
    let limit = 2f64.powi(matcher.space_width() as i32) / (stats.card as f64 * stats.r);
    restriction_sigmas(matcher)
        .iter()
        .filter_map(|(sigmas, comps)| {
            sigmas
                .iter()
                .rposition(|s| *s as f64 > limit)
                .map(|j0| tail_of(comps[j0]))
        })
        .min()
        .unwrap_or(n)
}

/// `⌈n − log2(card·R)⌉` clamped to `[0, n]`.
pub fn analytic_threshold(n: u32, card: u64, r: f64) -> u32 {
    if card == 0 || r <= 0.0 {
        return n;
    }
    let t = (n as f64 - (card as f64 * r).log2()).ceil();
    t.clamp(0.0, n as f64) as u32
}

/// Op tallies of the cost model: crawler mismatches, frog jumps,
/// grasshopper jumps and grasshopper crawls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostCounters {
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
}

/// Costs in units of one Seek.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeledCost {
    pub crawler: f64,
    pub frog: f64,
    pub grasshopper: f64,
}

pub fn modeled_cost(c: CostCounters, r: f64) -> ModeledCost {
    ModeledCost {
        crawler: c.n0 as f64 * r,
        frog: c.n1 as f64,
        grasshopper: c.n2 as f64 + c.n3 as f64 * r,
    }
}
