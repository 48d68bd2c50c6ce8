#![allow(dead_code)]

use grasshopper::{Filter, FilterKind, Mask};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ones(n: u32) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Bit-by-bit gather of the bits of `x` under `mask`, junior first.
pub fn gather(x: u128, mask: u128) -> u128 {
    let mut out = 0u128;
    let mut k = 0;
    for p in 0..128 {
        if mask >> p & 1 == 1 {
            out |= (x >> p & 1) << k;
            k += 1;
        }
    }
    out
}

/// Inverse of [`gather`].
pub fn scatter(v: u128, mask: u128) -> u128 {
    let mut out = 0u128;
    let mut k = 0;
    for p in 0..128 {
        if mask >> p & 1 == 1 {
            out |= (v >> k & 1) << p;
            k += 1;
        }
    }
    out
}

/// Maximal runs of set bits as `(value, head, tail)`, senior first; head is
/// the 1-based top position, tail the count of bits below the run.
pub fn components(mask: u128) -> Vec<(u128, u32, u32)> {
    let mut out = Vec::new();
    let mut p = 0u32;
    while p < 128 {
        if mask >> p & 1 == 1 {
            let tail = p;
            while p < 128 && mask >> p & 1 == 1 {
                p += 1;
            }
            let value = ones(p) & !ones(tail);
            out.push((value, p, tail));
        } else {
            p += 1;
        }
    }
    out.reverse();
    out
}

/// Brute-force evaluation of a filter list on compacted values.
pub fn oracle_accepts(filters: &[Filter], x: u128) -> bool {
    filters.iter().all(|f| {
        let m = f.mask().bits();
        let v = gather(x, m);
        match f.kind() {
            FilterKind::Point(p) => v == gather(*p, m),
            FilterKind::Range(a, b) => gather(*a, m) <= v && v <= gather(*b, m),
            FilterKind::Set(e) => e.iter().any(|s| gather(*s, m) == v),
        }
    })
}

/// Up to `max_filters` point, range and set filters on disjoint random masks.
pub fn random_filters(rng: &mut ChaCha8Rng, n: u32, max_filters: usize) -> Vec<Filter> {
    let mut positions: Vec<u32> = (1..=n).collect();
    positions.shuffle(rng);
    let count = rng.random_range(1..=max_filters);
    let mut out = Vec::new();
    let mut rest = &positions[..];
    for _ in 0..count {
        if rest.is_empty() {
            break;
        }
        let take = rng.random_range(1..=rest.len().min(7));
        let (mine, tail) = rest.split_at(take);
        rest = tail;
        let mask = Mask::from_positions(n, mine.iter().copied()).unwrap();
        let bits = mask.bits();
        let f = match rng.random_range(0..3) {
            0 => Filter::point(mask, rng.random::<u128>() & bits),
            1 => {
                let (a, b) = (rng.random::<u128>() & bits, rng.random::<u128>() & bits);
                let (lo, hi) = if gather(a, bits) <= gather(b, bits) {
                    (a, b)
                } else {
                    (b, a)
                };
                Filter::range(mask, lo, hi)
            }
            _ => {
                let k = rng.random_range(1..=6);
                Filter::set(mask, (0..k).map(|_| rng.random::<u128>() & bits).collect())
            }
        };
        out.push(f.unwrap());
    }
    out
}

/// Rewrites `x` so that it passes every filter.
pub fn plant(rng: &mut ChaCha8Rng, filters: &[Filter], mut x: u128) -> u128 {
    for f in filters {
        let m = f.mask().bits();
        let v = match f.kind() {
            FilterKind::Point(p) => *p,
            FilterKind::Range(a, b) => scatter(rng.random_range(gather(*a, m)..=gather(*b, m)), m),
            FilterKind::Set(e) => e[rng.random_range(0..e.len())],
        };
        x = (x & !m) | v;
    }
    x
}

/// Uniform keys mixed with short runs and keys planted into the locus.
pub fn random_keys(rng: &mut ChaCha8Rng, n: u32, count: usize, filters: &[Filter]) -> Vec<u128> {
    let planted = rng.random_range(0.0..0.6);
    let mut keys = Vec::with_capacity(count);
    while keys.len() < count {
        let x = rng.random::<u128>() & ones(n);
        match rng.random_range(0..10) {
            0 => {
                let run = rng.random_range(1..40u128);
                keys.extend((x..=(x + run).min(ones(n))).take(count - keys.len()));
            }
            _ if rng.random_bool(planted) => keys.push(plant(rng, filters, x)),
            _ => keys.push(x),
        }
    }
    keys
}
