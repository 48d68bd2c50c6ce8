//! Filter reduction and factorization.
//!
//! Point filters merge into one fixed pattern. Ranges and sets give up their
//! common senior prefix (common pattern for sets) to that fixed pattern; what
//! remains is a non-factorizable residual, dropped entirely when complete.

use crate::bitkey::{above, compress, top_bit, Mask};
use crate::error::{Error, Result};

use super::filter::{Filter, FilterKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triviality {
    None,
    AlwaysTrue,
    AlwaysFalse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedProblem {
    pub width: u32,
    /// Merged point restriction.
    pub fixed: Option<Filter>,
    /// Range and set restrictions on pairwise disjoint masks.
    pub residual: Vec<Filter>,
    pub trivial: Triviality,
}

struct Reducer {
    width: u32,
    fixed_mask: u128,
    fixed_pattern: u128,
    residual: Vec<Filter>,
    contradiction: bool,
}

impl Reducer {
    fn point(&mut self, mask: u128, pattern: u128) {
        let overlap = self.fixed_mask & mask;
        if (self.fixed_pattern ^ pattern) & overlap != 0 {
            self.contradiction = true;
        }
        self.fixed_mask |= mask;
        self.fixed_pattern |= pattern & mask;
    }

    fn range(&mut self, mask: u128, lo: u128, hi: u128) {
        if lo == hi {
            self.point(mask, lo);
            return;
        }
        let j = top_bit(lo ^ hi);
        let prefix = mask & above(j);
        if prefix != 0 {
            self.point(prefix, lo & prefix);
        }
        let suffix = mask & !above(j);
        let (a, b) = (lo & suffix, hi & suffix);
        if a == 0 && b == suffix {
            return;
        }
        self.residual.push(
            Filter::range(Mask::from_raw(suffix, self.width), a, b).expect("suffix is confined"),
        );
    }

    fn set(&mut self, mask: u128, elements: &[u128]) {
        if elements.len() == 1 {
            self.point(mask, elements[0]);
            return;
        }
        let first = elements[0];
        let varying = elements.iter().fold(0u128, |acc, e| acc | (e ^ first));
        let common = mask & !varying;
        if common != 0 {
            self.point(common, first & common);
        }
        let rest = mask & varying;
        // Elements differ only on `rest`, so projection keeps them distinct and sorted.
        let reduced: Vec<u128> = elements.iter().map(|e| e & rest).collect();
        let dims = rest.count_ones();
        if dims < 128 && reduced.len() as u128 == 1u128 << dims {
            return;
        }
        let lo = reduced[0];
        let hi = reduced[reduced.len() - 1];
        let span = compress(hi, rest) - compress(lo, rest) + 1;
        if span == reduced.len() as u128 {
            self.range(rest, lo, hi);
            return;
        }
        self.residual.push(
            Filter::set(Mask::from_raw(rest, self.width), reduced).expect("residue is confined"),
        );
    }
}

pub fn reduce_filters(width: u32, filters: &[Filter]) -> Result<ReducedProblem> {
    let mut seen = 0u128;
    for f in filters {
        if f.mask().width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: f.mask().width(),
            });
        }
        if seen & f.mask().bits() != 0 {
            return Err(Error::OverlappingMasks);
        }
        seen |= f.mask().bits();
    }

    let mut r = Reducer {
        width,
        fixed_mask: 0,
        fixed_pattern: 0,
        residual: Vec::new(),
        contradiction: false,
    };
    for f in filters {
        let mask = f.mask().bits();
        if mask == 0 {
            // A restriction on no bits holds for every key.
            continue;
        }
        match f.kind() {
            FilterKind::Point(p) => r.point(mask, *p),
            FilterKind::Range(a, b) => r.range(mask, *a, *b),
            FilterKind::Set(e) => r.set(mask, e),
        }
    }

    let fixed = (r.fixed_mask != 0).then(|| {
        Filter::point(Mask::from_raw(r.fixed_mask, width), r.fixed_pattern)
            .expect("pattern confined to fixed mask")
    });
    let trivial = if r.contradiction {
        Triviality::AlwaysFalse
    } else if fixed.is_none() && r.residual.is_empty() {
        Triviality::AlwaysTrue
    } else {
        Triviality::None
    };
    Ok(ReducedProblem {
        width,
        fixed,
        residual: r.residual,
        trivial,
    })
}
