//! Single-mask restrictions on raw key words.
//!
//! Every restriction answers three questions about a key `x`:
//! whether it is admissible, the signed position of the most senior bit
//! responsible for a mismatch, and, given the bits of a candidate at and
//! above some position `k`, the smallest admissible completion of its own
//! mask bits below `k`.

use crate::bitkey::{below, bit, top_bit};

use super::filter::{Filter, FilterKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Restriction {
    Point { mask: u128, pattern: u128 },
    Range { mask: u128, lo: u128, hi: u128 },
    Set { mask: u128, elements: Vec<u128> },
}

/// Result of fixing the senior bits of a restriction's mask.
pub(crate) enum Narrowed {
    Unchanged,
    Mismatch,
    Satisfied,
    Filter(Filter),
}

#[inline]
fn signed(j: u32, positive: bool) -> i32 {
    if positive {
        j as i32
    } else {
        -(j as i32)
    }
}

impl Restriction {
    pub(crate) fn from_filter(f: &Filter) -> Self {
        let mask = f.mask().bits();
        match f.kind() {
            FilterKind::Point(p) => Restriction::Point { mask, pattern: *p },
            FilterKind::Range(a, b) => Restriction::Range {
                mask,
                lo: *a,
                hi: *b,
            },
            FilterKind::Set(e) => Restriction::Set {
                mask,
                elements: e.clone(),
            },
        }
    }

    pub(crate) fn to_filter(&self, width: u32) -> Filter {
        use crate::bitkey::Mask;
        let m = |bits| Mask::from_raw(bits, width);
        match self {
            Restriction::Point { mask, pattern } => Filter::point(m(*mask), *pattern),
            Restriction::Range { mask, lo, hi } => Filter::range(m(*mask), *lo, *hi),
            Restriction::Set { mask, elements } => Filter::set(m(*mask), elements.clone()),
        }
        .expect("restriction invariants hold")
    }

    #[inline]
    pub(crate) fn mask(&self) -> u128 {
        match self {
            Restriction::Point { mask, .. }
            | Restriction::Range { mask, .. }
            | Restriction::Set { mask, .. } => *mask,
        }
    }

    #[inline]
    pub(crate) fn accepts(&self, x: u128) -> bool {
        match self {
            Restriction::Point { mask, pattern } => x & mask == *pattern,
            Restriction::Range { mask, lo, hi } => {
                let v = x & mask;
                *lo <= v && v <= *hi
            }
            Restriction::Set { mask, elements } => elements.binary_search(&(x & mask)).is_ok(),
        }
    }

    /// Signed most senior decisive bit; positive when `x` overshoots.
    #[inline]
    pub(crate) fn mismatch(&self, x: u128) -> i32 {
        match self {
            Restriction::Point { mask, pattern } => {
                let diff = (x ^ pattern) & mask;
                if diff == 0 {
                    return 0;
                }
                let j = top_bit(diff);
                signed(j, x & bit(j) != 0)
            }
            Restriction::Range { mask, lo, hi } => {
                let v = x & mask;
                if v < *lo {
                    -(top_bit(v ^ lo) as i32)
                } else if v > *hi {
                    top_bit(v ^ hi) as i32
                } else {
                    0
                }
            }
            Restriction::Set { mask, elements } => {
                let v = x & mask;
                let idx = match elements.binary_search(&v) {
                    Ok(_) => return 0,
                    Err(i) => i,
                };
                // The element sharing the longest prefix with v is a neighbour.
                let below = idx.checked_sub(1).map(|i| top_bit(v ^ elements[i]));
                let above = elements.get(idx).map(|e| top_bit(v ^ e));
                match (below, above) {
                    (Some(p), Some(s)) if s < p => -(s as i32),
                    (Some(p), _) => p as i32,
                    (None, Some(s)) => -(s as i32),
                    (None, None) => unreachable!("sets are nonempty"),
                }
            }
        }
    }

    /// Smallest admissible value of the mask bits below `k`, given the
    /// candidate's bits at and above `k` (`prefix` has no bits below `k`).
    #[inline]
    pub(crate) fn min_fill(&self, prefix: u128, k: u32) -> Option<u128> {
        let low = below(k);
        match self {
            Restriction::Point { mask, pattern } => {
                let hi_mask = mask & !low;
                ((prefix ^ pattern) & hi_mask == 0).then_some(pattern & mask & low)
            }
            Restriction::Range { mask, lo, hi } => {
                let p = prefix & mask;
                let first = p.max(*lo);
                let last = (p | (mask & low)).min(*hi);
                (first <= last).then_some(first & mask & low)
            }
            Restriction::Set { mask, elements } => {
                let p = prefix & mask;
                let last = p | (mask & low);
                let idx = elements.partition_point(|e| *e < p);
                elements
                    .get(idx)
                    .filter(|e| **e <= last)
                    .map(|e| e & mask & low)
            }
        }
    }

    pub(crate) fn min_value(&self) -> u128 {
        match self {
            Restriction::Point { pattern, .. } => *pattern,
            Restriction::Range { lo, .. } => *lo,
            Restriction::Set { elements, .. } => elements[0],
        }
    }

    pub(crate) fn max_value(&self) -> u128 {
        match self {
            Restriction::Point { pattern, .. } => *pattern,
            Restriction::Range { hi, .. } => *hi,
            Restriction::Set { elements, .. } => elements[elements.len() - 1],
        }
    }

    /// Fixes the bits of `prefix_mask` (a senior run of the key) to `prefix`.
    pub(crate) fn narrow(&self, prefix_mask: u128, prefix: u128, width: u32) -> Narrowed {
        use crate::bitkey::Mask;
        let mask = self.mask();
        let fixed = mask & prefix_mask;
        if fixed == 0 {
            return Narrowed::Unchanged;
        }
        let p = prefix & fixed;
        let rest = mask & !prefix_mask;
        let rest_mask = Mask::from_raw(rest, width);
        match self {
            Restriction::Point { pattern, .. } => {
                if pattern & fixed != p {
                    Narrowed::Mismatch
                } else if rest == 0 {
                    Narrowed::Satisfied
                } else {
                    Narrowed::Filter(Filter::point(rest_mask, pattern & rest).expect("confined"))
                }
            }
            Restriction::Range { lo, hi, .. } => {
                let first = (*lo).max(p);
                let last = (*hi).min(p | rest);
                if first > last {
                    Narrowed::Mismatch
                } else if rest == 0 {
                    Narrowed::Satisfied
                } else {
                    Narrowed::Filter(
                        Filter::range(rest_mask, first & rest, last & rest).expect("confined"),
                    )
                }
            }
            Restriction::Set { elements, .. } => {
                let kept: Vec<u128> = elements
                    .iter()
                    .filter(|e| *e & fixed == p)
                    .map(|e| e & rest)
                    .collect();
                if kept.is_empty() {
                    Narrowed::Mismatch
                } else if rest == 0 {
                    Narrowed::Satisfied
                } else {
                    Narrowed::Filter(Filter::set(rest_mask, kept).expect("confined"))
                }
            }
        }
    }
}
