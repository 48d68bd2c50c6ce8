//! Pattern matchers with Match, Mismatch and Hint.

mod filter;
mod reduce;
mod restriction;

pub use filter::{Filter, FilterKind};
pub use reduce::{reduce_filters, ReducedProblem, Triviality};

use crate::bitkey::{above, bit, low_ones, top_bit, BitKey, Mask};
use crate::error::{Error, Result};
use restriction::{Narrowed, Restriction};

/// Next admissible key after a mismatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hint {
    Next(BitKey),
    Exhausted,
}

/// Outcome of restricting a matcher to keys sharing a senior prefix.
#[derive(Clone, Debug)]
pub enum Specialization {
    TrivialMatch,
    TrivialMismatch,
    Reduced(Matcher),
}

/// Conjunction of a fixed pattern and residual range/set restrictions on
/// pairwise disjoint masks.
#[derive(Clone, Debug)]
pub struct Matcher {
    width: u32,
    space_width: u32,
    trivial: Triviality,
    fixed_mask: u128,
    fixed_pattern: u128,
    residual: Vec<Restriction>,
    union_mask: u128,
}

impl Matcher {
    pub fn from_filters(width: u32, filters: &[Filter]) -> Result<Self> {
        let problem = reduce_filters(width, filters)?;
        Ok(Self::from_problem(&problem))
    }

    pub fn from_problem(problem: &ReducedProblem) -> Self {
        let (fixed_mask, fixed_pattern) = match &problem.fixed {
            Some(f) => match f.kind() {
                FilterKind::Point(p) => (f.mask().bits(), *p),
                _ => unreachable!("fixed part is a point"),
            },
            None => (0, 0),
        };
        let residual: Vec<Restriction> = problem
            .residual
            .iter()
            .map(Restriction::from_filter)
            .collect();
        let union_mask = residual.iter().fold(fixed_mask, |acc, r| acc | r.mask());
        Self {
            width: problem.width,
            space_width: problem.width,
            trivial: problem.trivial,
            fixed_mask,
            fixed_pattern,
            residual,
            union_mask,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Bits not pinned by a partition prefix.
    pub fn space_width(&self) -> u32 {
        self.space_width
    }

    pub fn triviality(&self) -> Triviality {
        self.trivial
    }

    /// Union of all restricted positions.
    pub fn mask(&self) -> Mask {
        Mask::from_raw(self.union_mask, self.width)
    }

    pub fn fixed(&self) -> Option<(Mask, u128)> {
        (self.fixed_mask != 0).then(|| {
            (
                Mask::from_raw(self.fixed_mask, self.width),
                self.fixed_pattern,
            )
        })
    }

    /// The reduced restrictions as filters, fixed pattern first.
    pub fn filters(&self) -> Vec<Filter> {
        let mut out = Vec::with_capacity(self.residual.len() + 1);
        if let Some((m, p)) = self.fixed() {
            out.push(Filter::point(m, p).expect("confined"));
        }
        out.extend(self.residual.iter().map(|r| r.to_filter(self.width)));
        out
    }

    /// The single admissible key when every bit is fixed.
    pub fn exact_key(&self) -> Option<BitKey> {
        (self.trivial == Triviality::None
            && self.residual.is_empty()
            && self.fixed_mask == low_ones(self.width))
        .then(|| BitKey::from_raw(self.fixed_pattern, self.width))
    }

    fn check(&self, x: BitKey) -> Result<()> {
        if x.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: x.width(),
            });
        }
        Ok(())
    }

    pub fn matches(&self, x: BitKey) -> Result<bool> {
        self.check(x)?;
        Ok(self.matches_raw(x.value()))
    }

    /// Signed most senior decisive bit, 0 on a match. Positive means the key
    /// overshoots the restriction at that bit.
    pub fn mismatch(&self, x: BitKey) -> Result<i32> {
        self.check(x)?;
        Ok(self.mismatch_raw(x.value()))
    }

    pub fn hint(&self, x: BitKey, mm: i32) -> Result<Hint> {
        self.check(x)?;
        if mm == 0 {
            return Err(Error::Contract("hint requires a nonzero mismatch".into()));
        }
        if mm != self.mismatch_raw(x.value()) {
            return Err(Error::Contract(format!(
                "mismatch {mm} does not describe key {x}"
            )));
        }
        Ok(match self.hint_raw(x.value(), mm) {
            Some(h) => Hint::Next(BitKey::from_raw(h, self.width)),
            None => Hint::Exhausted,
        })
    }

    #[inline]
    pub(crate) fn matches_raw(&self, x: u128) -> bool {
        match self.trivial {
            Triviality::AlwaysTrue => true,
            Triviality::AlwaysFalse => false,
            Triviality::None => {
                x & self.fixed_mask == self.fixed_pattern
                    && self.residual.iter().all(|r| r.accepts(x))
            }
        }
    }

    #[inline]
    pub(crate) fn mismatch_raw(&self, x: u128) -> i32 {
        match self.trivial {
            Triviality::AlwaysTrue => return 0,
            Triviality::AlwaysFalse => return self.width as i32,
            Triviality::None => {}
        }
        let mut best = 0i32;
        let diff = (x ^ self.fixed_pattern) & self.fixed_mask;
        if diff != 0 {
            let j = top_bit(diff);
            best = if x & bit(j) != 0 {
                j as i32
            } else {
                -(j as i32)
            };
        }
        for r in &self.residual {
            let m = r.mismatch(x);
            if m.abs() > best.abs() || (m.abs() == best.abs() && m > best) {
                best = m;
            }
        }
        best
    }

    /// Smallest key above `x` consistent with its bits at and above some
    /// growth position, or `None` when no admissible key exceeds `x`.
    pub(crate) fn hint_raw(&self, x: u128, mm: i32) -> Option<u128> {
        if self.trivial == Triviality::AlwaysFalse {
            return None;
        }
        let j = mm.unsigned_abs();
        // Bits at and above a negative j, or above a positive j, can never
        // be kept as they are.
        let start = if mm < 0 { j } else { j + 1 };
        if start > self.width {
            return None;
        }
        let mut growth = !x & low_ones(self.width) & !low_ones(start - 1);
        while growth != 0 {
            let k = growth.trailing_zeros() + 1;
            growth &= growth - 1;
            let prefix = (x & above(k)) | bit(k);
            if let Some(fill) = self.min_fill(prefix, k) {
                return Some(prefix | fill);
            }
        }
        None
    }

    #[inline]
    fn min_fill(&self, prefix: u128, k: u32) -> Option<u128> {
        let low = low_ones(k - 1);
        let hi_fixed = self.fixed_mask & !low;
        if (prefix ^ self.fixed_pattern) & hi_fixed != 0 {
            return None;
        }
        let mut fill = self.fixed_pattern & low;
        for r in &self.residual {
            fill |= r.min_fill(prefix, k)?;
        }
        Some(fill)
    }

    /// Smallest and largest admissible keys.
    pub fn bounding_interval(&self) -> Option<(BitKey, BitKey)> {
        let full = low_ones(self.width);
        let (lo, hi) = match self.trivial {
            Triviality::AlwaysFalse => return None,
            Triviality::AlwaysTrue => (0, full),
            Triviality::None => {
                let free = full & !self.union_mask;
                let lo = self
                    .residual
                    .iter()
                    .fold(self.fixed_pattern, |acc, r| acc | r.min_value());
                let hi = self
                    .residual
                    .iter()
                    .fold(self.fixed_pattern | free, |acc, r| acc | r.max_value());
                (lo, hi)
            }
        };
        Some((
            BitKey::from_raw(lo, self.width),
            BitKey::from_raw(hi, self.width),
        ))
    }

    /// Restricts the matcher to keys whose `prefix_mask` bits equal `prefix`.
    pub fn specialize(&self, prefix_mask: Mask, prefix: u128) -> Result<Specialization> {
        if prefix_mask.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: prefix_mask.width(),
            });
        }
        let pm = prefix_mask.bits();
        if prefix & !pm != 0 {
            return Err(Error::StrayBits);
        }
        if pm != 0 && (pm != low_ones(self.width) & !low_ones(self.width - pm.count_ones())) {
            return Err(Error::Contract(format!(
                "prefix mask {prefix_mask} is not a senior run"
            )));
        }
        match self.trivial {
            Triviality::AlwaysTrue => return Ok(Specialization::TrivialMatch),
            Triviality::AlwaysFalse => return Ok(Specialization::TrivialMismatch),
            Triviality::None => {}
        }
        let mut filters = Vec::new();
        let fixed = (self.fixed_mask != 0).then_some(Restriction::Point {
            mask: self.fixed_mask,
            pattern: self.fixed_pattern,
        });
        for r in fixed.iter().chain(self.residual.iter()) {
            match r.narrow(pm, prefix, self.width) {
                Narrowed::Unchanged => filters.push(r.to_filter(self.width)),
                Narrowed::Mismatch => return Ok(Specialization::TrivialMismatch),
                Narrowed::Satisfied => {}
                Narrowed::Filter(f) => filters.push(f),
            }
        }
        let problem = reduce_filters(self.width, &filters)?;
        match problem.trivial {
            Triviality::AlwaysTrue => Ok(Specialization::TrivialMatch),
            Triviality::AlwaysFalse => Ok(Specialization::TrivialMismatch),
            Triviality::None => {
                let mut m = Self::from_problem(&problem);
                m.space_width = self.space_width.min(self.width - pm.count_ones());
                Ok(Specialization::Reduced(m))
            }
        }
    }
}
