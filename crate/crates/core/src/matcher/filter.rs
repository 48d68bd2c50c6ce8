use crate::bitkey::Mask;
use crate::error::{Error, Result};

/// Restriction kind; values are in place on the filter mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FilterKind {
    Point(u128),
    /// Closed interval `[lo, hi]`.
    Range(u128, u128),
    /// Strictly increasing, nonempty.
    Set(Vec<u128>),
}

/// A pattern restriction `x & m = p`, `x & m ∈ [a, b]` or `x & m ∈ E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filter {
    mask: Mask,
    kind: FilterKind,
}

fn confined(mask: Mask, v: u128) -> Result<()> {
    if v & !mask.bits() != 0 {
        return Err(Error::InvalidFilter(format!(
            "value {v:#x} has bits outside mask {mask}"
        )));
    }
    Ok(())
}

impl Filter {
    pub fn point(mask: Mask, pattern: u128) -> Result<Self> {
        confined(mask, pattern)?;
        Ok(Self {
            mask,
            kind: FilterKind::Point(pattern),
        })
    }

    pub fn range(mask: Mask, lo: u128, hi: u128) -> Result<Self> {
        confined(mask, lo)?;
        confined(mask, hi)?;
        if lo > hi {
            return Err(Error::InvalidFilter(format!("empty range [{lo}, {hi}]")));
        }
        Ok(Self {
            mask,
            kind: FilterKind::Range(lo, hi),
        })
    }

    /// Elements are sorted and deduplicated.
    pub fn set(mask: Mask, mut elements: Vec<u128>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidFilter("empty set".into()));
        }
        for &e in &elements {
            confined(mask, e)?;
        }
        elements.sort_unstable();
        elements.dedup();
        Ok(Self {
            mask,
            kind: FilterKind::Set(elements),
        })
    }

    pub fn mask(&self) -> Mask {
        self.mask
    }

    pub fn kind(&self) -> &FilterKind {
        &self.kind
    }

    /// Direct evaluation of the restriction on a raw key.
    pub fn accepts(&self, key: u128) -> bool {
        let v = key & self.mask.bits();
        match &self.kind {
            FilterKind::Point(p) => v == *p,
            FilterKind::Range(a, b) => *a <= v && v <= *b,
            FilterKind::Set(e) => e.binary_search(&v).is_ok(),
        }
    }
}
