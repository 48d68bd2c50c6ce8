//! Fixed-width keys and masks.
//!
//! Bit positions are 1-based and LSB-first: position `i` carries weight
//! `2^(i-1)`. A key of width `n` lives in `{0, .., 2^n - 1}` and keys of equal
//! width order exactly like unsigned integers. Widths up to 128 bits are
//! supported; the value is held in a `u128` (two machine words, junior word
//! first on little-endian targets).

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported key width.
pub const MAX_WIDTH: u32 = 128;

/// Word with bits `1..=k` set.
#[inline]
pub(crate) fn low_ones(k: u32) -> u128 {
    if k >= 128 {
        u128::MAX
    } else {
        (1u128 << k) - 1
    }
}

/// Word with bits `j+1..=128` set (the `>j` projection of the identity).
#[inline]
pub(crate) fn above(j: u32) -> u128 {
    !low_ones(j)
}

/// Word with bits `1..=j-1` set (the `<j` projection of the identity).
#[inline]
pub(crate) fn below(j: u32) -> u128 {
    low_ones(j.saturating_sub(1))
}

/// Single bit at 1-based position `j`.
#[inline]
pub(crate) fn bit(j: u32) -> u128 {
    1u128 << (j - 1)
}

/// 1-based position of the most senior set bit, 0 for zero.
#[inline]
pub(crate) fn top_bit(v: u128) -> u32 {
    128 - v.leading_zeros()
}

/// Gathers the bits of `value` selected by `mask` into the low end.
pub(crate) fn compress(value: u128, mask: u128) -> u128 {
    let mut out = 0u128;
    let mut m = mask;
    let mut k = 0;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if value & low != 0 {
            out |= 1u128 << k;
        }
        k += 1;
        m ^= low;
    }
    out
}

/// Inverse of [`compress`]: scatters the low bits of `value` onto `mask`.
pub(crate) fn deposit(value: u128, mask: u128) -> u128 {
    let mut out = 0u128;
    let mut m = mask;
    let mut k = 0;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if (value >> k) & 1 == 1 {
            out |= low;
        }
        k += 1;
        m ^= low;
    }
    out
}

fn check_width(width: u32) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::WidthOutOfRange(width));
    }
    Ok(())
}

/// A point of the key space `S = Z_2^n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitKey {
    value: u128,
    width: u8,
}

impl serde::Serialize for BitKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u128(self.value)
    }
}

impl BitKey {
    pub fn new(value: u128, width: u32) -> Result<Self> {
        check_width(width)?;
        if value & !low_ones(width) != 0 {
            return Err(Error::StrayBits);
        }
        Ok(Self {
            value,
            width: width as u8,
        })
    }

    /// Builds a key without checking; the caller guarantees the invariants.
    #[inline]
    pub(crate) fn from_raw(value: u128, width: u32) -> Self {
        debug_assert!((1..=MAX_WIDTH).contains(&width));
        debug_assert!(value & !low_ones(width) == 0);
        Self {
            value,
            width: width as u8,
        }
    }

    pub fn zero(width: u32) -> Result<Self> {
        Self::new(0, width)
    }

    /// The largest key of the given width, `2^n - 1`.
    pub fn max(width: u32) -> Result<Self> {
        check_width(width)?;
        Ok(Self::from_raw(low_ones(width), width))
    }

    #[inline]
    pub fn value(&self) -> u128 {
        self.value
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width as u32
    }

    pub fn bit(&self, position: u32) -> bool {
        position >= 1 && position <= self.width() && self.value & bit(position) != 0
    }

    /// `x + 1`, or `None` on overflow past `2^n - 1`.
    pub fn checked_next(&self) -> Option<Self> {
        let next = self.value.checked_add(1)?;
        (next & !low_ones(self.width()) == 0).then(|| Self::from_raw(next, self.width()))
    }

    pub fn to_binary_string(&self) -> String {
        format!("{:0w$b}", self.value, w = self.width as usize)
    }

    pub fn to_hex_string(&self) -> String {
        let digits = (self.width as usize).div_ceil(4);
        format!("{:0w$x}", self.value, w = digits)
    }
}

impl fmt::Debug for BitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitKey({}/{})", self.value, self.width)
    }
}

impl fmt::Display for BitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary_string())
    }
}

impl fmt::LowerHex for BitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex_string())
    }
}

/// Projection onto a subset of bit positions.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mask {
    bits: u128,
    width: u8,
}

impl Mask {
    pub fn from_positions<I: IntoIterator<Item = u32>>(width: u32, positions: I) -> Result<Self> {
        check_width(width)?;
        let mut bits = 0u128;
        for position in positions {
            if position == 0 || position > width {
                return Err(Error::PositionOutOfRange { position, width });
            }
            bits |= bit(position);
        }
        Ok(Self {
            bits,
            width: width as u8,
        })
    }

    /// Mask whose positions are the set bits of `bits`.
    pub fn from_bits(bits: u128, width: u32) -> Result<Self> {
        check_width(width)?;
        if bits & !low_ones(width) != 0 {
            return Err(Error::StrayBits);
        }
        Ok(Self {
            bits,
            width: width as u8,
        })
    }

    #[inline]
    pub(crate) fn from_raw(bits: u128, width: u32) -> Self {
        debug_assert!(bits & !low_ones(width) == 0);
        Self {
            bits,
            width: width as u8,
        }
    }

    /// The identity mask `I`.
    pub fn identity(width: u32) -> Result<Self> {
        check_width(width)?;
        Ok(Self::from_raw(low_ones(width), width))
    }

    pub fn empty(width: u32) -> Result<Self> {
        check_width(width)?;
        Ok(Self::from_raw(0, width))
    }

    /// Contiguous mask over positions `lo..=hi`.
    pub fn contiguous(width: u32, lo: u32, hi: u32) -> Result<Self> {
        Self::from_positions(width, lo..=hi)
    }

    #[inline]
    pub fn bits(&self) -> u128 {
        self.bits
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width as u32
    }

    /// Number of projected dimensions `d`.
    #[inline]
    pub fn dims(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, position: u32) -> bool {
        position >= 1 && position <= self.width() && self.bits & bit(position) != 0
    }

    /// Positions in ascending order.
    pub fn positions(&self) -> impl Iterator<Item = u32> + '_ {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let p = rest.trailing_zeros() + 1;
            rest &= rest - 1;
            Some(p)
        })
    }

    /// Highest projected position, `None` for the empty mask.
    pub fn head(&self) -> Option<u32> {
        (self.bits != 0).then(|| top_bit(self.bits))
    }

    /// One less than the lowest projected position, `None` for the empty mask.
    pub fn tail(&self) -> Option<u32> {
        (self.bits != 0).then(|| self.bits.trailing_zeros())
    }

    pub fn is_contiguous(&self) -> bool {
        match (self.head(), self.tail()) {
            (Some(h), Some(t)) => h == t + self.dims(),
            _ => false,
        }
    }

    pub fn is_disjoint(&self, other: &Mask) -> bool {
        self.bits & other.bits == 0
    }

    pub fn union(&self, other: &Mask) -> Result<Mask> {
        same_width(self.width(), other.width())?;
        Ok(Mask::from_raw(self.bits | other.bits, self.width()))
    }

    pub fn intersection(&self, other: &Mask) -> Result<Mask> {
        same_width(self.width(), other.width())?;
        Ok(Mask::from_raw(self.bits & other.bits, self.width()))
    }

    pub fn difference(&self, other: &Mask) -> Result<Mask> {
        same_width(self.width(), other.width())?;
        Ok(Mask::from_raw(self.bits & !other.bits, self.width()))
    }

    /// `m_{>j}`.
    pub fn above(&self, j: u32) -> Mask {
        Mask::from_raw(self.bits & above(j), self.width())
    }

    /// `m_{<j}`.
    pub fn below(&self, j: u32) -> Mask {
        Mask::from_raw(self.bits & below(j), self.width())
    }

    /// `m̄ = 1_m | 0_~m` as an integer.
    pub fn ones_value(&self) -> u128 {
        self.bits
    }
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mask{}", self)
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for p in self.positions().collect::<Vec<_>>().into_iter().rev() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        f.write_str("}")
    }
}

fn same_width(expected: u32, found: u32) -> Result<()> {
    if expected != found {
        return Err(Error::WidthMismatch { expected, found });
    }
    Ok(())
}

/// Head, tail and canonical partition of a nonempty mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskProfile {
    pub dims: u32,
    pub head: u32,
    pub tail: u32,
    /// Maximal contiguous runs, most senior first.
    pub components: Vec<Mask>,
}

/// `x & m`: keeps the bits of `x` at the mask positions, in place.
pub fn key_and_mask(x: BitKey, m: Mask) -> Result<BitKey> {
    same_width(x.width(), m.width())?;
    Ok(BitKey::from_raw(x.value & m.bits, x.width()))
}

/// `p | q` for values confined to disjoint masks.
pub fn merge_disjoint(p: BitKey, q: BitKey, mp: Mask, mq: Mask) -> Result<BitKey> {
    let w = p.width();
    same_width(w, q.width())?;
    same_width(w, mp.width())?;
    same_width(w, mq.width())?;
    if !mp.is_disjoint(&mq) {
        return Err(Error::OverlappingMasks);
    }
    if p.value & !mp.bits != 0 || q.value & !mq.bits != 0 {
        return Err(Error::StrayBits);
    }
    Ok(BitKey::from_raw(p.value | q.value, w))
}

/// The complementary mask over the remaining positions.
pub fn comask(m: Mask) -> Mask {
    Mask::from_raw(!m.bits & low_ones(m.width()), m.width())
}

/// Maximal contiguous runs of `bits`, most senior first.
pub(crate) fn runs(bits: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut rest = bits;
    while rest != 0 {
        let head = top_bit(rest);
        // Length of the run of ones ending at `head`.
        let shifted = rest << (128 - head);
        let len = (!shifted).leading_zeros();
        let run = low_ones(head) & !low_ones(head - len);
        out.push(run);
        rest &= !run;
    }
    out
}

pub fn mask_profile(m: Mask) -> Result<MaskProfile> {
    let (head, tail) = match (m.head(), m.tail()) {
        (Some(h), Some(t)) => (h, t),
        _ => return Err(Error::EmptyMask),
    };
    let components = runs(m.bits)
        .into_iter()
        .map(|r| Mask::from_raw(r, m.width()))
        .collect();
    Ok(MaskProfile {
        dims: m.dims(),
        head,
        tail,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f1_x() -> Mask {
        Mask::from_positions(6, [1, 3, 5]).unwrap()
    }

    #[test]
    fn and_mask_projects_in_place() {
        let x = BitKey::new(27, 6).unwrap();
        // naive per-bit oracle
        let mut expected = 0u128;
        for p in [1u32, 3, 5] {
            if (27u128 >> (p - 1)) & 1 == 1 {
                expected |= 1 << (p - 1);
            }
        }
        assert_eq!(expected, 17);
        assert_eq!(key_and_mask(x, f1_x()).unwrap().value(), 17);
        assert_eq!(key_and_mask(x, Mask::identity(6).unwrap()).unwrap(), x);
        assert_eq!(key_and_mask(x, Mask::empty(6).unwrap()).unwrap().value(), 0);
    }

    #[test]
    fn and_mask_rejects_width_mismatch() {
        let x = BitKey::new(3, 7).unwrap();
        assert!(matches!(
            key_and_mask(x, f1_x()),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn merge_examples() {
        let mx = f1_x();
        let my = comask(mx);
        let p = BitKey::new(17, 6).unwrap();
        let q = BitKey::new(10, 6).unwrap();
        assert_eq!(merge_disjoint(p, q, mx, my).unwrap().value(), 27);
        let zero = BitKey::zero(6).unwrap();
        assert_eq!(merge_disjoint(zero, q, mx, my).unwrap(), q);

        let a = Mask::from_positions(6, [3, 4]).unwrap();
        let b = Mask::from_positions(6, [1, 3]).unwrap();
        let err = merge_disjoint(BitKey::new(4, 6).unwrap(), BitKey::new(4, 6).unwrap(), a, b);
        assert!(matches!(err, Err(Error::OverlappingMasks)));
        let stray = merge_disjoint(BitKey::new(2, 6).unwrap(), zero, mx, my);
        assert!(matches!(stray, Err(Error::StrayBits)));
    }

    #[test]
    fn comask_examples() {
        assert_eq!(comask(f1_x()), Mask::from_positions(6, [2, 4, 6]).unwrap());
        assert!(comask(Mask::identity(6).unwrap()).is_empty());
        assert_eq!(comask(Mask::empty(6).unwrap()), Mask::identity(6).unwrap());
    }

    #[test]
    fn profile_examples() {
        let p = mask_profile(f1_x()).unwrap();
        assert_eq!((p.dims, p.tail, p.head), (3, 0, 5));
        let comps: Vec<Vec<u32>> = p
            .components
            .iter()
            .map(|c| c.positions().collect())
            .collect();
        assert_eq!(comps, vec![vec![5], vec![3], vec![1]]);

        let p = mask_profile(Mask::from_positions(6, [3, 4, 5]).unwrap()).unwrap();
        assert_eq!((p.dims, p.tail, p.head, p.components.len()), (3, 2, 5, 1));

        let p = mask_profile(Mask::from_positions(6, [1, 2, 5, 6]).unwrap()).unwrap();
        assert_eq!((p.tail, p.head), (0, 6));
        let comps: Vec<Vec<u32>> = p
            .components
            .iter()
            .map(|c| c.positions().collect())
            .collect();
        assert_eq!(comps, vec![vec![5, 6], vec![1, 2]]);

        assert!(matches!(
            mask_profile(Mask::empty(6).unwrap()),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn wide_keys() {
        let k = BitKey::max(128).unwrap();
        assert_eq!(k.value(), u128::MAX);
        assert!(k.checked_next().is_none());
        assert_eq!(BitKey::new(7, 3).unwrap().checked_next(), None);
        let m = Mask::identity(128).unwrap();
        let p = mask_profile(m).unwrap();
        assert_eq!((p.head, p.tail, p.components.len()), (128, 0, 1));
        assert_eq!(BitKey::new(5, 116).unwrap().to_hex_string().len(), 29);
    }

    #[test]
    fn rendering() {
        let k = BitKey::new(27, 6).unwrap();
        assert_eq!(k.to_string(), "011011");
        assert_eq!(format!("{k:x}"), "1b");
        assert_eq!(f1_x().to_string(), "{5,3,1}");
    }

    #[test]
    fn compress_deposit_inverse() {
        let m = 0b1010_0110u128;
        for v in 0..16u128 {
            assert_eq!(compress(deposit(v, m), m), v);
        }
    }

    proptest! {
        #[test]
        fn round_trip(width in 1u32..=128, raw in any::<u128>(), mraw in any::<u128>()) {
            let x = BitKey::new(raw & low_ones(width), width).unwrap();
            let m = Mask::from_bits(mraw & low_ones(width), width).unwrap();
            let lo = key_and_mask(x, m).unwrap();
            let hi = key_and_mask(x, comask(m)).unwrap();
            prop_assert_eq!(merge_disjoint(lo, hi, m, comask(m)).unwrap(), x);
        }

        #[test]
        fn profile_reconstructs(width in 1u32..=128, mraw in any::<u128>()) {
            let m = Mask::from_bits(mraw & low_ones(width), width).unwrap();
            prop_assume!(!m.is_empty());
            let p = mask_profile(m).unwrap();
            let mut union = 0u128;
            for c in &p.components {
                prop_assert!(c.is_contiguous());
                prop_assert_eq!(union & c.bits(), 0);
                union |= c.bits();
            }
            prop_assert_eq!(union, m.bits());
            for pair in p.components.windows(2) {
                // tail(m_i) >= head(m_{i+1}); strict for maximal runs
                prop_assert!(pair[0].tail().unwrap() > pair[1].head().unwrap());
            }
        }

        #[test]
        fn order_is_unsigned(a in any::<u64>(), b in any::<u64>()) {
            let x = BitKey::new(a as u128, 64).unwrap();
            let y = BitKey::new(b as u128, 64).unwrap();
            prop_assert_eq!(x < y, a < b);
        }
    }
}
