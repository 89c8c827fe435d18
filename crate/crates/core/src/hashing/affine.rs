//! Random affine maps over GF(2): a 2-universal family with the prefix property.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulate::coins::{Coins, RngCoins};

/// An affine map from `width`-bit inputs to bit strings.
///
/// Output bit `j` is `parity(rows[j] & x) ⊕ offsets[j]`. Rows are drawn
/// independently, so the first `k` output bits of an `l`-bit draw are
/// themselves a draw of the `k`-bit family, and later blocks are independent
/// of earlier ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AffineHash {
    width: u32,
    rows: Vec<u64>,
    offsets: Vec<bool>,
}

/// Smallest number of bits that encodes `n` distinct symbols (at least 1).
pub fn encoding_width(n: usize) -> u32 {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1)
}

impl AffineHash {
    pub fn new(width: u32, rows: Vec<u64>, offsets: Vec<bool>) -> Result<Self> {
        if width == 0 || width > 64 {
            return Err(Error::ParameterRange(format!("input width {width} not in 1..=64")));
        }
        if rows.len() != offsets.len() {
            return Err(Error::ParameterRange("rows and offsets differ in length".into()));
        }
        let mask = Self::mask(width);
        if rows.iter().any(|r| r & !mask != 0) {
            return Err(Error::ParameterRange("row has bits beyond the input width".into()));
        }
        Ok(Self { width, rows, offsets })
    }

    /// The empty map, to be grown with [`AffineHash::extend`].
    pub fn empty(width: u32) -> Result<Self> {
        Self::new(width, Vec::new(), Vec::new())
    }

    fn mask(width: u32) -> u64 {
        if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        }
    }

    /// Draws `l` output bits' worth of rows from `coins`.
    pub fn draw(width: u32, l: usize, coins: &mut dyn Coins) -> Result<Self> {
        let mut h = Self::empty(width)?;
        h.extend(l, coins);
        Ok(h)
    }

    /// Appends `extra` freshly drawn output bits.
    pub fn extend(&mut self, extra: usize, coins: &mut dyn Coins) {
        for _ in 0..extra {
            // one draw per row keeps the exact enumerator's branching compact
            let v = if self.width < 64 {
                coins.bits(self.width + 1)
            } else {
                let r = coins.bits(64);
                self.rows.push(r);
                self.offsets.push(coins.bits(1) == 1);
                continue;
            };
            self.rows.push(v >> 1);
            self.offsets.push(v & 1 == 1);
        }
    }

    /// Grows the map to at least `len` output bits.
    pub fn ensure(&mut self, len: usize, coins: &mut dyn Coins) {
        if len > self.rows.len() {
            self.extend(len - self.rows.len(), coins);
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Output bit `j` on input `x`.
    #[inline]
    pub fn bit(&self, j: usize, x: u64) -> bool {
        ((self.rows[j] & x).count_ones() & 1 == 1) ^ self.offsets[j]
    }

    /// The first `len ≤ 64` output bits packed with bit `j` at position `j`.
    pub fn eval(&self, x: u64, len: usize) -> u64 {
        assert!(len <= 64 && len <= self.rows.len());
        (0..len).fold(0u64, |acc, j| acc | (u64::from(self.bit(j, x)) << j))
    }

    /// The map restricted to its first `k` output bits.
    pub fn prefix(&self, k: usize) -> Self {
        Self { width: self.width, rows: self.rows[..k].to_vec(), offsets: self.offsets[..k].to_vec() }
    }

    /// Whether `x`'s first `reference.len()` output bits equal `reference`.
    pub fn matches(&self, x: u64, reference: &[bool]) -> bool {
        reference.iter().enumerate().all(|(j, b)| self.bit(j, x) == *b)
    }
}

/// Parameters of the affine family `{0,1}^w → {0,1}^l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HashFamily {
    pub width: u32,
    pub output_bits: usize,
}

impl HashFamily {
    pub fn new(width: u32, output_bits: usize) -> Result<Self> {
        if width == 0 || width > 64 {
            return Err(Error::ParameterRange(format!("input width {width} not in 1..=64")));
        }
        if output_bits == 0 {
            return Err(Error::ParameterRange("output length must be >= 1".into()));
        }
        Ok(Self { width, output_bits })
    }

    /// Number of seed bits: an `l × w` matrix plus an `l`-bit offset.
    pub fn seed_bits(&self) -> usize {
        self.output_bits * (self.width as usize + 1)
    }

    /// Every member of the family, each drawn with equal probability (small families only).
    pub fn members(&self) -> Result<Vec<AffineHash>> {
        let bits = self.seed_bits();
        if bits > 24 {
            return Err(Error::TooLarge { atoms: 1u64 << bits.min(63), limit: 1 << 24 });
        }
        let w = self.width as usize;
        let mut out = Vec::with_capacity(1 << bits);
        for seed in 0u64..(1u64 << bits) {
            let mut rows = Vec::with_capacity(self.output_bits);
            let mut offsets = Vec::with_capacity(self.output_bits);
            for j in 0..self.output_bits {
                let chunk = (seed >> (j * (w + 1))) & ((1u64 << (w + 1)) - 1);
                rows.push(chunk >> 1);
                offsets.push(chunk & 1 == 1);
            }
            out.push(AffineHash::new(self.width, rows, offsets)?);
        }
        Ok(out)
    }
}

/// Deterministic draw of an `l`-bit map on `width`-bit inputs from a seed.
pub fn draw_hash(width: u32, l: usize, seed: u64) -> Result<AffineHash> {
    draw_hash_stream(width, l, seed, 0)
}

/// As [`draw_hash`], from stream `stream` of the seed.
pub fn draw_hash_stream(width: u32, l: usize, seed: u64, stream: u64) -> Result<AffineHash> {
    if l == 0 {
        return Err(Error::ParameterRange("output length must be >= 1".into()));
    }
    AffineHash::draw(width, l, &mut RngCoins::new(seed, stream))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_of_alphabets() {
        assert_eq!(encoding_width(1), 1);
        assert_eq!(encoding_width(2), 1);
        assert_eq!(encoding_width(3), 2);
        assert_eq!(encoding_width(256), 8);
        assert_eq!(encoding_width(257), 9);
    }

    #[test]
    fn identity_map_is_a_member() {
        let fam = HashFamily::new(2, 2).unwrap();
        let members = fam.members().unwrap();
        assert_eq!(members.len(), 64);
        let bijective = members.iter().any(|h| {
            let mut seen: Vec<u64> = (0..4).map(|x| h.eval(x, 2)).collect();
            seen.sort();
            seen == vec![0, 1, 2, 3]
        });
        assert!(bijective);
    }

    #[test]
    fn seeded_draws_repeat() {
        assert_eq!(draw_hash(8, 5, 3).unwrap(), draw_hash(8, 5, 3).unwrap());
        assert_ne!(draw_hash(8, 5, 3).unwrap(), draw_hash(8, 5, 4).unwrap());
    }
}
