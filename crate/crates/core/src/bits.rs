use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An input string over {0,1}. Ordering is lexicographic on the bits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Domain(format!(
                "bit {} has value {}, expected 0 or 1",
                pos + 1,
                bits[pos]
            )));
        }
        Ok(BitVector(bits))
    }

    /// The n-bit string whose first bit is the most significant bit of `value`.
    pub fn from_index(value: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        BitVector(
            (0..n)
                .map(|k| ((value >> (n - 1 - k)) & 1) as u8)
                .collect(),
        )
    }

    pub fn ones(n: usize) -> Self {
        BitVector(vec![1; n])
    }

    pub fn zeros(n: usize) -> Self {
        BitVector(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// Bit at 1-indexed position `i`.
    pub fn get(&self, i: usize) -> u8 {
        self.0[i - 1]
    }

    /// Number of ones among the first `i` bits.
    pub fn prefix_sum(&self, i: usize) -> usize {
        self.0[..i].iter().map(|&b| b as usize).sum()
    }

    pub fn count_ones(&self) -> usize {
        self.prefix_sum(self.len())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    /// Accepts `0`/`1` digits or `(`/`)` brackets (open = 1).
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' | ')' => Ok(0),
                '1' | '(' => Ok(1),
                other => Err(Error::Domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitVector)
    }
}

/// All strings in {0,1}^n in lexicographic order.
pub fn all_bitstrings(n: usize) -> impl Iterator<Item = BitVector> {
    assert!(n < 64, "cannot enumerate {{0,1}}^{n}");
    (0..1u64 << n).map(move |v| BitVector::from_index(v, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_both_notations() {
        let a: BitVector = "1011".parse().unwrap();
        let b: BitVector = "()((".parse().unwrap();
        assert_eq!(a.bits(), &[1, 0, 1, 1]);
        assert_eq!(b.bits(), &[1, 0, 1, 1]);
        assert!("10x".parse::<BitVector>().is_err());
        assert!(BitVector::new(vec![0, 2]).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all: Vec<_> = all_bitstrings(3).map(|b| b.to_string()).collect();
        assert_eq!(all, ["000", "001", "010", "011", "100", "101", "110", "111"]);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
    }

    #[test]
    fn prefix_sums() {
        let x: BitVector = "1011".parse().unwrap();
        assert_eq!(x.prefix_sum(0), 0);
        assert_eq!(x.prefix_sum(3), 2);
        assert_eq!(x.count_ones(), 3);
    }
}
