//! Correct-by-construction reference schemes.
//!
//! Each builder returns a [`Scheme`] whose encoder and decoders are formulas
//! ([`Builtin`]) rather than tables, so they scale past what a table could
//! hold while still being checkable exhaustively at small n.

use crate::bits::BitVector;
use crate::brackets::match_all;
use crate::error::{Error, Result};
use crate::scheme::{CellValue, Decoders, Domain, Encoder, ProbeFamily, Scheme};

/// Formula-driven encoders/decoders for the reference schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// Cell i-1 stores Sum(i).
    PrecomputedSums,
    /// Raw bit blocks, in-superblock suffix counts and cumulative superblock sums.
    TwoLevelRank { block: usize, superblock: usize },
    /// x packed MSB-first into lg(cell_alphabet)-bit cells.
    RawIdentity,
    /// Cell i-1 stores Match(i).
    BracketTable,
}

/// The four reference constructions, as named in scheme files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    PrecomputedSums,
    TwoLevelRank,
    RawIdentity,
    BracketTable,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::PrecomputedSums => "precomputed_sums",
            Variant::TwoLevelRank => "two_level_rank",
            Variant::RawIdentity => "raw_identity",
            Variant::BracketTable => "bracket_table",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Variant::PrecomputedSums,
            Variant::TwoLevelRank,
            Variant::RawIdentity,
            Variant::BracketTable,
        ]
        .into_iter()
        .find(|v| v.name() == name)
    }
}

/// Builder parameters for a reference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpecParams {
    pub n: usize,
    pub block: usize,
    pub superblock: usize,
    pub cell_alphabet: u64,
    pub variant: Variant,
}

impl SchemeSpecParams {
    pub fn build(&self) -> Result<Scheme> {
        match self.variant {
            Variant::PrecomputedSums => build_precomputed_sums(self.n, self.cell_alphabet),
            Variant::TwoLevelRank => {
                build_two_level_rank(self.n, self.block, self.superblock, self.cell_alphabet)
            }
            Variant::RawIdentity => build_raw_identity(self.n, self.cell_alphabet),
            Variant::BracketTable => build_bracket_table(self.n, self.cell_alphabet),
        }
    }
}

impl Builtin {
    pub fn variant(&self) -> Variant {
        match self {
            Builtin::PrecomputedSums => Variant::PrecomputedSums,
            Builtin::TwoLevelRank { .. } => Variant::TwoLevelRank,
            Builtin::RawIdentity => Variant::RawIdentity,
            Builtin::BracketTable => Variant::BracketTable,
        }
    }

    pub(crate) fn encode(&self, x: &BitVector, cell_alphabet: u64) -> Vec<CellValue> {
        let n = x.len();
        match *self {
            Builtin::PrecomputedSums => (1..=n).map(|i| x.prefix_sum(i) as CellValue).collect(),
            Builtin::TwoLevelRank { block, superblock } => {
                let blocks = n / block;
                let per_super = superblock / block;
                let block_sums: Vec<usize> = (0..blocks)
                    .map(|b| x.bits()[b * block..(b + 1) * block].iter().map(|&v| v as usize).sum())
                    .collect();
                let mut cells = Vec::with_capacity(2 * blocks + n / superblock);
                for b in 0..blocks {
                    cells.push(pack_msb_first(&x.bits()[b * block..(b + 1) * block], block));
                }
                for b in 0..blocks {
                    let super_end = (b / per_super + 1) * per_super;
                    cells.push(block_sums[b + 1..super_end].iter().sum::<usize>() as CellValue);
                }
                for s in 0..n / superblock {
                    cells.push(x.prefix_sum((s + 1) * superblock) as CellValue);
                }
                cells
            }
            Builtin::RawIdentity => {
                let width = bits_per_cell(cell_alphabet);
                x.bits().chunks(width).map(|chunk| pack_msb_first(chunk, width)).collect()
            }
            Builtin::BracketTable => match_all(x.bits())
                .into_iter()
                .map(|m| m.unwrap_or(0) as CellValue)
                .collect(),
        }
    }

    /// Total on every value tuple, not only those an encoding produces.
    pub(crate) fn decode(&self, i: usize, values: &[CellValue], cell_alphabet: u64) -> i64 {
        match *self {
            Builtin::PrecomputedSums | Builtin::BracketTable => values[0] as i64,
            Builtin::TwoLevelRank { block, .. } => {
                let (raw, suffix, cumulative) = (values[0], values[1], values[2]);
                let offset = (i - 1) % block;
                let after: i64 = (offset + 1..block)
                    .map(|k| ((raw >> (block - 1 - k)) & 1) as i64)
                    .sum();
                cumulative as i64 - suffix as i64 - after
            }
            Builtin::RawIdentity => {
                let width = bits_per_cell(cell_alphabet);
                let mut total = 0;
                for (cell, &v) in values.iter().enumerate() {
                    for k in 0..width {
                        if cell * width + k < i {
                            total += ((v >> (width - 1 - k)) & 1) as i64;
                        }
                    }
                }
                total
            }
        }
    }
}

fn pack_msb_first(bits: &[u8], width: usize) -> CellValue {
    bits.iter()
        .chain(std::iter::repeat(&0))
        .take(width)
        .fold(0, |acc, &b| (acc << 1) | b as CellValue)
}

fn bits_per_cell(cell_alphabet: u64) -> usize {
    cell_alphabet.trailing_zeros() as usize
}

fn check_alphabet(cell_alphabet: u64) -> Result<()> {
    if !(2..=1 << 32).contains(&cell_alphabet) {
        return Err(Error::Parameter(format!(
            "cell alphabet {cell_alphabet} outside 2..=2^32"
        )));
    }
    Ok(())
}

pub fn build_precomputed_sums(n: usize, cell_alphabet: u64) -> Result<Scheme> {
    check_alphabet(cell_alphabet)?;
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    if cell_alphabet <= n as u64 {
        return Err(Error::Capacity(format!(
            "cell alphabet {cell_alphabet} cannot hold prefix sums up to {n}"
        )));
    }
    let probes = ProbeFamily::new((0..n).map(|c| vec![c]).collect(), n)?;
    Scheme::new(
        n,
        n,
        cell_alphabet,
        Domain::AllBitstrings,
        Encoder::Builtin(Builtin::PrecomputedSums),
        probes,
        Decoders::Builtin(Builtin::PrecomputedSums),
    )
}

pub fn build_two_level_rank(
    n: usize,
    block: usize,
    superblock: usize,
    cell_alphabet: u64,
) -> Result<Scheme> {
    check_alphabet(cell_alphabet)?;
    if block == 0 || superblock == 0 || superblock % block != 0 || n % superblock != 0 {
        return Err(Error::Parameter(format!(
            "need block | superblock | n, got block={block} superblock={superblock} n={n}"
        )));
    }
    if block >= 32 || cell_alphabet < 1 << block {
        return Err(Error::Parameter(format!(
            "cell alphabet {cell_alphabet} cannot pack {block} raw bits"
        )));
    }
    if cell_alphabet <= n as u64 {
        return Err(Error::Parameter(format!(
            "cell alphabet {cell_alphabet} cannot hold cumulative sums up to {n}"
        )));
    }
    let blocks = n / block;
    let supers = n / superblock;
    let sets = (1..=n)
        .map(|i| {
            let b = (i - 1) / block;
            let s = (i - 1) / superblock;
            vec![b, blocks + b, 2 * blocks + s]
        })
        .collect();
    let u = 2 * blocks + supers;
    let builtin = Builtin::TwoLevelRank { block, superblock };
    Scheme::new(
        n,
        u,
        cell_alphabet,
        Domain::AllBitstrings,
        Encoder::Builtin(builtin),
        ProbeFamily::new(sets, u)?,
        Decoders::Builtin(builtin),
    )
}

pub fn build_raw_identity(n: usize, cell_alphabet: u64) -> Result<Scheme> {
    check_alphabet(cell_alphabet)?;
    if !cell_alphabet.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "cell alphabet {cell_alphabet} is not a power of two"
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let width = bits_per_cell(cell_alphabet);
    let u = n.div_ceil(width);
    let sets = (1..=n).map(|i| (0..i.div_ceil(width)).collect()).collect();
    Scheme::new(
        n,
        u,
        cell_alphabet,
        Domain::AllBitstrings,
        Encoder::Builtin(Builtin::RawIdentity),
        ProbeFamily::new(sets, u)?,
        Decoders::Builtin(Builtin::RawIdentity),
    )
}

pub fn build_bracket_table(n: usize, cell_alphabet: u64) -> Result<Scheme> {
    check_alphabet(cell_alphabet)?;
    if n == 0 || n % 2 == 1 {
        return Err(Error::Parameter(format!(
            "bracket length must be even and positive, got {n}"
        )));
    }
    if cell_alphabet <= n as u64 {
        return Err(Error::Capacity(format!(
            "cell alphabet {cell_alphabet} cannot hold match indices up to {n}"
        )));
    }
    Scheme::new(
        n,
        n,
        cell_alphabet,
        Domain::BalancedBrackets,
        Encoder::Builtin(Builtin::BracketTable),
        ProbeFamily::new((0..n).map(|c| vec![c]).collect(), n)?,
        Decoders::Builtin(Builtin::BracketTable),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{verify_scheme, Coverage};

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn precomputed_encodes_running_sums() {
        let s = build_precomputed_sums(4, 8).unwrap();
        assert_eq!(s.encode(&bv("1011")).unwrap().cells(), &[1, 1, 2, 3]);
        let s1 = build_precomputed_sums(1, 2).unwrap();
        assert_eq!(s1.encode(&bv("1")).unwrap().cells(), &[1]);
        assert_eq!(s.redundancy().unwrap(), 8.0);
        assert!(matches!(build_precomputed_sums(4, 4), Err(Error::Capacity(_))));
    }

    #[test]
    fn two_level_shape() {
        let s = build_two_level_rank(16, 4, 16, 17).unwrap();
        assert_eq!(s.u(), 9);
        assert!(s.probes().sets().iter().all(|q| q.len() == 3));
        assert_eq!(s.answer_query(&BitVector::ones(16), 7).unwrap(), 7);
        assert_eq!(s.answer_query(&BitVector::ones(16), 16).unwrap(), 16);
        assert!(build_two_level_rank(16, 3, 16, 17).is_err());
        assert!(build_two_level_rank(16, 4, 8, 15).is_err());
    }

    #[test]
    fn two_level_first_superblock_sum_five() {
        let s = build_two_level_rank(32, 4, 16, 33).unwrap();
        let x = bv("11111000000000000000000011110000");
        for i in 1..=32 {
            assert_eq!(s.answer_query(&x, i).unwrap(), x.prefix_sum(i) as i64);
        }
    }

    #[test]
    fn raw_identity_layout() {
        let s = build_raw_identity(8, 16).unwrap();
        assert_eq!(s.u(), 2);
        assert_eq!(s.probes().get(3), &[0]);
        assert_eq!(s.probes().get(8), &[0, 1]);
        assert_eq!(s.q(), 2);
        assert_eq!(s.redundancy().unwrap(), 0.0);
        let report = verify_scheme(&s, Coverage::Exhaustive).unwrap();
        assert!(report.passed());
        assert_eq!(report.checked, 256);
        assert!(build_raw_identity(8, 12).is_err());
    }

    #[test]
    fn raw_identity_partial_last_cell() {
        let s = build_raw_identity(6, 16).unwrap();
        assert_eq!(s.u(), 2);
        assert!(s.redundancy().unwrap() > 0.0);
        assert!(verify_scheme(&s, Coverage::Exhaustive).unwrap().passed());
    }

    #[test]
    fn bracket_table_cells() {
        let s = build_bracket_table(2, 4).unwrap();
        assert_eq!(s.encode(&bv("()")).unwrap().cells(), &[2, 1]);
        let s4 = build_bracket_table(4, 8).unwrap();
        assert_eq!(s4.encode(&bv("(())")).unwrap().cells(), &[4, 3, 2, 1]);
        assert_eq!(s4.encode(&bv("()()")).unwrap().cells(), &[2, 1, 4, 3]);
        assert!(build_bracket_table(5, 8).is_err());
        assert!(matches!(s4.encode(&bv("))((")), Err(Error::Domain(_))));
    }

    #[test]
    fn variant_names_roundtrip() {
        for v in [
            Variant::PrecomputedSums,
            Variant::TwoLevelRank,
            Variant::RawIdentity,
            Variant::BracketTable,
        ] {
            assert_eq!(Variant::from_name(v.name()), Some(v));
        }
        assert_eq!(Variant::from_name("nope"), None);
    }
}
