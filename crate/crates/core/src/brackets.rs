//! Balanced-bracket strings over {0,1} with 1 = open and 0 = closed.
//!
//! Matching on arbitrary (possibly unbalanced) strings follows the usual stack
//! scan: a closed bracket pairs with the nearest unpaired open bracket to its
//! left, and anything left over is unmatched.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::bits::BitVector;
use crate::error::{Error, Result};

pub const MAX_ENUMERATE_BAL: usize = 28;
pub const MAX_WALK_ENUMERATION: usize = 24;

pub fn is_balanced(x: &BitVector) -> bool {
    let mut depth: i64 = 0;
    for &b in x.bits() {
        depth += if b == 1 { 1 } else { -1 };
        if depth < 0 {
            return false;
        }
    }
    depth == 0
}

/// Stack-scan partners for every position, 1-indexed. `None` marks an
/// unmatched bracket.
pub fn match_all(bits: &[u8]) -> Vec<Option<usize>> {
    let mut partner = vec![None; bits.len()];
    let mut stack = Vec::new();
    for (pos, &b) in bits.iter().enumerate() {
        if b == 1 {
            stack.push(pos);
        } else if let Some(open) = stack.pop() {
            partner[open] = Some(pos + 1);
            partner[pos] = Some(open + 1);
        }
    }
    partner
}

/// Match(i): the 1-indexed partner of bracket `i` in a balanced string.
pub fn match_index(x: &BitVector, i: usize) -> Result<usize> {
    if !is_balanced(x) {
        return Err(Error::Domain(format!("{x} is not balanced")));
    }
    if i == 0 || i > x.len() {
        return Err(Error::Range { index: i, n: x.len() });
    }
    Ok(match_all(x.bits())[i - 1].expect("balanced strings match every position"))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for step in 0..k {
        acc *= n - step;
        acc /= step + 1;
    }
    acc
}

/// |Bal(n)| = C(n, n/2) / (n/2 + 1).
pub fn catalan_count(n: usize) -> Result<BigUint> {
    if n % 2 == 1 {
        return Err(Error::Parameter(format!("bracket length {n} is odd")));
    }
    let half = (n / 2) as u64;
    Ok(binomial(n as u64, half) / (half + 1))
}

/// Bal(n) in lexicographic order of the bit strings.
pub fn enumerate_bal(n: usize) -> Result<Vec<BitVector>> {
    if n % 2 == 1 {
        return Err(Error::Parameter(format!("bracket length {n} is odd")));
    }
    if n > MAX_ENUMERATE_BAL {
        return Err(Error::Size {
            what: format!("Bal({n})"),
            count: catalan_count(n)?.to_u128().unwrap_or(u128::MAX),
            limit: catalan_count(MAX_ENUMERATE_BAL)?.to_u128().unwrap_or(u128::MAX),
        });
    }
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(n);
    extend_balanced(n, 0, &mut buf, &mut out);
    Ok(out)
}

fn extend_balanced(n: usize, depth: usize, buf: &mut Vec<u8>, out: &mut Vec<BitVector>) {
    let remaining = n - buf.len();
    if remaining == 0 {
        out.push(BitVector::new(buf.clone()).expect("bits are 0/1"));
        return;
    }
    // 0 sorts before 1, so closing first keeps the output lexicographic.
    if depth > 0 {
        buf.push(0);
        extend_balanced(n, depth - 1, buf, out);
        buf.pop();
    }
    if depth < remaining - 1 {
        buf.push(1);
        extend_balanced(n, depth + 1, buf, out);
        buf.pop();
    }
}

fn check_walk_len(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Parameter("walk length d must be at least 1".into()));
    }
    if d > MAX_WALK_ENUMERATION {
        return Err(Error::Size {
            what: format!("{{0,1}}^{d}"),
            count: 1u128 << d,
            limit: 1u128 << MAX_WALK_ENUMERATION,
        });
    }
    Ok(())
}

fn count_over_cube(d: usize, pred: impl Fn(&[u8], &[Option<usize>]) -> bool) -> BigRational {
    let hits = crate::bits::all_bitstrings(d)
        .filter(|x| pred(x.bits(), &match_all(x.bits())))
        .count();
    BigRational::new(hits.into(), (BigUint::one() << d).into())
}

/// Pr over uniform x in {0,1}^d that x_1 is open and unmatched by x_2..x_d.
pub fn unmatched_open_prob(d: usize) -> Result<BigRational> {
    check_walk_len(d)?;
    Ok(count_over_cube(d, |bits, partner| {
        bits[0] == 1 && partner[0].is_none()
    }))
}

/// Pr over uniform x in {0,1}^d that x_d is closed and unmatched by x_1..x_{d-1}.
pub fn unmatched_close_prob(d: usize) -> Result<BigRational> {
    check_walk_len(d)?;
    Ok(count_over_cube(d, |bits, partner| {
        bits[d - 1] == 0 && partner[d - 1].is_none()
    }))
}

/// Probability that a uniform ±1 walk of `steps` steps from 0 never drops
/// below 0, by dynamic programming over the walk height.
pub fn nonnegative_walk_prob(steps: usize) -> BigRational {
    let mut counts = vec![BigUint::one()];
    for _ in 0..steps {
        let mut next = vec![BigUint::zero(); counts.len() + 1];
        for (h, c) in counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            next[h + 1] += c;
            if h > 0 {
                next[h - 1] += c;
            }
        }
        counts = next;
    }
    let total: BigUint = counts.into_iter().sum();
    BigRational::new(total.into(), (BigUint::one() << steps).into())
}

/// Half the probability that a walk of d - 1 steps stays nonnegative: an
/// open bracket at x_1 is unmatched through x_d exactly when the walk of
/// x_2..x_d started at height 1 never reaches 0.
pub fn walk_reduction(d: usize) -> Result<BigRational> {
    check_walk_len(d)?;
    Ok(nonnegative_walk_prob(d - 1) / BigRational::from_integer(2.into()))
}

/// Minimum of sqrt(d) * unmatched_open_prob(d) over the given range.
pub fn empirical_alpha(ds: std::ops::RangeInclusive<usize>) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for d in ds {
        let p = unmatched_open_prob(d)?.to_f64().unwrap_or(0.0);
        let scaled = (d as f64).sqrt() * p;
        if best.is_none_or(|(_, b)| scaled < b) {
            best = Some((d, scaled));
        }
    }
    best.ok_or_else(|| Error::Parameter("empty range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn balanced_examples() {
        assert!(is_balanced(&bv("()")));
        assert!(!is_balanced(&bv(")(")));
        assert!(!is_balanced(&bv("(()")));
        assert!(is_balanced(&bv("")));
    }

    #[test]
    fn match_examples() {
        assert_eq!(match_index(&bv("()"), 1).unwrap(), 2);
        assert_eq!(match_index(&bv("(())"), 1).unwrap(), 4);
        assert_eq!(match_index(&bv("(())"), 2).unwrap(), 3);
        assert_eq!(match_index(&bv("()()"), 3).unwrap(), 4);
        assert!(matches!(match_index(&bv(")("), 1), Err(Error::Domain(_))));
        assert!(matches!(match_index(&bv("()"), 3), Err(Error::Range { .. })));
    }

    #[test]
    fn catalan_small_values() {
        let vals: Vec<u64> = [0, 2, 4, 6, 8]
            .iter()
            .map(|&n| catalan_count(n).unwrap().to_u64().unwrap())
            .collect();
        assert_eq!(vals, [1, 1, 2, 5, 14]);
        assert!(catalan_count(5).is_err());
    }

    #[test]
    fn enumerate_small() {
        let to_s = |v: Vec<BitVector>| v.iter().map(|b| b.to_string()).collect::<Vec<_>>();
        assert_eq!(to_s(enumerate_bal(0).unwrap()), [""]);
        assert_eq!(to_s(enumerate_bal(2).unwrap()), ["10"]);
        assert_eq!(to_s(enumerate_bal(4).unwrap()), ["1010", "1100"]);
        assert!(matches!(enumerate_bal(30), Err(Error::Size { .. })));
    }

    #[test]
    fn unmatched_small_values() {
        assert_eq!(unmatched_open_prob(1).unwrap(), ratio(1, 2));
        assert_eq!(unmatched_open_prob(2).unwrap(), ratio(1, 4));
        // "(((" and "(()" only; "()(" pairs x_1 with x_2.
        assert_eq!(unmatched_open_prob(3).unwrap(), ratio(1, 4));
        assert!(unmatched_open_prob(0).is_err());
    }

    #[test]
    fn walk_dp_small() {
        assert_eq!(nonnegative_walk_prob(0), ratio(1, 1));
        assert_eq!(nonnegative_walk_prob(1), ratio(1, 2));
        assert_eq!(nonnegative_walk_prob(2), ratio(1, 2));
        assert_eq!(nonnegative_walk_prob(3), ratio(3, 8));
    }
}
