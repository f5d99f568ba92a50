//! Exact entropy and statistical distance over explicit finite distributions.
//!
//! A [`Distribution`] holds integer weights over tuples of small integers, so
//! every probability is an exact rational `weight / total`. Entropies are
//! reported as `f64`; inequality checks against them use a 1e-9 tolerance.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::bits::BitVector;
use crate::error::{Error, Result};

pub const TOLERANCE: f64 = 1e-9;
const MAX_TOTAL: u64 = 1 << 62;
/// Cap on the q-subsets [`good_cells`] will verify.
pub const MAX_SUBSETS: u128 = 200_000;

pub type Tuple = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    arity: usize,
    entries: Vec<(Tuple, u64)>,
    total: u64,
}

impl Distribution {
    /// Weights need not be normalized; zero weights are dropped and repeated
    /// tuples accumulate.
    pub fn from_weights(arity: usize, weights: impl IntoIterator<Item = (Tuple, u64)>) -> Result<Self> {
        let mut acc: BTreeMap<Tuple, u64> = BTreeMap::new();
        for (t, w) in weights {
            if t.len() != arity {
                return Err(Error::Domain(format!(
                    "tuple of length {} in a distribution of arity {arity}",
                    t.len()
                )));
            }
            if w > 0 {
                let slot = acc.entry(t).or_insert(0);
                *slot = slot
                    .checked_add(w)
                    .filter(|&s| s <= MAX_TOTAL)
                    .ok_or_else(|| Error::Domain("weights overflow".into()))?;
            }
        }
        let total = acc
            .values()
            .try_fold(0u64, |s, &w| s.checked_add(w).filter(|&s| s <= MAX_TOTAL))
            .ok_or_else(|| Error::Domain("total weight exceeds 2^62".into()))?;
        if total == 0 {
            return Err(Error::Domain("distribution has empty support".into()));
        }
        Ok(Distribution {
            arity,
            entries: acc.into_iter().collect(),
            total,
        })
    }

    pub fn uniform(arity: usize, support: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let mut tuples: Vec<Tuple> = support.into_iter().collect();
        tuples.sort();
        tuples.dedup();
        Self::from_weights(arity, tuples.into_iter().map(|t| (t, 1)))
    }

    /// Uniform over a set of n-bit strings.
    pub fn uniform_bits(n: usize, xs: &[BitVector]) -> Result<Self> {
        Self::uniform(n, xs.iter().map(bits_tuple))
    }

    /// Uniform over [alphabet]^arity.
    pub fn uniform_cube(arity: usize, alphabet: u32) -> Result<Self> {
        let count = (alphabet as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
        if count > 1 << 24 {
            return Err(Error::Size {
                what: format!("[{alphabet}]^{arity}"),
                count,
                limit: 1 << 24,
            });
        }
        let tuples = (0..count as u64).map(|mut k| {
            let mut t = vec![0; arity];
            for slot in t.iter_mut().rev() {
                *slot = (k % alphabet as u64) as u32;
                k /= alphabet as u64;
            }
            t
        });
        Self::uniform(arity, tuples)
    }

    /// Exact probabilities, scaled to integer weights by their common denominator.
    pub fn from_probabilities(arity: usize, entries: Vec<(Tuple, BigRational)>) -> Result<Self> {
        let mut sum = BigRational::zero();
        let mut denom = num_bigint::BigInt::from(1);
        for (_, p) in &entries {
            if p < &BigRational::zero() {
                return Err(Error::Domain(format!("negative probability {p}")));
            }
            sum += p;
            denom = num_integer::lcm(denom, p.denom().clone());
        }
        if sum != BigRational::from_integer(1.into()) {
            return Err(Error::Domain(format!("probabilities sum to {sum}, not 1")));
        }
        let weights = entries
            .into_iter()
            .map(|(t, p)| {
                let w = (p * BigRational::from_integer(denom.clone())).to_integer();
                w.to_u64()
                    .map(|w| (t, w))
                    .ok_or_else(|| Error::Domain("probability denominators too large".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_weights(arity, weights)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(Tuple, u64)] {
        &self.entries
    }

    pub fn weight(&self, t: &[u32]) -> u64 {
        self.entries
            .binary_search_by(|(k, _)| k.as_slice().cmp(t))
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    pub fn prob(&self, t: &[u32]) -> f64 {
        self.weight(t) as f64 / self.total as f64
    }

    pub fn exact_prob(&self, t: &[u32]) -> BigRational {
        BigRational::new(self.weight(t).into(), self.total.into())
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.entries[0].1;
        self.entries.iter().all(|(_, w)| *w == first)
    }

    /// Largest coordinate value plus one.
    pub fn value_bound(&self) -> u32 {
        self.entries
            .iter()
            .flat_map(|(t, _)| t.iter().copied())
            .max()
            .map_or(1, |v| v + 1)
    }

    /// Marginal on the listed coordinates, in the listed order.
    pub fn marginal(&self, coords: &[usize]) -> Distribution {
        let mut projected: Vec<(Tuple, u64)> = self
            .entries
            .iter()
            .map(|(t, w)| (project(t, coords), *w))
            .collect();
        projected.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut entries: Vec<(Tuple, u64)> = Vec::with_capacity(projected.len());
        for (t, w) in projected {
            match entries.last_mut() {
                Some((last, acc)) if *last == t => *acc += w,
                _ => entries.push((t, w)),
            }
        }
        Distribution {
            arity: coords.len(),
            entries,
            total: self.total,
        }
    }

    /// Distribution conditioned on an event with nonzero probability.
    pub fn condition(&self, event: impl Fn(&[u32]) -> bool) -> Result<Distribution> {
        Self::from_weights(
            self.arity,
            self.entries
                .iter()
                .filter(|(t, _)| event(t))
                .map(|(t, w)| (t.clone(), *w)),
        )
    }

    /// Exact probability of an event.
    pub fn event_prob(&self, event: impl Fn(&[u32]) -> bool) -> BigRational {
        let hits: u64 = self.entries.iter().filter(|(t, _)| event(t)).map(|(_, w)| w).sum();
        BigRational::new(hits.into(), self.total.into())
    }
}

pub fn bits_tuple(x: &BitVector) -> Tuple {
    x.bits().iter().map(|&b| b as u32).collect()
}

fn project(t: &[u32], coords: &[usize]) -> Tuple {
    coords.iter().map(|&c| t[c]).collect()
}

fn weights_entropy(total: u64, weights: impl Iterator<Item = u64>) -> f64 {
    let t = total as f64;
    weights
        .map(|w| {
            let w = w as f64;
            w / t * (t / w).log2()
        })
        .sum()
}

/// Shannon entropy in bits.
pub fn entropy(dist: &Distribution) -> f64 {
    weights_entropy(dist.total, dist.entries.iter().map(|(_, w)| *w))
}

/// H(target | given), computed as the average over values of `given` of the
/// entropy of `target` conditioned on that value. An empty `given` yields
/// the unconditional entropy.
pub fn conditional_entropy(dist: &Distribution, target: &[usize], given: &[usize]) -> f64 {
    let mut groups: BTreeMap<Tuple, BTreeMap<Tuple, u64>> = BTreeMap::new();
    for (t, w) in &dist.entries {
        *groups
            .entry(project(t, given))
            .or_default()
            .entry(project(t, target))
            .or_insert(0) += w;
    }
    let total = dist.total as f64;
    groups
        .values()
        .map(|inner| {
            let mass: u64 = inner.values().sum();
            mass as f64 / total * weights_entropy(mass, inner.values().copied())
        })
        .sum()
}

/// Total variation distance, exact up to the final division.
pub fn tv_distance(d1: &Distribution, d2: &Distribution) -> Result<f64> {
    if d1.arity != d2.arity {
        return Err(Error::Domain(format!(
            "cannot compare distributions of arity {} and {}",
            d1.arity, d2.arity
        )));
    }
    let (t1, t2) = (d1.total as u128, d2.total as u128);
    let mut merged: BTreeMap<&[u32], (u128, u128)> = BTreeMap::new();
    for (t, w) in &d1.entries {
        merged.entry(t).or_default().0 = *w as u128;
    }
    for (t, w) in &d2.entries {
        merged.entry(t).or_default().1 = *w as u128;
    }
    let numer: u128 = merged.values().map(|&(a, b)| (a * t2).abs_diff(b * t1)).sum();
    Ok(numer as f64 / (2 * t1 * t2) as f64)
}

/// TV distance from the uniform distribution over a universe of the given
/// size that contains the support.
pub fn tv_to_uniform(dist: &Distribution, universe: u128) -> Result<f64> {
    tv_to_uniform_counts(dist.total, dist.entries.iter().map(|(_, w)| *w), universe)
}

fn tv_to_uniform_counts(total: u64, weights: impl Iterator<Item = u64>, universe: u128) -> Result<f64> {
    if universe == 0 || universe > 1 << 62 {
        return Err(Error::Size {
            what: "uniform universe".into(),
            count: universe,
            limit: 1 << 62,
        });
    }
    let t = total as u128;
    let mut support = 0u128;
    let mut numer = 0u128;
    for w in weights {
        support += 1;
        numer += (w as u128 * universe).abs_diff(t);
    }
    if support > universe {
        return Err(Error::Domain(format!(
            "support of {support} tuples exceeds universe of {universe}"
        )));
    }
    numer += (universe - support) * t;
    Ok(numer as f64 / (2 * t * universe) as f64)
}

fn pow_universe(alphabet: u64, arity: usize) -> u128 {
    (alphabet as u128).checked_pow(arity as u32).unwrap_or(u128::MAX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityCheck {
    pub entropy: f64,
    pub alpha: f64,
    pub distance: f64,
    /// 4 sqrt(alpha).
    pub bound: f64,
    pub holds: bool,
}

/// If H(X) >= lg|S| - alpha then X is 4 sqrt(alpha)-close to uniform on S.
/// Reports the measured distance, or a hypothesis error when the entropy
/// precondition fails.
pub fn check_high_entropy_uniform(dist: &Distribution, universe: u128, alpha: f64) -> Result<UniformityCheck> {
    let h = entropy(dist);
    let required = (universe as f64).log2() - alpha;
    if h < required - TOLERANCE {
        return Err(Error::Hypothesis {
            what: "H(X) >= lg|S| - alpha".into(),
            measured: h,
            required,
        });
    }
    let distance = tv_to_uniform(dist, universe)?;
    let bound = 4.0 * alpha.max(0.0).sqrt();
    Ok(UniformityCheck {
        entropy: h,
        alpha,
        distance,
        bound,
        holds: distance <= bound + TOLERANCE,
    })
}

/// Block sizes s_1..s_k of a partition of n bits into consecutive blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    sizes: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::Parameter("block sizes must be positive and nonempty".into()));
        }
        Ok(BlockStructure { sizes })
    }

    /// One block ending at each of the given 1-indexed cut points, with the
    /// last block padded to run through n.
    pub fn from_cuts(cuts: &[usize], n: usize) -> Result<Self> {
        let mut sizes = Vec::new();
        let mut prev = 0;
        for &c in cuts {
            if c <= prev || c > n {
                return Err(Error::Parameter(format!("cut {c} out of order or beyond n = {n}")));
            }
            sizes.push(c - prev);
            prev = c;
        }
        if prev < n {
            match sizes.last_mut() {
                Some(last) => *last += n - prev,
                None => sizes.push(n),
            }
        }
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// 0-indexed coordinate range of block `i` (1-indexed).
    pub fn coords(&self, i: usize) -> std::ops::Range<usize> {
        let start: usize = self.sizes[..i - 1].iter().sum();
        start..start + self.sizes[i - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoodSetKind {
    Blocks,
    Cells,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodSetReport {
    pub kind: GoodSetKind,
    /// Good indices: 1-indexed blocks, or 0-indexed cells.
    pub good: Vec<usize>,
    /// Entropy deficiency a.
    pub deficiency: f64,
    /// epsilon for blocks, eta for cells.
    pub parameter: f64,
    /// Per-index entropy deficiency: s_i - H(Z_i | Z_<i) for blocks,
    /// lg m - H(Y_k) for cells.
    pub scores: Vec<f64>,
    /// Per-index TV distance of the marginal from uniform.
    pub marginal_tv: Vec<f64>,
    /// The lemma's lower bound on |G|.
    pub size_bound: f64,
    pub size_bound_satisfied: bool,
    /// Number of q-subsets checked for closeness (cells only).
    pub subsets_verified: u128,
}

impl GoodSetReport {
    pub fn deficiency_sum(&self) -> f64 {
        self.scores.iter().sum()
    }
}

fn require_uniform(dist: &Distribution) -> Result<()> {
    if !dist.is_uniform() {
        return Err(Error::Domain("expected a uniform distribution over a set".into()));
    }
    Ok(())
}

/// Blocks Z_i with H(Z_i | Z_1..Z_{i-1}) >= s_i - epsilon, for Z uniform on X.
pub fn good_blocks(x: &Distribution, blocks: &BlockStructure, epsilon: f64) -> Result<GoodSetReport> {
    require_uniform(x)?;
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = x.arity();
    if blocks.total() != n {
        return Err(Error::Parameter(format!(
            "block sizes sum to {}, inputs have {n} bits",
            blocks.total()
        )));
    }
    if x.value_bound() > 2 {
        return Err(Error::Domain("block analysis needs 0/1 tuples".into()));
    }
    let a = n as f64 - (x.support_len() as f64).log2();
    let mut scores = Vec::with_capacity(blocks.k());
    let mut marginal_tv = Vec::with_capacity(blocks.k());
    let mut good = Vec::new();
    for i in 1..=blocks.k() {
        let range = blocks.coords(i);
        let target: Vec<usize> = range.clone().collect();
        let given: Vec<usize> = (0..range.start).collect();
        let h = conditional_entropy(x, &target, &given);
        let s = blocks.sizes()[i - 1] as f64;
        scores.push(s - h);
        marginal_tv.push(tv_to_uniform(&x.marginal(&target), 1u128 << target.len())?);
        if h >= s - epsilon - TOLERANCE {
            good.push(i);
        }
    }
    let size_bound = blocks.k() as f64 - a / epsilon;
    Ok(GoodSetReport {
        kind: GoodSetKind::Blocks,
        size_bound_satisfied: good.len() as f64 >= size_bound - TOLERANCE,
        good,
        deficiency: a,
        parameter: epsilon,
        scores,
        marginal_tv,
        size_bound,
        subsets_verified: 0,
    })
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for step in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - step) as u128) / (step as u128 + 1);
    }
    acc
}

/// Visits every k-subset of `items` in lexicographic order until `f` returns false.
fn for_each_subset(items: &[usize], k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0; k];
    loop {
        for (slot, &i) in buf.iter_mut().zip(&idx) {
            *slot = items[i];
        }
        if !f(&buf) {
            return;
        }
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// TV distance from uniform of the marginal of `y` on `coords`, over [m]^|coords|.
pub fn subset_tv(y: &Distribution, coords: &[usize], m: u64) -> Result<f64> {
    let marginal = y.marginal(coords);
    tv_to_uniform(&marginal, pow_universe(m, coords.len()))
}

/// A set G of cells such that every q-subset of G is eta-close to uniform
/// under Y, verified exhaustively.
///
/// G starts as every cell. While some q-subset fails, the cell with the
/// largest marginal entropy deficiency among the failing subsets is dropped
/// (ties to the lower index). When |G| < q the whole of G is checked as one
/// subset.
pub fn good_cells(y: &Distribution, m: u64, q: usize, eta: f64) -> Result<GoodSetReport> {
    require_uniform(y)?;
    if !(eta > 0.0) {
        return Err(Error::Parameter(format!("eta must be positive, got {eta}")));
    }
    if m < 2 || y.value_bound() as u64 > m {
        return Err(Error::Domain(format!("cell values exceed alphabet {m}")));
    }
    let u = y.arity();
    let lg_m = (m as f64).log2();
    let a = u as f64 * lg_m - (y.support_len() as f64).log2();
    let mut scores = Vec::with_capacity(u);
    let mut marginal_tv = Vec::with_capacity(u);
    for k in 0..u {
        let marginal = y.marginal(&[k]);
        scores.push(lg_m - entropy(&marginal));
        marginal_tv.push(tv_to_uniform(&marginal, m as u128)?);
    }

    let mut good: Vec<usize> = (0..u).collect();
    let mut verified = 0u128;
    loop {
        let size = q.min(good.len());
        let count = binomial_u128(good.len(), size);
        if count > MAX_SUBSETS {
            return Err(Error::Size {
                what: format!("{size}-subsets of {} cells", good.len()),
                count,
                limit: MAX_SUBSETS,
            });
        }
        let mut failing_cells: Vec<usize> = Vec::new();
        let mut err = None;
        for_each_subset(&good, size, |subset| match subset_tv(y, subset, m) {
            Ok(tv) => {
                if tv > eta + TOLERANCE {
                    failing_cells.extend_from_slice(subset);
                }
                true
            }
            Err(e) => {
                err = Some(e);
                false
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        verified += count;
        if failing_cells.is_empty() {
            break;
        }
        failing_cells.sort_unstable();
        failing_cells.dedup();
        let worst = failing_cells
            .iter()
            .copied()
            .max_by(|&p, &r| scores[p].total_cmp(&scores[r]).then(r.cmp(&p)))
            .expect("nonempty");
        good.retain(|&c| c != worst);
    }
    let size_bound = u as f64 - 16.0 * q as f64 * a / (eta * eta);
    Ok(GoodSetReport {
        kind: GoodSetKind::Cells,
        size_bound_satisfied: good.len() as f64 >= size_bound - TOLERANCE,
        good,
        deficiency: a,
        parameter: eta,
        scores,
        marginal_tv,
        size_bound,
        subsets_verified: verified,
    })
}

/// Exact `weight / total` as a big rational.
pub fn ratio(numer: u64, denom: u64) -> BigRational {
    BigRational::new(BigUint::from(numer).into(), BigUint::from(denom).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::all_bitstrings;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn entropy_examples() {
        assert!(close(entropy(&Distribution::uniform_cube(3, 2).unwrap()), 3.0));
        let point = Distribution::from_weights(1, [(vec![0], 5)]).unwrap();
        assert_eq!(entropy(&point), 0.0);
        let d = Distribution::from_weights(1, [(vec![0], 2), (vec![1], 1), (vec![2], 1)]).unwrap();
        assert!(close(entropy(&d), 1.5));
    }

    #[test]
    fn conditional_entropy_examples() {
        let indep = Distribution::uniform_cube(2, 2).unwrap();
        assert!(close(conditional_entropy(&indep, &[0], &[1]), 1.0));
        let copy = Distribution::uniform(2, [vec![0, 0], vec![1, 1]]).unwrap();
        assert!(close(conditional_entropy(&copy, &[0], &[1]), 0.0));
        // Y = 0 leaves X uniform on {0,1} (mass 2/3); Y = 1 forces X = 0.
        let three = Distribution::uniform(2, [vec![0, 0], vec![0, 1], vec![1, 0]]).unwrap();
        assert!(close(conditional_entropy(&three, &[0], &[1]), 2.0 / 3.0));
        assert!(close(conditional_entropy(&three, &[0], &[]), entropy(&three.marginal(&[0]))));
    }

    #[test]
    fn tv_examples() {
        let u = Distribution::uniform_cube(1, 2).unwrap();
        assert_eq!(tv_distance(&u, &u).unwrap(), 0.0);
        let a = Distribution::uniform(1, [vec![0]]).unwrap();
        let b = Distribution::uniform(1, [vec![1]]).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        let skew = Distribution::from_weights(1, [(vec![0], 3), (vec![1], 1)]).unwrap();
        assert_eq!(tv_distance(&skew, &u).unwrap(), 0.25);
        assert!(tv_distance(&skew, &Distribution::uniform_cube(2, 2).unwrap()).is_err());
    }

    #[test]
    fn high_entropy_examples() {
        let u = Distribution::uniform_cube(3, 2).unwrap();
        let check = check_high_entropy_uniform(&u, 8, 0.0).unwrap();
        assert_eq!(check.distance, 0.0);
        assert!(check.holds);

        let half = Distribution::uniform(4, all_bitstrings(4).filter(|x| x.get(1) == 0).map(|x| bits_tuple(&x)))
            .unwrap();
        let check = check_high_entropy_uniform(&half, 16, 1.0).unwrap();
        assert_eq!(check.distance, 0.5);
        assert_eq!(check.bound, 4.0);
        assert!(matches!(
            check_high_entropy_uniform(&half, 16, 0.5),
            Err(Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn good_blocks_full_cube() {
        let x = Distribution::uniform_cube(6, 2).unwrap();
        let r = good_blocks(&x, &BlockStructure::new(vec![2, 1, 3]).unwrap(), 0.1).unwrap();
        assert_eq!(r.good, vec![1, 2, 3]);
        assert_eq!(r.deficiency, 0.0);
    }

    #[test]
    fn good_blocks_first_bit_fixed() {
        let xs: Vec<BitVector> = all_bitstrings(4).filter(|x| x.get(1) == 0).collect();
        let x = Distribution::uniform_bits(4, &xs).unwrap();
        let r = good_blocks(&x, &BlockStructure::new(vec![1; 4]).unwrap(), 0.5).unwrap();
        assert!(r.scores.iter().zip([1.0, 0.0, 0.0, 0.0]).all(|(a, b)| close(*a, b)));
        assert_eq!(r.good, vec![2, 3, 4]);
        assert!(close(r.size_bound, 2.0));
        assert!(r.size_bound_satisfied);
    }

    #[test]
    fn good_cells_examples() {
        let full = Distribution::uniform_cube(3, 2).unwrap();
        let r = good_cells(&full, 2, 2, 0.01).unwrap();
        assert_eq!(r.good, vec![0, 1, 2]);

        let y = Distribution::uniform(3, [vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1]]).unwrap();
        let r1 = good_cells(&y, 2, 1, 0.25).unwrap();
        assert_eq!(r1.good, vec![1, 2]);
        assert_eq!(r1.marginal_tv[0], 0.5);
        let r2 = good_cells(&y, 2, 2, 0.25).unwrap();
        assert_eq!(r2.good, vec![1, 2]);
    }

    #[test]
    fn subsets_in_order() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 4, 6, 9], 2, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![1, 4]);
        assert_eq!(seen[5], vec![6, 9]);
        let mut empty = 0;
        for_each_subset(&[1, 2], 0, |_| {
            empty += 1;
            true
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn from_probabilities_scales_exactly() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let d = Distribution::from_probabilities(1, vec![(vec![0], r(1, 2)), (vec![1], r(1, 4)), (vec![2], r(1, 4))])
            .unwrap();
        assert_eq!(d.total(), 4);
        assert_eq!(d.weight(&[0]), 2);
        assert!(Distribution::from_probabilities(1, vec![(vec![0], r(1, 2))]).is_err());
    }

    #[test]
    fn block_cuts() {
        let b = BlockStructure::from_cuts(&[3, 6, 9], 16).unwrap();
        assert_eq!(b.sizes(), &[3, 3, 10]);
        assert_eq!(b.coords(3), 6..16);
        assert!(BlockStructure::from_cuts(&[3, 3], 8).is_err());
    }
}
