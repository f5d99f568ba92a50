//! The entropy-sum lemma: when the bits after a prefix carry nearly full
//! conditional entropy, a threshold t exists for which a long prefix sum lands
//! well above t + (l+d)/2 and a shorter one below t + l/2 with constant
//! probability each, but the two events almost never happen together.
//!
//! Every probability is computed exactly, either by enumerating an explicit
//! distribution or, for the uniform distribution on {0,1}^n, from binomial
//! coefficients.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::brackets::binomial;
use crate::error::{Error, Result};
use crate::info::{self, Distribution, Tuple, TOLERANCE};

fn rat(numer: u64, denom: u64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

fn half_power(trials: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << trials)
}

/// C(n, 0), ..., C(n, n).
fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n + 1);
    let mut acc = BigUint::one();
    row.push(acc.clone());
    for k in 0..n {
        acc = acc * (n - k) / (k + 1);
        row.push(acc.clone());
    }
    row
}

/// Pr[Bin(trials, 1/2) >= threshold], exactly.
pub fn binomial_tail(trials: usize, threshold: i64) -> BigRational {
    if threshold <= 0 {
        return BigRational::one();
    }
    if threshold as u64 > trials as u64 {
        return BigRational::zero();
    }
    let row = binomial_row(trials);
    let hits: BigUint = row[threshold as usize..].iter().sum();
    BigRational::from_integer(hits.into()) * half_power(trials)
}

/// Pr[Bin(m, 1/2) = k], exactly.
pub fn binomial_point(m: usize, k: usize) -> BigRational {
    BigRational::from_integer(binomial(m as u64, k as u64).into()) * half_power(m)
}

/// Checks 1/(2 sqrt m) <= Pr[Bin(m) = floor(m/2)] <= 1/sqrt m exactly, by
/// comparing squares.
pub fn central_estimate_holds(m: usize) -> bool {
    let mode = binomial(m as u64, (m / 2) as u64);
    let square = &mode * &mode;
    let four_m = BigUint::one() << (2 * m);
    &square * (4 * m) >= four_m && &square * m <= four_m
}

/// Smallest integer k with k >= r. Values within 1e-9 of an integer are
/// taken to be that integer, so c^(1/3) sqrt d = 8 at c = 64, d = 4 lands
/// on 8 rather than on a rounding artifact.
pub fn ceil_real(r: f64) -> i64 {
    let near = r.round();
    if (r - near).abs() < TOLERANCE {
        near as i64
    } else {
        r.ceil() as i64
    }
}

/// Where the bits come from.
#[derive(Debug, Clone, Copy)]
pub enum BitSource<'a> {
    /// An explicit distribution over {0,1}^n.
    Explicit(&'a Distribution),
    /// The uniform distribution on {0,1}^n, handled analytically.
    Uniform(usize),
}

impl BitSource<'_> {
    pub fn n(&self) -> usize {
        match self {
            BitSource::Explicit(d) => d.arity(),
            BitSource::Uniform(n) => *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySumWitness {
    pub n: usize,
    pub p: usize,
    pub i: usize,
    pub j: usize,
    pub ell: usize,
    pub d: usize,
    pub c: f64,
    /// H(X_{p+1..j} | X_{1..p}).
    pub hypothesis_entropy: f64,
    /// l + d - 1/c.
    pub hypothesis_required: f64,
    /// Prefixes with H(Z | Y = y) >= l + d - 2/c. None when the source is
    /// uniform, in which case every prefix qualifies.
    pub good_prefixes: Option<Vec<Tuple>>,
    pub good_prefix_count: BigUint,
    /// Pr[Y in A].
    pub good_prefix_mass: BigRational,
    /// True when A carried too little mass for a threshold and all prefixes
    /// were used in its place.
    pub prefix_fallback: bool,
    pub t: i64,
    /// Pr[Y in A and sum Y >= t].
    pub at_t: BigRational,
    /// Pr[Y in A and sum Y >= t + 1].
    pub at_next: BigRational,
    /// Pr[Y in A and sum Y <= t].
    pub at_or_below_t: BigRational,
    /// t + (l + d)/2 + c^(1/3) sqrt d.
    pub s: f64,
    /// t + l/2.
    pub s_prime: f64,
    /// Pr[sum_{k<=j} X_k >= s].
    pub p_upper: BigRational,
    /// Pr[sum_{k<=i} X_k < s'].
    pub p_lower: BigRational,
    /// Pr[sum_{k<=i} X_k <= s'].
    pub p_lower_nonstrict: BigRational,
    pub p_joint: BigRational,
    /// d/2 + c^(1/3) sqrt d.
    pub block_threshold: f64,
    /// Pr[sum_{k=i+1..j} X_k >= d/2 + c^(1/3) sqrt d].
    pub block_tail: BigRational,
    /// The same tail for d uniform bits.
    pub uniform_block_tail: BigRational,
    /// TV distance of X_{i+1..j} from uniform on {0,1}^d.
    pub block_tv: f64,
}

impl EntropySumWitness {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_entropy >= self.hypothesis_required - TOLERANCE
    }

    /// l >= c d.
    pub fn spacing_holds(&self) -> bool {
        self.ell as f64 >= self.c * self.d as f64
    }

    pub fn prefix_mass_holds(&self) -> bool {
        self.good_prefix_mass >= rat(1, 2)
    }

    /// t satisfies the defining inequality and t + 1 does not.
    pub fn threshold_maximal(&self) -> bool {
        let quarter = rat(1, 4);
        self.at_t >= quarter && self.at_next < quarter
    }

    pub fn below_t_holds(&self) -> bool {
        self.at_or_below_t >= rat(1, 4)
    }

    pub fn upper_holds(&self) -> bool {
        self.p_upper >= rat(1, 10)
    }

    pub fn lower_holds(&self) -> bool {
        self.p_lower >= rat(1, 10)
    }

    pub fn joint_holds(&self) -> bool {
        self.p_joint <= rat(1, 1000)
    }

    /// All three conclusions.
    pub fn holds(&self) -> bool {
        self.upper_holds() && self.lower_holds() && self.joint_holds()
    }

    /// The strict and non-strict lower events differ in probability.
    pub fn lower_forms_differ(&self) -> bool {
        self.p_lower != self.p_lower_nonstrict
    }

    /// P_joint <= block tail <= uniform tail + block TV.
    pub fn joint_chain_holds(&self) -> bool {
        let tail = self.uniform_block_tail.to_f64().unwrap_or(f64::NAN);
        self.p_joint <= self.block_tail
            && self.block_tail.to_f64().unwrap_or(f64::NAN) <= tail + self.block_tv + TOLERANCE
    }
}

fn check_indices(n: usize, p: usize, i: usize, j: usize, c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Parameter(format!("c must be positive and finite, got {c}")));
    }
    if !(p < i && i < j && j <= n) {
        return Err(Error::Parameter(format!(
            "need p < i < j <= n, got p = {p}, i = {i}, j = {j}, n = {n}"
        )));
    }
    Ok(())
}

fn require_bits(dist: &Distribution) -> Result<()> {
    if dist.value_bound() > 2 {
        return Err(Error::Domain("entropy-sum needs a distribution over 0/1 tuples".into()));
    }
    Ok(())
}

/// H(X_{p+1..j} | X_{1..p}).
pub fn block_entropy(dist: &Distribution, p: usize, j: usize) -> f64 {
    let target: Vec<usize> = (p..j).collect();
    let given: Vec<usize> = (0..p).collect();
    info::conditional_entropy(dist, &target, &given)
}

/// Positive-probability prefixes y in {0,1}^p with H(X_{p+1..j} | Y = y) >= (j - p) - 2/c,
/// together with Pr[Y in A].
fn prefixes_above(dist: &Distribution, p: usize, j: usize, c: f64) -> (Vec<Tuple>, BigRational) {
    let required = (j - p) as f64 - 2.0 / c;
    let target: Vec<usize> = (p..j).collect();
    let mut good = Vec::new();
    let mut mass = 0u64;
    let entries = dist.entries();
    let mut start = 0;
    // Entries are sorted, so each prefix occupies a contiguous run.
    while start < entries.len() {
        let prefix = &entries[start].0[..p];
        let end = start + entries[start..].iter().take_while(|(t, _)| &t[..p] == prefix).count();
        let group = Distribution::from_weights(
            dist.arity(),
            entries[start..end].iter().map(|(t, w)| (t.clone(), *w)),
        )
        .expect("group has positive weight");
        let h = info::entropy(&group.marginal(&target));
        if h >= required - TOLERANCE {
            good.push(prefix.to_vec());
            mass += group.total();
        }
        start = end;
    }
    (good, rat(mass, dist.total()))
}

/// The set A of prefixes conditioned on which X_{p+1..j} keeps entropy at
/// least l + d - 2/c. Fails with a hypothesis error when
/// H(X_{p+1..j} | X_{1..p}) < l + d - 1/c.
pub fn good_prefix_set(dist: &Distribution, p: usize, j: usize, c: f64) -> Result<Vec<Tuple>> {
    require_bits(dist)?;
    if p >= j || j > dist.arity() {
        return Err(Error::Parameter(format!("need p < j <= n, got p = {p}, j = {j}")));
    }
    let h = block_entropy(dist, p, j);
    let required = (j - p) as f64 - 1.0 / c;
    if h < required - TOLERANCE {
        return Err(Error::Hypothesis {
            what: "H(X_{p+1..j} | X_{1..p}) >= l + d - 1/c".into(),
            measured: h,
            required,
        });
    }
    Ok(prefixes_above(dist, p, j, c).0)
}

/// Pr[Y in A and sum Y >= t] for every t in 0..=p+1, where `mass_by_sum[s]`
/// is Pr[Y in A and sum Y = s].
fn upper_cumulative(mass_by_sum: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); mass_by_sum.len() + 1];
    for s in (0..mass_by_sum.len()).rev() {
        out[s] = &out[s + 1] + &mass_by_sum[s];
    }
    out
}

/// Largest t with Pr[Y in A and sum Y >= t] >= 1/4, given the masses by prefix sum.
fn threshold_from_masses(mass_by_sum: &[BigRational]) -> Result<i64> {
    let cumulative = upper_cumulative(mass_by_sum);
    let quarter = rat(1, 4);
    (0..cumulative.len())
        .rev()
        .find(|&t| cumulative[t] >= quarter)
        .map(|t| t as i64)
        .ok_or_else(|| Error::Domain("no integer t has Pr[Y in A and sum Y >= t] >= 1/4".into()))
}

fn masses_by_sum(dist: &Distribution, p: usize, good: &[Tuple]) -> Vec<BigRational> {
    let mut weights = vec![0u64; p + 1];
    for (t, w) in dist.entries() {
        if good.binary_search_by(|g| g.as_slice().cmp(&t[..p])).is_ok() {
            weights[prefix_sum(t, p)] += w;
        }
    }
    weights.into_iter().map(|w| rat(w, dist.total())).collect()
}

fn prefix_sum(t: &[u32], upto: usize) -> usize {
    t[..upto].iter().map(|&b| b as usize).sum()
}

/// The largest integer t with Pr[Y in A and sum_{k<=p} Y_k >= t] >= 1/4.
/// `good` must be sorted.
pub fn find_threshold(dist: &Distribution, good: &[Tuple], p: usize) -> Result<i64> {
    require_bits(dist)?;
    threshold_from_masses(&masses_by_sum(dist, p, good))
}

/// Lemma analysis with every precondition checked: index order, the entropy
/// hypothesis and d > 0. The spacing l >= c d is reported, not enforced.
pub fn entropy_sum_analysis(source: BitSource<'_>, p: usize, i: usize, j: usize, c: f64) -> Result<EntropySumWitness> {
    let w = entropy_sum_witness(source, p, i, j, c)?;
    if !w.hypothesis_holds() {
        return Err(Error::Hypothesis {
            what: "H(X_{p+1..j} | X_{1..p}) >= l + d - 1/c".into(),
            measured: w.hypothesis_entropy,
            required: w.hypothesis_required,
        });
    }
    if w.prefix_fallback {
        return Err(Error::Domain("no integer t has Pr[Y in A and sum Y >= t] >= 1/4".into()));
    }
    Ok(w)
}

/// Best-effort analysis: hypothesis failures are recorded in the witness,
/// and an A too light to define t is replaced by all prefixes.
pub fn entropy_sum_witness(source: BitSource<'_>, p: usize, i: usize, j: usize, c: f64) -> Result<EntropySumWitness> {
    check_indices(source.n(), p, i, j, c)?;
    let (ell, d) = (i - p, j - i);
    let block_threshold = d as f64 / 2.0 + c.cbrt() * (d as f64).sqrt();
    let hypothesis_required = (ell + d) as f64 - 1.0 / c;
    match source {
        BitSource::Uniform(n) => {
            let prefix_row = binomial_row(p);
            let masses: Vec<BigRational> = prefix_row
                .iter()
                .map(|k| BigRational::from_integer(k.clone().into()) * half_power(p))
                .collect();
            let t = threshold_from_masses(&masses)?;
            let s = t as f64 + (ell + d) as f64 / 2.0 + c.cbrt() * (d as f64).sqrt();
            let s_prime = t as f64 + ell as f64 / 2.0;
            let upper_k = ceil_real(s);
            let lower_k = ceil_real(s_prime);
            let p_upper = binomial_tail(j, upper_k);
            let p_lower = BigRational::one() - binomial_tail(i, lower_k);
            let p_lower_nonstrict = if (s_prime - lower_k as f64).abs() < TOLERANCE {
                BigRational::one() - binomial_tail(i, lower_k + 1)
            } else {
                p_lower.clone()
            };
            // Sum over a = sum_{k<=i} x_k < s' of Pr[a] * Pr[Bin(d) >= s - a].
            let row_i = binomial_row(i);
            let mut p_joint = BigRational::zero();
            for a in 0..(lower_k.max(0) as usize).min(i + 1) {
                let point = BigRational::from_integer(row_i[a].clone().into()) * half_power(i);
                p_joint += point * binomial_tail(d, upper_k - a as i64);
            }
            let uniform_block_tail = binomial_tail(d, ceil_real(block_threshold));
            let cumulative = upper_cumulative(&masses);
            let at_or_below: BigRational = masses[..=(t as usize).min(p)].iter().sum();
            Ok(EntropySumWitness {
                n,
                p,
                i,
                j,
                ell,
                d,
                c,
                hypothesis_entropy: (ell + d) as f64,
                hypothesis_required,
                good_prefixes: None,
                good_prefix_count: BigUint::one() << p,
                good_prefix_mass: BigRational::one(),
                prefix_fallback: false,
                t,
                at_t: cumulative[t as usize].clone(),
                at_next: cumulative.get(t as usize + 1).cloned().unwrap_or_default(),
                at_or_below_t: at_or_below,
                s,
                s_prime,
                p_upper,
                p_lower,
                p_lower_nonstrict,
                p_joint,
                block_threshold,
                block_tail: uniform_block_tail.clone(),
                uniform_block_tail,
                block_tv: 0.0,
            })
        }
        BitSource::Explicit(dist) => {
            require_bits(dist)?;
            let hypothesis_entropy = block_entropy(dist, p, j);
            let (mut good, mut mass) = prefixes_above(dist, p, j, c);
            let mut masses = masses_by_sum(dist, p, &good);
            let mut prefix_fallback = false;
            let t = match threshold_from_masses(&masses) {
                Ok(t) => t,
                Err(_) => {
                    prefix_fallback = true;
                    good = dist.marginal(&(0..p).collect::<Vec<_>>()).entries().iter().map(|(t, _)| t.clone()).collect();
                    mass = BigRational::one();
                    masses = masses_by_sum(dist, p, &good);
                    threshold_from_masses(&masses)?
                }
            };
            let s = t as f64 + (ell + d) as f64 / 2.0 + c.cbrt() * (d as f64).sqrt();
            let s_prime = t as f64 + ell as f64 / 2.0;
            let upper = |x: &[u32]| prefix_sum(x, j) as f64 >= s - TOLERANCE;
            let lower = |x: &[u32]| (prefix_sum(x, i) as f64) < s_prime - TOLERANCE;
            let lower_ns = |x: &[u32]| prefix_sum(x, i) as f64 <= s_prime + TOLERANCE;
            let block = |x: &[u32]| (prefix_sum(x, j) - prefix_sum(x, i)) as f64 >= block_threshold - TOLERANCE;
            let block_coords: Vec<usize> = (i..j).collect();
            let block_tv = info::tv_to_uniform(&dist.marginal(&block_coords), 1u128 << d)?;
            let cumulative = upper_cumulative(&masses);
            Ok(EntropySumWitness {
                n: dist.arity(),
                p,
                i,
                j,
                ell,
                d,
                c,
                hypothesis_entropy,
                hypothesis_required,
                good_prefix_count: BigUint::from(good.len()),
                good_prefixes: Some(good),
                good_prefix_mass: mass,
                prefix_fallback,
                t,
                at_t: cumulative[t as usize].clone(),
                at_next: cumulative.get(t as usize + 1).cloned().unwrap_or_default(),
                at_or_below_t: masses[..=(t as usize).min(p)].iter().sum(),
                s,
                s_prime,
                p_upper: dist.event_prob(upper),
                p_lower: dist.event_prob(lower),
                p_lower_nonstrict: dist.event_prob(lower_ns),
                p_joint: dist.event_prob(|x| upper(x) && lower(x)),
                block_threshold,
                block_tail: dist.event_prob(block),
                uniform_block_tail: binomial_tail(d, ceil_real(block_threshold)),
                block_tv,
            })
        }
    }
}

/// Renders a rational as `a/b` followed by its decimal value.
pub fn show_ratio(r: &BigRational) -> String {
    let value = r.to_f64().unwrap_or(f64::NAN);
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{} ({value:.6})", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::all_bitstrings;

    #[test]
    fn binomial_tail_examples() {
        assert_eq!(binomial_tail(4, 0), BigRational::one());
        assert_eq!(binomial_tail(4, 2), rat(11, 16));
        assert_eq!(binomial_tail(2, 3), BigRational::zero());
        assert_eq!(binomial_tail(0, 0), BigRational::one());
        assert_eq!(binomial_tail(3, -2), BigRational::one());
    }

    #[test]
    fn ceil_snaps_near_integers() {
        assert_eq!(ceil_real(64f64.cbrt() * 2.0), 8);
        assert_eq!(ceil_real(2.5), 3);
        assert_eq!(ceil_real(-0.5), 0);
    }

    #[test]
    fn threshold_uniform_p4() {
        let x = Distribution::uniform_cube(6, 2).unwrap();
        let good: Vec<Tuple> = all_bitstrings(4).map(|b| info::bits_tuple(&b)).collect();
        assert_eq!(find_threshold(&x, &good, 4).unwrap(), 3);
    }

    #[test]
    fn threshold_empty_prefix() {
        let x = Distribution::uniform_cube(3, 2).unwrap();
        assert_eq!(find_threshold(&x, &[vec![]], 0).unwrap(), 0);
        assert!(find_threshold(&x, &[], 0).is_err());
    }

    #[test]
    fn good_prefixes_uniform() {
        let x = Distribution::uniform_cube(5, 2).unwrap();
        assert_eq!(good_prefix_set(&x, 2, 5, 10.0).unwrap().len(), 4);
    }

    #[test]
    fn good_prefixes_first_bit_fixed() {
        let xs: Vec<_> = all_bitstrings(4).filter(|x| x.get(1) == 0).collect();
        let x = Distribution::uniform_bits(4, &xs).unwrap();
        assert_eq!(good_prefix_set(&x, 1, 4, 100.0).unwrap(), vec![vec![0]]);
        assert!(matches!(good_prefix_set(&x, 0, 4, 100.0), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn uniform_261() {
        let w = entropy_sum_analysis(BitSource::Uniform(261), 1, 257, 261, 64.0).unwrap();
        assert_eq!((w.ell, w.d), (256, 4));
        assert!(w.spacing_holds());
        // Pr[Y_1 >= 1] = 1/2 >= 1/4 and Pr[Y_1 >= 2] = 0.
        assert_eq!(w.t, 1);
        assert!(w.threshold_maximal());
        assert_eq!(w.block_threshold, 10.0);
        assert_eq!(w.uniform_block_tail, BigRational::zero());
        assert_eq!(w.p_joint, BigRational::zero());
        assert!(w.holds(), "{w:?}");
    }

    #[test]
    fn explicit_matches_uniform() {
        let x = Distribution::uniform_cube(10, 2).unwrap();
        let a = entropy_sum_witness(BitSource::Explicit(&x), 2, 8, 10, 3.0).unwrap();
        let b = entropy_sum_witness(BitSource::Uniform(10), 2, 8, 10, 3.0).unwrap();
        assert_eq!(a.t, b.t);
        assert_eq!(a.p_upper, b.p_upper);
        assert_eq!(a.p_lower, b.p_lower);
        assert_eq!(a.p_lower_nonstrict, b.p_lower_nonstrict);
        assert_eq!(a.p_joint, b.p_joint);
        assert_eq!(a.block_tail, b.block_tail);
        assert_eq!(a.at_or_below_t, b.at_or_below_t);
    }

    #[test]
    fn rejects_degenerate_indices() {
        assert!(entropy_sum_analysis(BitSource::Uniform(10), 1, 5, 5, 2.0).is_err());
        assert!(entropy_sum_analysis(BitSource::Uniform(10), 5, 5, 7, 2.0).is_err());
        assert!(entropy_sum_analysis(BitSource::Uniform(10), 1, 5, 11, 2.0).is_err());
    }

    #[test]
    fn central_estimate_small() {
        assert!((4..=64).all(central_estimate_holds));
        assert_eq!(binomial_point(4, 2), rat(3, 8));
    }
}
