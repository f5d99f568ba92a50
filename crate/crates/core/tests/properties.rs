use std::collections::{BTreeMap, HashSet};

use cellprobe::bits::all_bitstrings;
use cellprobe::brackets::{catalan_count, enumerate_bal, is_balanced, match_all, unmatched_open_prob, walk_reduction};
use cellprobe::entropy_sum::{binomial_tail, entropy_sum_witness, BitSource};
use cellprobe::format::{parse_distribution, parse_scheme, write_distribution, write_scheme};
use cellprobe::info::{
    conditional_entropy, entropy, good_blocks, good_cells, subset_tv, tv_distance, BlockStructure, Distribution,
};
use cellprobe::pipeline::{contradiction_chain, run_prefix_pipeline};
use cellprobe::reference::{build_bracket_table, build_precomputed_sums, build_raw_identity, build_two_level_rank};
use cellprobe::scheme::{most_likely_cell_values, restrict_scheme, Scheme};
use cellprobe::separator::find_separator;
use cellprobe::stretcher::find_stretcher;
use cellprobe::BitVector;
use num_bigint::BigUint;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn family_strategy() -> impl Strategy<Value = (Vec<Vec<usize>>, usize)> {
    (1usize..=3, 8usize..=48).prop_flat_map(|(q, n)| {
        let set = proptest::collection::btree_set(0usize..2 * n, 0..=q)
            .prop_map(|s| s.into_iter().collect::<Vec<_>>());
        (proptest::collection::vec(set, n), Just(q))
    })
}

fn weights_strategy(bits: usize) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(0u64..8, 1 << bits).prop_filter("nonempty support", |w| w.iter().any(|&x| x > 0))
}

fn dist_from(bits: usize, weights: &[u64]) -> Distribution {
    let entries = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .map(|(k, &w)| ((0..bits).map(|b| ((k >> (bits - 1 - b)) & 1) as u32).collect(), w));
    Distribution::from_weights(bits, entries).unwrap()
}

/// Entropy straight from the definition, summing over explicit groups.
fn entropy_oracle(dist: &Distribution, coords: &[usize]) -> f64 {
    let mut groups: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for (t, w) in dist.entries() {
        *groups.entry(coords.iter().map(|&c| t[c]).collect()).or_default() += w;
    }
    let total = dist.total() as f64;
    groups
        .values()
        .map(|&w| {
            let p = w as f64 / total;
            -p * p.log2()
        })
        .sum()
}

fn reference_schemes(n: usize) -> Vec<Scheme> {
    let mut out = vec![
        build_precomputed_sums(n, n as u64 + 1).unwrap(),
        build_raw_identity(n, if n % 2 == 0 { 4 } else { 2 }).unwrap(),
    ];
    if n % 4 == 0 {
        out.push(build_two_level_rank(n, 2, 4, n as u64 + 1).unwrap());
    }
    if n % 2 == 0 {
        out.push(build_bracket_table(n, n as u64 + 1).unwrap());
    }
    out
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn bitvector_text_roundtrip(bits in proptest::collection::vec(0u8..2, 0..40)) {
        let x = BitVector::new(bits.clone()).unwrap();
        let back: BitVector = x.to_string().parse().unwrap();
        prop_assert_eq!(back.bits(), &bits[..]);
        let sum: usize = bits.iter().map(|&b| b as usize).sum();
        prop_assert_eq!(x.prefix_sum(bits.len()), sum);
    }

    #[test]
    fn match_is_an_involution(x in (1usize..=8).prop_flat_map(|h| proptest::sample::select(enumerate_bal(2 * h).unwrap()))) {
        let partners = match_all(x.bits());
        for (k, p) in partners.iter().enumerate() {
            let p = p.expect("balanced strings have every bracket matched");
            prop_assert_eq!(partners[p - 1], Some(k + 1));
            prop_assert_ne!(x.bits()[k], x.bits()[p - 1]);
            let (lo, hi) = (k.min(p - 1), k.max(p - 1));
            let inner = BitVector::new(x.bits()[lo + 1..hi].to_vec()).unwrap();
            prop_assert!(is_balanced(&inner));
        }
    }

    #[test]
    fn separator_guarantees((family, q) in family_strategy(), g in 2.0f64..8.0) {
        let r = find_separator(&family, q, g).unwrap();
        let n = family.len() as f64;
        prop_assert!(r.w as f64 >= n / (g * q as f64).powi(q as i32) - 1e-9);
        prop_assert!(r.blocker.len() as f64 <= r.w as f64 / g + 1e-9);
        let blocker: HashSet<usize> = r.blocker.iter().copied().collect();
        let mut seen = HashSet::new();
        for &v in &r.disjoint {
            for e in &family[v - 1] {
                if !blocker.contains(e) {
                    prop_assert!(seen.insert(*e));
                }
            }
        }
    }

    #[test]
    fn stretcher_gaps(set in proptest::collection::btree_set(1usize..=4096, 2..300), c in prop_oneof![Just(2.0f64), Just(4.0)]) {
        let idx: Vec<usize> = set.into_iter().collect();
        if let Ok(r) = find_stretcher(&idx, 4096, c) {
            prop_assert!(r.v_prime.len() % 2 == 0);
            let mut prev = 0usize;
            for pair in r.v_prime.chunks(2) {
                prop_assert!((pair[0] - prev) as f64 >= c * (pair[1] - pair[0]) as f64);
                prev = pair[1];
            }
            let picked: HashSet<_> = r.v_prime.iter().collect();
            prop_assert!(picked.iter().all(|v| idx.contains(v)));
        }
    }

    #[test]
    fn chain_rule_and_conditioning(weights in weights_strategy(6), split in 1usize..5) {
        let d = dist_from(6, &weights);
        let x: Vec<usize> = (0..split).collect();
        let y: Vec<usize> = (split..6).collect();
        let all: Vec<usize> = (0..6).collect();
        let joint = entropy(&d);
        prop_assert!((joint - entropy_oracle(&d, &all)).abs() < 1e-9);
        let h_x = conditional_entropy(&d, &x, &[]);
        let h_y_given_x = conditional_entropy(&d, &y, &x);
        prop_assert!((joint - h_x - h_y_given_x).abs() < 1e-9);
        prop_assert!(h_y_given_x <= conditional_entropy(&d, &y, &[]) + 1e-9);
        let z = vec![5];
        let y2: Vec<usize> = (split..5).collect();
        if !y2.is_empty() {
            prop_assert!(conditional_entropy(&d, &x, &y2) + 1e-9 >= conditional_entropy(&d, &x, &[y2.clone(), z].concat()));
        }
    }

    #[test]
    fn tv_is_a_metric(a in weights_strategy(3), b in weights_strategy(3), c in weights_strategy(3)) {
        let (da, db, dc) = (dist_from(3, &a), dist_from(3, &b), dist_from(3, &c));
        let ab = tv_distance(&da, &db).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - tv_distance(&db, &da).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= tv_distance(&da, &dc).unwrap() + tv_distance(&dc, &db).unwrap() + 1e-12);
        prop_assert_eq!(tv_distance(&da, &da).unwrap(), 0.0);
    }

    #[test]
    fn good_blocks_invariants(members in proptest::collection::btree_set(0u64..256, 1..256), cut in 1usize..8, eps in 0.05f64..1.0) {
        let xs: Vec<BitVector> = members.iter().map(|&v| BitVector::from_index(v, 8)).collect();
        let dist = Distribution::uniform_bits(8, &xs).unwrap();
        let blocks = BlockStructure::new(vec![cut, 8 - cut]).unwrap();
        let r = good_blocks(&dist, &blocks, eps).unwrap();
        let a = 8.0 - (xs.len() as f64).log2();
        prop_assert!((r.deficiency_sum() - a).abs() < 1e-9);
        prop_assert!(r.good.len() as f64 >= 2.0 - a / eps - 1e-9);
        for &i in &r.good {
            prop_assert!(r.scores[i - 1] <= eps + 1e-9);
            prop_assert!(r.marginal_tv[i - 1] <= 4.0 * eps.sqrt() + 1e-9);
        }
    }

    #[test]
    fn good_cells_subsets_are_close(weights in proptest::collection::vec(0u64..3, 16), eta in 0.05f64..0.5) {
        prop_assume!(weights.iter().any(|&w| w > 0));
        let support: Vec<Vec<u32>> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(k, _)| (0..4).map(|b| ((k >> (3 - b)) & 1) as u32).collect())
            .collect();
        let y = Distribution::uniform(4, support).unwrap();
        let r = good_cells(&y, 2, 2, eta).unwrap();
        for (pos, &a) in r.good.iter().enumerate() {
            for &b in &r.good[pos + 1..] {
                prop_assert!(subset_tv(&y, &[a, b], 2).unwrap() <= eta + 1e-9);
            }
        }
    }

    #[test]
    fn binomial_tail_is_a_sum(m in 0usize..60, k in -2i64..64) {
        let tail = binomial_tail(m, k);
        let mut count = BigUint::from(0u32);
        let mut row = BigUint::from(1u32);
        for j in 0..=m {
            if j as i64 >= k {
                count += &row;
            }
            row = row * BigUint::from(m - j) / BigUint::from(j + 1);
        }
        let expected = num_rational::BigRational::new(count.into(), (BigUint::from(1u32) << m).into());
        prop_assert_eq!(tail, expected);
    }

    #[test]
    fn distribution_file_roundtrip(weights in weights_strategy(4)) {
        let d = dist_from(4, &weights);
        let back = parse_distribution(&write_distribution(&d)).unwrap();
        prop_assert_eq!(back, d);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn restriction_is_sound(n in 2usize..=8, pick in proptest::collection::vec(any::<proptest::sample::Index>(), 0..3)) {
        for scheme in reference_schemes(n) {
            let mut b: Vec<usize> = pick.iter().map(|i| i.index(scheme.u())).collect();
            b.sort_unstable();
            b.dedup();
            let fixing = most_likely_cell_values(&scheme, &b).unwrap();
            let lhs = BigUint::from(fixing.surviving.len()) * BigUint::from(scheme.cell_alphabet()).pow(b.len() as u32);
            prop_assert!(lhs >= scheme.domain_size());
            let restricted = restrict_scheme(&scheme, fixing).unwrap();
            for x in restricted.surviving() {
                let cells = scheme.encode(x).unwrap();
                for (&cell, &value) in b.iter().zip(&restricted.fixing().fixed_values) {
                    prop_assert_eq!(cells.cells()[cell], value);
                }
                for i in 1..=n {
                    prop_assert_eq!(restricted.answer_query(x, i).unwrap(), scheme.answer_query(x, i).unwrap());
                }
            }
        }
    }

    #[test]
    fn scheme_file_roundtrip(n in 2usize..=8, table in any::<bool>()) {
        for scheme in reference_schemes(n) {
            let scheme = if table { scheme.to_table().unwrap() } else { scheme };
            let text = write_scheme(&scheme);
            let back = parse_scheme(&text).unwrap();
            prop_assert_eq!(write_scheme(&back), text);
            prop_assert_eq!(&back, &scheme);
        }
    }

    #[test]
    fn witness_threshold_is_maximal(weights in proptest::collection::vec(4u64..6, 1 << 7)) {
        let d = dist_from(7, &weights);
        let w = entropy_sum_witness(BitSource::Explicit(&d), 3, 5, 6, 2.0).unwrap();
        let quarter = num_rational::BigRational::new(1.into(), 4.into());
        prop_assert!(w.at_t >= quarter);
        prop_assert!(w.at_next < quarter);
        prop_assert!(w.at_or_below_t >= quarter);
        prop_assert_eq!(w.s_prime, w.t as f64 + w.ell as f64 / 2.0);
    }
}

#[test]
fn catalan_matches_closed_form() {
    for half in 0..=9usize {
        let n = 2 * half;
        let brute = all_bitstrings(n).filter(is_balanced).count();
        assert_eq!(catalan_count(n).unwrap(), BigUint::from(brute));
    }
}

#[test]
fn walk_reduction_matches_enumeration() {
    for d in 1..=14 {
        assert_eq!(walk_reduction(d).unwrap(), unmatched_open_prob(d).unwrap());
    }
}

#[test]
fn contradiction_bound_never_positive_below_closeness() {
    for k in 0..50 {
        let p = k as f64 / 1000.0;
        let e = contradiction_chain(0.0, p, 0.3, 0.05);
        assert!(e.bound <= 0.0);
        assert!(!e.contradiction);
    }
}

#[test]
fn pipeline_blocks_tile_the_input() {
    for scheme in [
        build_precomputed_sums(12, 13).unwrap(),
        build_two_level_rank(12, 2, 4, 13).unwrap(),
        build_raw_identity(12, 16).unwrap(),
    ] {
        let r = run_prefix_pipeline(&scheme, 2.0, None).unwrap();
        let Some(stage) = r.stage("entropy_blocks") else {
            assert!(r.truncated.is_some());
            continue;
        };
        let sizes: usize = stage
            .value("block sizes")
            .unwrap()
            .trim_matches(|c| c == '{' || c == '}')
            .split(", ")
            .map(|s| s.parse::<usize>().unwrap())
            .sum();
        assert_eq!(sizes, 12);
        let v: Vec<usize> = parse_set(r.stage("separator").unwrap().value("V").unwrap());
        let v2: Vec<usize> = parse_set(r.stage("good_cells").unwrap().value("V_2").unwrap());
        assert!(v2.iter().all(|i| v.contains(i)));
        if !v2.is_empty() {
            assert_eq!(r.stage("good_cells").unwrap().check_named("every pair in V_2 eta-close"), Some(true));
        }
    }
}

fn parse_set(s: &str) -> Vec<usize> {
    let inner = s.trim_matches(|c| c == '{' || c == '}');
    if inner.is_empty() {
        return Vec::new();
    }
    inner.split(", ").map(|t| t.parse().unwrap()).collect()
}
