//! Non-adaptive cell-probe schemes: an encoder `Enc: domain -> [m]^u`, one
//! fixed probe set `Q(i)` per query and a decoder `d_i` reading only the cells
//! in `Q(i)`.
//!
//! Queries are 1-indexed (`i` in `1..=n`); cells are 0-indexed. Decoders see
//! probe values in ascending cell order.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::{all_bitstrings, BitVector};
use crate::brackets::{catalan_count, enumerate_bal, is_balanced, match_index};
use crate::error::{Error, Result};
use crate::reference::Builtin;

pub type CellValue = u32;

/// Largest domain enumerated exhaustively.
pub const MAX_ENUMERATION: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    AllBitstrings,
    BalancedBrackets,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::AllBitstrings => "all_bitstrings",
            Domain::BalancedBrackets => "balanced_brackets",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "all_bitstrings" => Some(Domain::AllBitstrings),
            "balanced_brackets" => Some(Domain::BalancedBrackets),
            _ => None,
        }
    }

    pub fn contains(self, x: &BitVector, n: usize) -> bool {
        x.len() == n && (self == Domain::AllBitstrings || is_balanced(x))
    }

    pub fn size(self, n: usize) -> BigUint {
        match self {
            Domain::AllBitstrings => BigUint::one() << n,
            Domain::BalancedBrackets => catalan_count(n).unwrap_or_default(),
        }
    }

    /// Every domain element in lexicographic order.
    pub fn elements(self, n: usize) -> Result<Vec<BitVector>> {
        let size = self.size(n);
        if size > BigUint::from(MAX_ENUMERATION) {
            return Err(Error::Size {
                what: format!("{} domain at n = {n}", self.name()),
                count: size.to_u128().unwrap_or(u128::MAX),
                limit: MAX_ENUMERATION as u128,
            });
        }
        match self {
            Domain::AllBitstrings => Ok(all_bitstrings(n).collect()),
            Domain::BalancedBrackets => enumerate_bal(n),
        }
    }

    /// Ground truth for the query this domain supports: Sum(i) or Match(i).
    pub fn oracle(self, x: &BitVector, i: usize) -> i64 {
        match self {
            Domain::AllBitstrings => x.prefix_sum(i) as i64,
            Domain::BalancedBrackets => match_index(x, i).map(|j| j as i64).unwrap_or(-1),
        }
    }
}

/// Cell contents of one encoding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellArray {
    cells: Vec<CellValue>,
    cell_alphabet: u64,
}

impl CellArray {
    pub fn new(cells: Vec<CellValue>, cell_alphabet: u64) -> Result<Self> {
        if let Some(bad) = cells.iter().find(|&&v| v as u64 >= cell_alphabet) {
            return Err(Error::Domain(format!(
                "cell value {bad} outside alphabet [0, {cell_alphabet})"
            )));
        }
        Ok(CellArray {
            cells,
            cell_alphabet,
        })
    }

    pub fn cells(&self) -> &[CellValue] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_alphabet(&self) -> u64 {
        self.cell_alphabet
    }

    pub fn restrict(&self, probes: &[usize]) -> Vec<CellValue> {
        probes.iter().map(|&c| self.cells[c]).collect()
    }

    pub fn into_cells(self) -> Vec<CellValue> {
        self.cells
    }
}

/// Q(1..n), stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeFamily {
    sets: Vec<Vec<usize>>,
    q: usize,
}

impl ProbeFamily {
    pub fn new(sets: Vec<Vec<usize>>, u: usize) -> Result<Self> {
        let sets: Vec<Vec<usize>> = sets
            .into_iter()
            .map(|s| s.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        for (i, set) in sets.iter().enumerate() {
            if let Some(&bad) = set.iter().find(|&&c| c >= u) {
                return Err(Error::Parameter(format!(
                    "Q({}) probes cell {bad}, but u = {u}",
                    i + 1
                )));
            }
        }
        let q = sets.iter().map(Vec::len).max().unwrap_or(0);
        Ok(ProbeFamily { sets, q })
    }

    pub fn with_bound(sets: Vec<Vec<usize>>, u: usize, q: usize) -> Result<Self> {
        let mut family = Self::new(sets, u)?;
        if family.q > q {
            return Err(Error::Parameter(format!(
                "a probe set has {} cells, above the bound q = {q}",
                family.q
            )));
        }
        family.q = q;
        Ok(family)
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Q(i) for 1-indexed i.
    pub fn get(&self, i: usize) -> &[usize] {
        &self.sets[i - 1]
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Encoder {
    Table(BTreeMap<BitVector, Vec<CellValue>>),
    Builtin(Builtin),
}

/// Table decoders map the probe-value tuple to the answer. Tuples absent
/// from a table decode to 0, which keeps every decoder total.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoders {
    Table(Vec<BTreeMap<Vec<CellValue>, i64>>),
    Builtin(Builtin),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    n: usize,
    u: usize,
    cell_alphabet: u64,
    domain: Domain,
    encoder: Encoder,
    probes: ProbeFamily,
    decoders: Decoders,
}

impl Scheme {
    pub fn new(
        n: usize,
        u: usize,
        cell_alphabet: u64,
        domain: Domain,
        encoder: Encoder,
        probes: ProbeFamily,
        decoders: Decoders,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        if cell_alphabet < 2 || cell_alphabet > 1 << 32 {
            return Err(Error::Parameter(format!(
                "cell alphabet {cell_alphabet} outside 2..=2^32"
            )));
        }
        if domain == Domain::BalancedBrackets && n % 2 == 1 {
            return Err(Error::Parameter(format!("bracket domain needs even n, got {n}")));
        }
        if probes.len() != n {
            return Err(Error::Parameter(format!(
                "{} probe sets for n = {n} queries",
                probes.len()
            )));
        }
        if let Some(set) = probes.sets().iter().flatten().find(|&&c| c >= u) {
            return Err(Error::Parameter(format!("probe cell {set} outside [0, {u})")));
        }
        if let Encoder::Table(table) = &encoder {
            for (x, cells) in table {
                if !domain.contains(x, n) {
                    return Err(Error::Domain(format!("encoder table entry {x} outside domain")));
                }
                if cells.len() != u {
                    return Err(Error::Parameter(format!(
                        "encoding of {x} has {} cells, expected {u}",
                        cells.len()
                    )));
                }
                CellArray::new(cells.clone(), cell_alphabet)?;
            }
            let expected = domain.size(n);
            if BigUint::from(table.len()) != expected {
                return Err(Error::Domain(format!(
                    "encoder table has {} entries, domain has {expected}",
                    table.len()
                )));
            }
        }
        if let Decoders::Table(tables) = &decoders {
            if tables.len() != n {
                return Err(Error::Parameter(format!(
                    "{} decoder tables for n = {n} queries",
                    tables.len()
                )));
            }
            for (i, table) in tables.iter().enumerate() {
                let width = probes.sets()[i].len();
                if let Some(key) = table.keys().find(|k| k.len() != width) {
                    return Err(Error::Parameter(format!(
                        "decoder d_{} has a {}-tuple key, Q({}) has {width} cells",
                        i + 1,
                        key.len(),
                        i + 1
                    )));
                }
            }
        }
        Ok(Scheme {
            n,
            u,
            cell_alphabet,
            domain,
            encoder,
            probes,
            decoders,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn q(&self) -> usize {
        self.probes.q()
    }

    pub fn cell_alphabet(&self) -> u64 {
        self.cell_alphabet
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn decoders(&self) -> &Decoders {
        &self.decoders
    }

    pub fn probes(&self) -> &ProbeFamily {
        &self.probes
    }

    pub fn in_domain(&self, x: &BitVector) -> bool {
        self.domain.contains(x, self.n)
    }

    pub fn domain_size(&self) -> BigUint {
        self.domain.size(self.n)
    }

    pub fn domain_elements(&self) -> Result<Vec<BitVector>> {
        self.domain.elements(self.n)
    }

    pub fn encode(&self, x: &BitVector) -> Result<CellArray> {
        if !self.in_domain(x) {
            return Err(Error::Domain(format!(
                "{x} is not in the {} domain of length {}",
                self.domain.name(),
                self.n
            )));
        }
        let cells = match &self.encoder {
            Encoder::Table(table) => table[x].clone(),
            Encoder::Builtin(b) => b.encode(x, self.cell_alphabet),
        };
        CellArray::new(cells, self.cell_alphabet)
    }

    /// d_i on a probe-value tuple listed in Q(i) order.
    pub fn decode(&self, i: usize, values: &[CellValue]) -> i64 {
        match &self.decoders {
            Decoders::Table(tables) => tables[i - 1].get(values).copied().unwrap_or(0),
            Decoders::Builtin(b) => b.decode(i, values, self.cell_alphabet),
        }
    }

    pub fn answer_query(&self, x: &BitVector, i: usize) -> Result<i64> {
        if i == 0 || i > self.n {
            return Err(Error::Range { index: i, n: self.n });
        }
        let enc = self.encode(x)?;
        Ok(self.decode(i, &enc.restrict(self.probes.get(i))))
    }

    /// u * lg(cell_alphabet) - lg |domain|, in bits.
    pub fn redundancy(&self) -> Result<f64> {
        let size = self.domain_size();
        if size == BigUint::ZERO {
            return Err(Error::Domain("empty domain".into()));
        }
        Ok(self.u as f64 * (self.cell_alphabet as f64).log2() - lg_big(&size))
    }

    /// Materializes encoder and decoders as explicit tables.
    pub fn to_table(&self) -> Result<Scheme> {
        let elements = self.domain_elements()?;
        let mut encoder = BTreeMap::new();
        let mut decoders = vec![BTreeMap::new(); self.n];
        for x in elements {
            let enc = self.encode(&x)?;
            for (i, table) in decoders.iter_mut().enumerate() {
                let key = enc.restrict(self.probes.get(i + 1));
                let value = self.decode(i + 1, &key);
                table.insert(key, value);
            }
            encoder.insert(x, enc.into_cells());
        }
        Scheme::new(
            self.n,
            self.u,
            self.cell_alphabet,
            self.domain,
            Encoder::Table(encoder),
            self.probes.clone(),
            Decoders::Table(decoders),
        )
    }

    /// Renames cell `c` to `perm[c]`, keeping every answer unchanged.
    pub fn relabel_cells(&self, perm: &[usize]) -> Result<Scheme> {
        let mut seen = vec![false; self.u];
        if perm.len() != self.u || perm.iter().any(|&p| p >= self.u || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Parameter("relabeling is not a permutation of the cells".into()));
        }
        let table = self.to_table()?;
        let Encoder::Table(enc) = table.encoder else {
            unreachable!()
        };
        let Decoders::Table(dec) = table.decoders else {
            unreachable!()
        };
        let encoder = enc
            .into_iter()
            .map(|(x, cells)| {
                let mut moved = vec![0; self.u];
                for (c, v) in cells.into_iter().enumerate() {
                    moved[perm[c]] = v;
                }
                (x, moved)
            })
            .collect();
        let sets: Vec<Vec<usize>> = self
            .probes
            .sets()
            .iter()
            .map(|s| s.iter().map(|&c| perm[c]).collect())
            .collect();
        let decoders = dec
            .into_iter()
            .zip(self.probes.sets())
            .map(|(table, old)| {
                // Old tuple order follows ascending old cells; new order follows ascending new cells.
                let mut order: Vec<usize> = (0..old.len()).collect();
                order.sort_by_key(|&k| perm[old[k]]);
                table
                    .into_iter()
                    .map(|(key, v)| (order.iter().map(|&k| key[k]).collect(), v))
                    .collect()
            })
            .collect();
        Scheme::new(
            self.n,
            self.u,
            self.cell_alphabet,
            self.domain,
            Encoder::Table(encoder),
            ProbeFamily::with_bound(sets, self.u, self.q())?,
            Decoders::Table(decoders),
        )
    }
}

pub(crate) fn lg_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
    }
}

/// Which inputs [`verify_scheme`] checks.
#[derive(Debug, Clone)]
pub enum Coverage {
    Exhaustive,
    /// `count` distinct domain elements drawn with a fixed seed.
    Sample { count: usize, seed: u64 },
    Inputs(Vec<BitVector>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub x: BitVector,
    pub i: usize,
    pub expected: i64,
    pub got: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub checked: usize,
    pub counterexample: Option<Counterexample>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn render(&self) -> String {
        let status = if self.passed() { "pass" } else { "fail" };
        let cex = match &self.counterexample {
            None => "none".to_string(),
            Some(c) => format!("x={} i={} expected={} got={}", c.x, c.i, c.expected, c.got),
        };
        format!("status: {status}\nchecked: {}\ncounterexample: {cex}\n", self.checked)
    }
}

/// Checks the scheme against the domain's own ground truth (Sum or Match).
pub fn verify_scheme(scheme: &Scheme, coverage: Coverage) -> Result<VerificationReport> {
    let domain = scheme.domain();
    verify_scheme_with(scheme, coverage, |x, i| domain.oracle(x, i))
}

/// Checks every (x, i) in coverage against `oracle`; inputs are visited in
/// lexicographic order, so the reported counterexample is the first one.
pub fn verify_scheme_with(
    scheme: &Scheme,
    coverage: Coverage,
    oracle: impl Fn(&BitVector, usize) -> i64,
) -> Result<VerificationReport> {
    let mut inputs = match coverage {
        Coverage::Exhaustive => scheme.domain_elements()?,
        Coverage::Sample { count, seed } => sample_domain(scheme, count, seed)?,
        Coverage::Inputs(xs) => xs,
    };
    inputs.sort();
    inputs.dedup();
    for (checked, x) in inputs.iter().enumerate() {
        let enc = scheme.encode(x)?;
        for i in 1..=scheme.n() {
            let got = scheme.decode(i, &enc.restrict(scheme.probes().get(i)));
            let expected = oracle(x, i);
            if got != expected {
                return Ok(VerificationReport {
                    checked: checked + 1,
                    counterexample: Some(Counterexample {
                        x: x.clone(),
                        i,
                        expected,
                        got,
                    }),
                });
            }
        }
    }
    Ok(VerificationReport {
        checked: inputs.len(),
        counterexample: None,
    })
}

fn sample_domain(scheme: &Scheme, count: usize, seed: u64) -> Result<Vec<BitVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scheme.domain() {
        Domain::AllBitstrings if scheme.n() <= 63 => {
            let total = 1u64 << scheme.n();
            let picks = count.min(total as usize);
            let mut out = BTreeSet::new();
            while out.len() < picks {
                out.insert(BitVector::from_index(rand::Rng::gen_range(&mut rng, 0..total), scheme.n()));
            }
            Ok(out.into_iter().collect())
        }
        _ => {
            let all = scheme.domain_elements()?;
            let picks = count.min(all.len());
            Ok(sample(&mut rng, all.len(), picks)
                .into_iter()
                .map(|k| all[k].clone())
                .collect())
        }
    }
}

/// A fixing of the cells in B to values z, and the inputs X consistent with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellFixing {
    pub fixed_cells: Vec<usize>,
    pub fixed_values: Vec<CellValue>,
    pub surviving: Vec<BitVector>,
}

impl CellFixing {
    /// |X| * m^|B| >= |domain|, checked in exact integers.
    pub fn pigeonhole_holds(&self, scheme: &Scheme) -> bool {
        let lhs = BigUint::from(self.surviving.len())
            * BigUint::from(scheme.cell_alphabet()).pow(self.fixed_cells.len() as u32);
        lhs >= scheme.domain_size()
    }

    /// Input-space deficiency lg|domain| - lg|X| (n - lg|X| for all bit strings).
    pub fn deficiency(&self, scheme: &Scheme) -> f64 {
        lg_big(&scheme.domain_size()) - (self.surviving.len() as f64).log2()
    }
}

fn normalize_cells(scheme: &Scheme, b: &[usize]) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = b.iter().copied().collect();
    if let Some(&bad) = set.iter().find(|&&c| c >= scheme.u()) {
        return Err(Error::Parameter(format!("cell {bad} outside [0, {})", scheme.u())));
    }
    Ok(set.into_iter().collect())
}

/// The most frequent assignment z to the cells in B over the domain, ties to
/// the lexicographically smallest z, together with its preimage X.
pub fn most_likely_cell_values(scheme: &Scheme, b: &[usize]) -> Result<CellFixing> {
    let fixed_cells = normalize_cells(scheme, b)?;
    let mut groups: BTreeMap<Vec<CellValue>, Vec<BitVector>> = BTreeMap::new();
    for x in scheme.domain_elements()? {
        let z = scheme.encode(&x)?.restrict(&fixed_cells);
        groups.entry(z).or_default().push(x);
    }
    let mut best: Option<(Vec<CellValue>, Vec<BitVector>)> = None;
    for (z, xs) in groups {
        if best.as_ref().is_none_or(|(_, b)| xs.len() > b.len()) {
            best = Some((z, xs));
        }
    }
    let (fixed_values, surviving) = best.ok_or_else(|| Error::Domain("empty domain".into()))?;
    Ok(CellFixing {
        fixed_cells,
        fixed_values,
        surviving,
    })
}

/// The scheme after hardwiring cells B to z: Q'(i) = Q(i) \ B over the
/// renamed cell set [u'], with d'_i reading only Q'(i).
#[derive(Debug, Clone)]
pub struct RestrictedScheme<'a> {
    base: &'a Scheme,
    fixing: CellFixing,
    kept_cells: Vec<usize>,
    reduced_probes: ProbeFamily,
    /// For each query, the Q(i) slots and where each value comes from.
    slots: Vec<Vec<Slot>>,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Fixed(CellValue),
    Probe(usize),
}

pub fn restrict_scheme<'a>(scheme: &'a Scheme, fixing: CellFixing) -> Result<RestrictedScheme<'a>> {
    let fixed_cells = normalize_cells(scheme, &fixing.fixed_cells)?;
    if fixed_cells != fixing.fixed_cells || fixing.fixed_values.len() != fixed_cells.len() {
        return Err(Error::Consistency(
            "fixed cells must be sorted, distinct, and paired with one value each".into(),
        ));
    }
    for x in &fixing.surviving {
        let z = scheme.encode(x)?.restrict(&fixed_cells);
        if z != fixing.fixed_values {
            return Err(Error::Consistency(format!(
                "{x} encodes to {z:?} on B, not {:?}",
                fixing.fixed_values
            )));
        }
    }
    let mut surviving = fixing.surviving;
    surviving.sort();
    surviving.dedup();
    let fixing = CellFixing {
        surviving,
        ..fixing
    };

    let value_of: BTreeMap<usize, CellValue> = fixed_cells
        .iter()
        .copied()
        .zip(fixing.fixed_values.iter().copied())
        .collect();
    let kept_cells: Vec<usize> = (0..scheme.u()).filter(|c| !value_of.contains_key(c)).collect();
    let rename: BTreeMap<usize, usize> = kept_cells.iter().enumerate().map(|(k, &c)| (c, k)).collect();

    let mut reduced_sets = Vec::with_capacity(scheme.n());
    let mut slots = Vec::with_capacity(scheme.n());
    for set in scheme.probes().sets() {
        let mut reduced = Vec::new();
        let mut slot = Vec::with_capacity(set.len());
        for c in set {
            match value_of.get(c) {
                Some(&v) => slot.push(Slot::Fixed(v)),
                None => {
                    slot.push(Slot::Probe(reduced.len()));
                    reduced.push(rename[c]);
                }
            }
        }
        reduced_sets.push(reduced);
        slots.push(slot);
    }
    Ok(RestrictedScheme {
        base: scheme,
        fixing,
        kept_cells,
        reduced_probes: ProbeFamily::new(reduced_sets, scheme.u() - fixed_cells.len())?,
        slots,
    })
}

impl RestrictedScheme<'_> {
    pub fn base(&self) -> &Scheme {
        self.base
    }

    pub fn fixing(&self) -> &CellFixing {
        &self.fixing
    }

    pub fn surviving(&self) -> &[BitVector] {
        &self.fixing.surviving
    }

    /// u' = u - |B|.
    pub fn u_prime(&self) -> usize {
        self.kept_cells.len()
    }

    /// Original index of each renamed cell.
    pub fn kept_cells(&self) -> &[usize] {
        &self.kept_cells
    }

    pub fn reduced_probes(&self) -> &ProbeFamily {
        &self.reduced_probes
    }

    /// Enc'(x): the cells outside B, renamed to [0, u').
    pub fn reduced_encoding(&self, x: &BitVector) -> Result<Vec<CellValue>> {
        Ok(self.base.encode(x)?.restrict(&self.kept_cells))
    }

    /// d'_i on values for Q'(i) (renamed cells, ascending).
    pub fn reduced_decode(&self, i: usize, values: &[CellValue]) -> i64 {
        let full: Vec<CellValue> = self.slots[i - 1]
            .iter()
            .map(|s| match *s {
                Slot::Fixed(v) => v,
                Slot::Probe(k) => values[k],
            })
            .collect();
        self.base.decode(i, &full)
    }

    /// Answers query i for x in X through Q'(i) and d'_i only.
    pub fn answer_query(&self, x: &BitVector, i: usize) -> Result<i64> {
        if i == 0 || i > self.base.n() {
            return Err(Error::Range { index: i, n: self.base.n() });
        }
        if self.fixing.surviving.binary_search(x).is_err() {
            return Err(Error::Domain(format!("{x} is not in the surviving set X")));
        }
        let y = self.reduced_encoding(x)?;
        let probes = self.reduced_probes.get(i);
        let values: Vec<CellValue> = probes.iter().map(|&c| y[c]).collect();
        Ok(self.reduced_decode(i, &values))
    }
}
