//! End-to-end adversary runs against a concrete scheme.
//!
//! Both pipelines follow the same outline: find a separator B, fix the cells
//! in B to their most likely contents, look for cells that stay close to
//! uniform, pick two queries i < j whose reduced probe sets are disjoint and
//! whose input bits keep high entropy, and finally evaluate the chain of
//! inequalities that would be contradictory for a sufficiently large constant
//! c. At desk scale the chain never closes, so every line is measured and its
//! slack reported instead of asserted.
//!
//! Every stage runs even when an earlier guarantee fails. A stage without
//! usable input falls back to the nearest usable choice and says so in its
//! notes; only a stage that cannot proceed at all truncates the report.

use std::collections::BTreeSet;
use std::fmt::Display;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::bits::BitVector;
use crate::brackets::{unmatched_close_prob, unmatched_open_prob};
use crate::entropy_sum::{entropy_sum_witness, BitSource, EntropySumWitness};
use crate::error::{Error, Result};
use crate::info::{good_blocks, good_cells, subset_tv, BlockStructure, Distribution, GoodSetReport, TOLERANCE};
use crate::report::{list, pass_fail, ratio, real, Format, Report};
use crate::scheme::{most_likely_cell_values, restrict_scheme, CellValue, Domain, RestrictedScheme, Scheme};
use crate::separator::{bracket_separator_stages, find_separator};
use crate::stretcher::{find_stretcher, StretcherResult};

/// Largest assignment space enumerated for probabilities under uniform cells.
pub const MAX_UNIFORM_ENUMERATION: u128 = 1 << 22;
/// Largest number of index pairs checked for joint closeness.
pub const MAX_PAIR_CHECKS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineKind {
    Prefix,
    Brackets,
}

impl PipelineKind {
    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::Prefix => "prefix",
            PipelineKind::Brackets => "brackets",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub name: &'static str,
    pub fields: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl StageRecord {
    fn new(name: &'static str) -> Self {
        StageRecord {
            name,
            fields: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn field(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    fn check(&mut self, name: &str, holds: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            holds,
        });
    }

    fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Every guarantee checked in this stage held.
    pub fn held(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn check_named(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.holds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// The quantity the chain starts from.
    Start,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Start => "",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// One line of the contradiction display. `slack` is the previous line's
/// value minus this one; `holds` says whether the relation to the previous
/// line held as measured.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLine {
    pub label: String,
    pub relation: Relation,
    pub value: Option<f64>,
    pub exact: Option<BigRational>,
    pub slack: Option<f64>,
    pub holds: Option<bool>,
}

fn build_chain(lines: Vec<(String, Relation, Option<f64>, Option<BigRational>)>) -> Vec<ChainLine> {
    let mut out: Vec<ChainLine> = Vec::with_capacity(lines.len());
    for (label, relation, value, exact) in lines {
        let prev = out.last().and_then(|l| l.value);
        let slack = match (relation, prev, value) {
            (Relation::Start, _, _) => None,
            (_, Some(p), Some(v)) => Some(p - v),
            _ => None,
        };
        let holds = slack.map(|s| match relation {
            Relation::Eq => s.abs() <= TOLERANCE,
            Relation::Ge => s >= -TOLERANCE,
            Relation::Gt => s > 0.0,
            Relation::Start => true,
        });
        out.push(ChainLine {
            label,
            relation,
            value,
            exact,
            slack,
            holds,
        });
    }
    out
}

/// The chain's closing bound (P1 - e)(P2 - e) - e with each factor clamped
/// at zero, compared against the joint probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEvaluation {
    pub p_joint: f64,
    pub p1: f64,
    pub p2: f64,
    pub closeness: f64,
    pub bound: f64,
    /// The joint probability lies strictly below the bound.
    pub contradiction: bool,
}

pub fn contradiction_chain(p_joint: f64, p1: f64, p2: f64, closeness: f64) -> ChainEvaluation {
    let bound = (p1 - closeness).max(0.0) * (p2 - closeness).max(0.0) - closeness;
    ChainEvaluation {
        p_joint,
        p1,
        p2,
        closeness,
        bound,
        contradiction: p_joint < bound,
    }
}

/// The block and queries the final chain is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    /// 0-indexed block Z_k.
    pub block: usize,
    pub p: Option<usize>,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub kind: PipelineKind,
    pub n: usize,
    pub u: usize,
    pub q: usize,
    pub cell_alphabet: u64,
    pub c: f64,
    pub redundancy: f64,
    pub stages: Vec<StageRecord>,
    /// Name of the stage that could not proceed, if any.
    pub truncated: Option<&'static str>,
    pub selection: Option<Selection>,
    pub witness: Option<EntropySumWitness>,
    /// t + (l + d)/2 + c^(1/3) sqrt d.
    pub s: Option<f64>,
    /// t + l/2.
    pub s_prime: Option<f64>,
    pub chain: Vec<ChainLine>,
    pub evaluation: Option<ChainEvaluation>,
    /// The chain's left side, exactly.
    pub final_lhs: Option<BigRational>,
}

impl PipelineReport {
    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn completed(&self) -> bool {
        self.truncated.is_none()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.field("pipeline", self.kind.name());
        r.field("n", self.n).field("u", self.u).field("q", self.q);
        r.field("cell_alphabet", self.cell_alphabet);
        r.field("c", real(self.c));
        r.field("redundancy", real(self.redundancy));
        for stage in &self.stages {
            r.section(stage.name);
            for (k, v) in &stage.fields {
                r.field(k, v);
            }
            for c in &stage.checks {
                r.field(&format!("check {}", c.name), pass_fail(c.holds));
            }
            for (k, note) in stage.notes.iter().enumerate() {
                r.field(&format!("note {k}"), note);
            }
        }
        if !self.chain.is_empty() {
            r.section("chain");
            for (k, line) in self.chain.iter().enumerate() {
                let value = match (&line.exact, line.value) {
                    (Some(e), _) => ratio(e),
                    (None, Some(v)) => real(v),
                    (None, None) => "not computed".into(),
                };
                let mut text = format!("{} {} = {value}", line.relation.symbol(), line.label);
                if let Some(s) = line.slack {
                    text.push_str(&format!(", slack {}", real(s)));
                }
                if let Some(h) = line.holds {
                    text.push_str(&format!(", {}", pass_fail(h)));
                }
                r.field(&format!("line {k}"), text.trim_start());
            }
        }
        if let Some(e) = &self.evaluation {
            r.section("evaluation");
            r.field("joint", real(e.p_joint));
            r.field("p1", real(e.p1)).field("p2", real(e.p2));
            r.field("closeness", real(e.closeness));
            r.field("bound", real(e.bound));
            r.field("contradiction", e.contradiction);
        }
        r.section("verdict");
        for stage in &self.stages {
            r.field(stage.name, if stage.held() { "held" } else { "failed" });
        }
        r.field("truncated", self.truncated.unwrap_or("none"));
        r
    }

    pub fn render(&self, format: Format) -> String {
        self.to_report().render(format)
    }
}

struct Context<'a> {
    scheme: &'a Scheme,
    restricted: RestrictedScheme<'a>,
    /// Enc'(x) for each x in X, in the order of `restricted.surviving()`.
    ys: Vec<Vec<CellValue>>,
    x_dist: Distribution,
}

impl Context<'_> {
    fn xs(&self) -> &[BitVector] {
        self.restricted.surviving()
    }

    fn reduced_answer(&self, k: usize, i: usize) -> i64 {
        let y = &self.ys[k];
        let values: Vec<CellValue> = self.restricted.reduced_probes().get(i).iter().map(|&c| y[c]).collect();
        self.restricted.reduced_decode(i, &values)
    }

    fn prob_x(&self, event: impl Fn(&BitVector) -> bool) -> BigRational {
        let hits = self.xs().iter().filter(|x| event(x)).count();
        exact(hits as u128, self.xs().len() as u128)
    }

    /// Pr over y in Y of an event on (d'_i(y), d'_j(y)).
    fn prob_y(&self, i: usize, j: usize, event: impl Fn(i64, i64) -> bool) -> BigRational {
        let hits = (0..self.ys.len())
            .filter(|&k| event(self.reduced_answer(k, i), self.reduced_answer(k, j)))
            .count();
        exact(hits as u128, self.ys.len() as u128)
    }

    /// Pr over uniform cells U' of an event on (d'_i(U'), d'_j(U')), by
    /// enumerating the cells in Q'(i) and Q'(j).
    fn prob_uniform(&self, i: usize, j: usize, event: impl Fn(i64, i64) -> bool) -> Option<BigRational> {
        let probes = self.restricted.reduced_probes();
        let (qi, qj) = (probes.get(i), probes.get(j));
        let union: Vec<usize> = qi.iter().chain(qj).copied().collect::<BTreeSet<_>>().into_iter().collect();
        let m = self.scheme.cell_alphabet();
        let total = (m as u128).checked_pow(union.len() as u32)?;
        if total > MAX_UNIFORM_ENUMERATION {
            return None;
        }
        let pos = |c: &usize| union.binary_search(c).expect("cell in union");
        let pi: Vec<usize> = qi.iter().map(pos).collect();
        let pj: Vec<usize> = qj.iter().map(pos).collect();
        let mut assignment = vec![0 as CellValue; union.len()];
        let mut hits = 0u128;
        for _ in 0..total {
            let vi: Vec<CellValue> = pi.iter().map(|&k| assignment[k]).collect();
            let vj: Vec<CellValue> = pj.iter().map(|&k| assignment[k]).collect();
            if event(self.restricted.reduced_decode(i, &vi), self.restricted.reduced_decode(j, &vj)) {
                hits += 1;
            }
            for slot in assignment.iter_mut().rev() {
                *slot += 1;
                if (*slot as u64) < m {
                    break;
                }
                *slot = 0;
            }
        }
        Some(exact(hits, total))
    }

    fn disjoint(&self, i: usize, j: usize) -> bool {
        let probes = self.restricted.reduced_probes();
        probes.get(i).iter().all(|c| !probes.get(j).contains(c))
    }
}

fn exact(numer: u128, denom: u128) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn lg(x: f64) -> f64 {
    x.log2()
}

/// Fixes B to its most likely values and records the surviving set.
fn fixing_stage<'a>(scheme: &'a Scheme, blocker: &[usize], stages: &mut Vec<StageRecord>) -> Result<Context<'a>> {
    let mut st = StageRecord::new("fixing");
    let fixing = most_likely_cell_values(scheme, blocker)?;
    st.field("B", list(&fixing.fixed_cells));
    st.field("z", list(&fixing.fixed_values));
    st.field("|X|", fixing.surviving.len());
    st.field("|domain|", scheme.domain_size());
    let deficiency = fixing.deficiency(scheme);
    st.field("deficiency lg|domain| - lg|X|", real(deficiency));
    st.field(
        "|B| lg m",
        real(fixing.fixed_cells.len() as f64 * lg(scheme.cell_alphabet() as f64)),
    );
    st.check("|X| >= |domain|/m^|B|", fixing.pigeonhole_holds(scheme));
    let restricted = restrict_scheme(scheme, fixing)?;
    st.field("u'", restricted.u_prime());
    let ys = restricted
        .surviving()
        .iter()
        .map(|x| restricted.reduced_encoding(x))
        .collect::<Result<Vec<_>>>()?;
    let x_dist = Distribution::uniform_bits(scheme.n(), restricted.surviving())?;
    let ctx = Context {
        scheme,
        restricted,
        ys,
        x_dist,
    };
    let domain = scheme.domain();
    let answers_match = ctx.xs().iter().enumerate().all(|(k, x)| {
        (1..=scheme.n()).all(|i| ctx.reduced_answer(k, i) == domain.oracle(x, i))
    });
    st.check("restricted answers correct on X", answers_match);
    stages.push(st);
    Ok(ctx)
}

/// Good cells for 2q-subsets at closeness eta, then the indices
/// of V whose reduced probes lie in G, with pairwise closeness measured.
fn good_cells_stage(
    ctx: &Context<'_>,
    v: &[usize],
    eta: f64,
    stages: &mut Vec<StageRecord>,
) -> (Vec<usize>, StageRecord) {
    let mut st = StageRecord::new("good_cells");
    let q = ctx.scheme.q();
    let m = ctx.scheme.cell_alphabet();
    st.field("eta", real(eta));
    st.field("subset size", 2 * q);
    let y_dist = Distribution::from_weights(
        ctx.restricted.u_prime(),
        ctx.ys.iter().map(|y| (y.clone(), 1)),
    );
    let report: Option<GoodSetReport> = match y_dist.and_then(|y| good_cells(&y, m, 2 * q, eta)) {
        Ok(r) => Some(r),
        Err(e) => {
            st.note(format!("good cells unavailable: {e}"));
            None
        }
    };
    let probes = ctx.restricted.reduced_probes();
    let v2: Vec<usize> = match &report {
        Some(r) => {
            st.field("G", list(&r.good));
            st.field("|G|", r.good.len());
            st.field("deficiency a", real(r.deficiency));
            st.field("size bound", real(r.size_bound));
            st.check("|G| size bound", r.size_bound_satisfied);
            st.field("subsets verified", r.subsets_verified);
            v.iter()
                .copied()
                .filter(|&i| probes.get(i).iter().all(|c| r.good.binary_search(c).is_ok()))
                .collect()
        }
        None => Vec::new(),
    };
    st.field("V_2", list(&v2));
    st.field("|V_2|", v2.len());

    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    'pairs: for (a, &i) in v2.iter().enumerate() {
        for &j in &v2[a + 1..] {
            if checked == MAX_PAIR_CHECKS {
                st.note(format!("pair closeness checked on the first {MAX_PAIR_CHECKS} pairs only"));
                break 'pairs;
            }
            let coords: Vec<usize> = probes.get(i).iter().chain(probes.get(j)).copied().collect();
            let y = Distribution::from_weights(
                ctx.restricted.u_prime(),
                ctx.ys.iter().map(|y| (y.clone(), 1)),
            );
            match y.and_then(|y| subset_tv(&y, &coords, m)) {
                Ok(tv) => worst = worst.max(tv),
                Err(e) => {
                    st.note(format!("pair closeness unavailable: {e}"));
                    worst = f64::INFINITY;
                    break 'pairs;
                }
            }
            checked += 1;
        }
    }
    st.field("pairs checked", checked);
    st.field("max pair TV", real(worst));
    st.check("every pair in V_2 eta-close", worst <= eta + TOLERANCE);
    let _ = stages;
    (v2, st)
}

fn choose_block(report: &GoodSetReport) -> usize {
    match report.good.first() {
        Some(&k) => k - 1,
        None => {
            let mut best = 0;
            for (k, s) in report.scores.iter().enumerate() {
                if *s < report.scores[best] - TOLERANCE {
                    best = k;
                }
            }
            best
        }
    }
}

fn empty_report(
    kind: PipelineKind,
    scheme: &Scheme,
    c: f64,
) -> Result<PipelineReport> {
    Ok(PipelineReport {
        kind,
        n: scheme.n(),
        u: scheme.u(),
        q: scheme.q(),
        cell_alphabet: scheme.cell_alphabet(),
        c,
        redundancy: scheme.redundancy()?,
        stages: Vec::new(),
        truncated: None,
        selection: None,
        witness: None,
        s: None,
        s_prime: None,
        chain: Vec::new(),
        evaluation: None,
        final_lhs: None,
    })
}

/// The prefix-sum argument: separator with gap g = lg^c n (or `gap`), good
/// cells at closeness 1/c, stretcher, high-entropy blocks at 1/c, the
/// entropy-sum threshold, and the final chain.
pub fn run_prefix_pipeline(scheme: &Scheme, c: f64, gap: Option<f64>) -> Result<PipelineReport> {
    if scheme.domain() != Domain::AllBitstrings {
        return Err(Error::Parameter("the prefix pipeline needs a scheme over all bit strings".into()));
    }
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::Parameter(format!("c must be a finite value > 1, got {c}")));
    }
    let n = scheme.n();
    let lg_n = lg(n as f64);
    let eta = 1.0 / c;
    let mut report = empty_report(PipelineKind::Prefix, scheme, c)?;
    let stages = &mut report.stages;

    // Separator.
    let mut st = StageRecord::new("separator");
    let family = scheme.probes().sets().to_vec();
    let q = scheme.q();
    let mut g = gap.unwrap_or_else(|| lg_n.powf(c));
    if g < 2.0 {
        st.note(format!("gap {} raised to 2", real(g)));
        g = 2.0;
    }
    let sep = find_separator(&family, q, g)?;
    st.field("g", real(g));
    st.field("B", list(&sep.blocker));
    st.field("V", list(&sep.disjoint));
    st.field("w", sep.w);
    st.field("stages", sep.stages_run);
    st.field("n/(gq)^q", real(sep.k0()));
    st.check("w >= n/(gq)^q", sep.w_lower_bound_holds());
    st.check("|B| <= w/g", sep.blocker_bound_holds());
    st.check("reduced sets disjoint", sep.disjoint_holds(&family));
    st.field("w >= sqrt n", sep.w as f64 >= (n as f64).sqrt());
    stages.push(st);

    let ctx = fixing_stage(scheme, &sep.blocker, stages)?;

    // Good cells and V_2.
    let (mut v2, mut st) = good_cells_stage(&ctx, &sep.disjoint, eta, stages);
    let w = sep.w as f64;
    st.check("|V_2| >= w/2", v2.len() as f64 >= w / 2.0);
    st.field(
        "w - 32 q r c^2",
        real(w - 32.0 * q as f64 * report.redundancy * c * c),
    );
    if v2.len() < 2 {
        st.note("V_2 has fewer than two indices; continuing with V");
        v2 = sep.disjoint.clone();
    }
    stages.push(st);

    // Stretcher.
    let mut st = StageRecord::new("stretcher");
    let stretched = match find_stretcher(&v2, n, c) {
        Ok(r) => {
            let guaranteed = StretcherResult::guaranteed_len(v2.len(), n, c);
            st.field("window", r.window);
            st.field("guaranteed w'", guaranteed);
            st.check("w' >= 2 floor(|V_2|/(c lg n))", r.w_prime() >= guaranteed);
            st.check("gap inequality on every pair", r.gaps_hold());
            Some(r)
        }
        Err(e) => {
            st.check("sweep completes", false);
            st.note(format!("{e}"));
            None
        }
    };
    let stretched = match stretched.filter(|r| r.w_prime() >= 2) {
        Some(r) => Some(r),
        None => {
            st.note("too few indices from V_2; running the sweep on 1..n");
            let all: Vec<usize> = (1..=n).collect();
            match find_stretcher(&all, n, c) {
                Ok(r) if r.w_prime() >= 2 => Some(r),
                Ok(_) => None,
                Err(e) => {
                    st.note(format!("{e}"));
                    None
                }
            }
        }
    };
    let Some(stretched) = stretched else {
        st.note("no pair available");
        stages.push(st);
        report.truncated = Some("stretcher");
        return Ok(report);
    };
    let v3 = stretched.v_prime.clone();
    st.field("V_3", list(&v3));
    st.field("w'", v3.len());
    st.field("w/(2c lg n)", real(w / (2.0 * c * lg_n)));
    stages.push(st);

    // Entropy blocks Z_k = x_{v'_{2k}+1} .. x_{v'_{2k+2}}, the last padded to n.
    let mut st = StageRecord::new("entropy_blocks");
    let pairs = v3.len() / 2;
    let start = |k: usize| if k == 0 { 0 } else { v3[2 * k - 1] };
    let sizes: Vec<usize> = (0..pairs)
        .map(|k| if k + 1 == pairs { n - start(k) } else { start(k + 1) - start(k) })
        .collect();
    st.field("block sizes", list(&sizes));
    let blocks = BlockStructure::new(sizes)?;
    let gb = good_blocks(&ctx.x_dist, &blocks, eta)?;
    st.field(
        "deficiencies",
        list(&gb.scores.iter().map(|&s| real(s)).collect::<Vec<_>>()),
    );
    st.field("deficiency a", real(gb.deficiency));
    st.check("deficiencies sum to a", (gb.deficiency_sum() - gb.deficiency).abs() <= TOLERANCE);
    st.field("good blocks", list(&gb.good.iter().map(|k| k - 1).collect::<Vec<_>>()));
    st.field("size bound", real(gb.size_bound));
    st.check("|G| >= k - a/eps", gb.size_bound_satisfied);
    st.field("w'/2 - c w/lg^(c-1) n", real(pairs as f64 - c * w / lg_n.powf(c - 1.0)));
    st.check("some block has high conditional entropy", !gb.good.is_empty());
    let k = choose_block(&gb);
    if gb.good.is_empty() {
        st.note("no good block; using the one with the smallest deficiency");
    }
    let (p, i, j) = (start(k), v3[2 * k], v3[2 * k + 1]);
    st.field("chosen k", k);
    st.field("p", p).field("i", i).field("j", j);
    stages.push(st);
    report.selection = Some(Selection {
        block: k,
        p: Some(p),
        i,
        j,
    });

    // Entropy-sum threshold.
    let mut st = StageRecord::new("entropy_sum");
    let witness = entropy_sum_witness(BitSource::Explicit(&ctx.x_dist), p, i, j, c)?;
    st.field("l", witness.ell).field("d", witness.d);
    st.field("H(x_p+1..j | x_1..p)", real(witness.hypothesis_entropy));
    st.field("required", real(witness.hypothesis_required));
    st.check("entropy hypothesis", witness.hypothesis_holds());
    st.check("l >= c d", witness.spacing_holds());
    st.field("Pr[Y in A]", ratio(&witness.good_prefix_mass));
    st.check("Pr[Y in A] >= 1/2", witness.prefix_mass_holds());
    if witness.prefix_fallback {
        st.note("A too light for a threshold; all prefixes used");
    }
    st.field("t", witness.t);
    st.check("t maximal", witness.threshold_maximal());
    st.check("Pr[Y in A, sum <= t] >= 1/4", witness.below_t_holds());
    st.field("s", real(witness.s));
    st.field("s'", real(witness.s_prime));
    st.field("P_upper", ratio(&witness.p_upper));
    st.field("P_lower", ratio(&witness.p_lower));
    st.field("P_lower non-strict", ratio(&witness.p_lower_nonstrict));
    st.field("P_joint", ratio(&witness.p_joint));
    st.check("P_upper >= 1/10", witness.upper_holds());
    st.check("P_lower >= 1/10", witness.lower_holds());
    st.check("P_joint <= 1/1000", witness.joint_holds());
    stages.push(st);
    let (s, s_prime) = (witness.s, witness.s_prime);
    report.s = Some(s);
    report.s_prime = Some(s_prime);
    report.witness = Some(witness);

    // Final chain.
    let mut st = StageRecord::new("chain");
    let upper = |v: i64| v as f64 >= s - TOLERANCE;
    let lower = |v: i64| (v as f64) < s_prime - TOLERANCE;
    let x_joint = ctx.prob_x(|x| upper(x.prefix_sum(j) as i64) && lower(x.prefix_sum(i) as i64));
    let x_upper = ctx.prob_x(|x| upper(x.prefix_sum(j) as i64));
    let x_lower = ctx.prob_x(|x| lower(x.prefix_sum(i) as i64));
    let y_joint = ctx.prob_y(i, j, |ai, aj| upper(aj) && lower(ai));
    let y_upper = ctx.prob_y(i, j, |_, aj| upper(aj));
    let y_lower = ctx.prob_y(i, j, |ai, _| lower(ai));
    let u_joint = ctx.prob_uniform(i, j, |ai, aj| upper(aj) && lower(ai));
    let u_upper = ctx.prob_uniform(i, j, |_, aj| upper(aj));
    let u_lower = ctx.prob_uniform(i, j, |ai, _| lower(ai));
    let disjoint = ctx.disjoint(i, j);
    st.field("Q'(i) and Q'(j) disjoint", disjoint);
    if u_joint.is_none() {
        st.note("uniform-cell probabilities skipped: assignment space too large");
    }
    let tenth = 0.1;
    report.chain = build_chain(vec![
        ("Pr_X[sum_j >= s and sum_i < s']".into(), Relation::Start, Some(to_f64(&x_joint)), Some(x_joint.clone())),
        ("Pr_Y[d'_j >= s and d'_i < s']".into(), Relation::Eq, Some(to_f64(&y_joint)), Some(y_joint)),
        ("Pr_U'[d'_j >= s and d'_i < s'] - 1/c".into(), Relation::Ge, u_joint.as_ref().map(|p| to_f64(p) - eta), None),
        (
            "Pr_U'[d'_j >= s] Pr_U'[d'_i < s'] - 1/c".into(),
            Relation::Eq,
            u_upper.as_ref().zip(u_lower.as_ref()).map(|(a, b)| to_f64(a) * to_f64(b) - eta),
            None,
        ),
        (
            "(Pr_Y[d'_j >= s] - 1/c)(Pr_Y[d'_i < s'] - 1/c) - 1/c".into(),
            Relation::Ge,
            Some((to_f64(&y_upper) - eta) * (to_f64(&y_lower) - eta) - eta),
            None,
        ),
        (
            "(Pr_X[sum_j >= s] - 1/c)(Pr_X[sum_i < s'] - 1/c) - 1/c".into(),
            Relation::Eq,
            Some((to_f64(&x_upper) - eta) * (to_f64(&x_lower) - eta) - eta),
            None,
        ),
        ("(1/10 - 1/c)^2 - 1/c".into(), Relation::Ge, Some((tenth - eta) * (tenth - eta) - eta), None),
        ("1/200".into(), Relation::Gt, Some(1.0 / 200.0), None),
    ]);
    st.check("restricted probabilities match X", report.chain[1].holds == Some(true));
    report.evaluation = Some(contradiction_chain(to_f64(&x_joint), to_f64(&x_upper), to_f64(&x_lower), eta));
    report.final_lhs = Some(x_joint);
    stages.push(st);
    Ok(report)
}

/// The balanced-brackets argument: bracket separator with constant c, good
/// cells at closeness 1/(c d) with d = 16 lg^a n, close pairs, high-entropy
/// blocks at 4 sqrt(eps) = 1/(c sqrt d), and the final chain whose left side
/// is exactly 0.
pub fn run_bracket_pipeline(scheme: &Scheme, c: u64) -> Result<PipelineReport> {
    if scheme.domain() != Domain::BalancedBrackets {
        return Err(Error::Parameter("the bracket pipeline needs a scheme over balanced brackets".into()));
    }
    if c < 4 {
        return Err(Error::Parameter(format!("c must be at least 4, got {c}")));
    }
    let n = scheme.n();
    if n % 2 == 1 {
        return Err(Error::Parameter(format!("bracket length {n} is odd")));
    }
    let cf = c as f64;
    let lg_n = lg(n as f64);
    let mut report = empty_report(PipelineKind::Brackets, scheme, cf)?;
    let stages = &mut report.stages;

    // Separator.
    let mut st = StageRecord::new("separator");
    let family = scheme.probes().sets().to_vec();
    let q = scheme.q();
    st.field("q <= lg lg n / c", q as f64 <= lg_n.log2() / cf);
    let sep = bracket_separator_stages(&family, q, c)?;
    st.field("a", sep.a).field("b", sep.b);
    st.field("B", list(&sep.blocker));
    st.field("V", list(&sep.disjoint));
    st.field("stages", sep.stages_run);
    st.check("c a <= b <= c (2c)^a", sep.exponents_hold());
    st.field("n/lg^b n", real(sep.blocker_limit()));
    st.check("|B| <= n/lg^b n", sep.blocker_bound_holds());
    st.field("n/lg^a n", real(sep.disjoint_target()));
    st.check("|V| >= n/lg^a n", sep.disjoint_bound_holds());
    st.check("n/lg^b n >= 1", sep.scale_bound_holds());
    st.check(
        "reduced sets disjoint",
        crate::separator::reduced_disjoint(&family, &sep.blocker, &sep.disjoint),
    );
    stages.push(st);

    let d = 16.0 * lg_n.powf(sep.a as f64);
    let eta = 1.0 / (cf * d);
    let ctx = fixing_stage(scheme, &sep.blocker, stages)?;

    let (mut v2, mut st) = good_cells_stage(&ctx, &sep.disjoint, eta, stages);
    st.field("d", real(d));
    st.check("|V_2| >= n/(2 lg^a n)", v2.len() as f64 >= n as f64 / (2.0 * lg_n.powf(sep.a as f64)));
    if v2.len() < 2 {
        st.note("V_2 has fewer than two indices; continuing with V");
        v2 = sep.disjoint.clone();
    }
    stages.push(st);

    // Consecutive pairs of V_2 closer than d.
    let mut st = StageRecord::new("close_pairs");
    let all_pairs: Vec<(usize, usize)> = v2.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    let mut kept: Vec<(usize, usize)> = all_pairs.iter().copied().filter(|(a, b)| ((b - a) as f64) < d).collect();
    let discarded = all_pairs.len() - kept.len();
    st.field("pairs", all_pairs.len());
    st.field("discarded", discarded);
    st.field("kept", kept.len());
    st.check("discarded <= n/d", discarded as f64 <= n as f64 / d);
    st.field("n/(16 lg^a n)", real(n as f64 / (16.0 * lg_n.powf(sep.a as f64))));
    st.check("kept >= n/(16 lg^a n)", kept.len() as f64 >= n as f64 / (16.0 * lg_n.powf(sep.a as f64)));
    if kept.is_empty() {
        st.note("no close pair in V_2; pairing consecutive positions of 1..n");
        kept = (1..n).step_by(2).map(|a| (a, a + 1)).filter(|(a, b)| ((b - a) as f64) < d).collect();
    }
    if kept.is_empty() {
        stages.push(st);
        report.truncated = Some("close_pairs");
        return Ok(report);
    }
    st.field("V_3", list(&kept.iter().flat_map(|&(a, b)| [a, b]).collect::<Vec<_>>()));
    stages.push(st);

    // Blocks, each holding exactly one kept pair.
    let mut st = StageRecord::new("entropy_blocks");
    let cuts: Vec<usize> = kept.iter().map(|&(_, b)| b).collect();
    let blocks = BlockStructure::from_cuts(&cuts, n)?;
    st.field("block sizes", list(blocks.sizes()));
    let epsilon = 1.0 / (16.0 * cf * cf * d);
    st.field("eps", real(epsilon));
    let gb = good_blocks(&ctx.x_dist, &blocks, epsilon)?;
    st.field(
        "deficiencies",
        list(&gb.scores.iter().map(|&s| real(s)).collect::<Vec<_>>()),
    );
    st.field("deficiency a", real(gb.deficiency));
    st.check("deficiencies sum to a", (gb.deficiency_sum() - gb.deficiency).abs() <= TOLERANCE);
    st.field("good blocks", list(&gb.good.iter().map(|k| k - 1).collect::<Vec<_>>()));
    st.field("size bound", real(gb.size_bound));
    st.check("|G| >= k - a/eps", gb.size_bound_satisfied);
    let closeness = 1.0 / (cf * d.sqrt());
    st.check(
        "good blocks 1/(c sqrt d)-close",
        gb.good.iter().all(|&k| gb.marginal_tv[k - 1] <= closeness + TOLERANCE),
    );
    st.check("some block has high conditional entropy", !gb.good.is_empty());
    let k = choose_block(&gb);
    if gb.good.is_empty() {
        st.note("no good block; using the one with the smallest deficiency");
    }
    let (i, j) = kept[k];
    st.field("chosen k", k);
    st.field("i", i).field("j", j);
    st.field("block TV", real(gb.marginal_tv[k]));
    stages.push(st);
    report.selection = Some(Selection {
        block: k,
        p: None,
        i,
        j,
    });

    // Final chain.
    let mut st = StageRecord::new("chain");
    let beyond = |v: i64| v > j as i64;
    let before = |v: i64| v >= 1 && v < i as i64;
    let domain = scheme.domain();
    let x_joint = ctx.prob_x(|x| beyond(domain.oracle(x, i)) && before(domain.oracle(x, j)));
    let x_i = ctx.prob_x(|x| beyond(domain.oracle(x, i)));
    let x_j = ctx.prob_x(|x| before(domain.oracle(x, j)));
    let y_joint = ctx.prob_y(i, j, |ai, aj| beyond(ai) && before(aj));
    let y_i = ctx.prob_y(i, j, |ai, _| beyond(ai));
    let y_j = ctx.prob_y(i, j, |_, aj| before(aj));
    let u_joint = ctx.prob_uniform(i, j, |ai, aj| beyond(ai) && before(aj));
    let u_i = ctx.prob_uniform(i, j, |ai, _| beyond(ai));
    let u_j = ctx.prob_uniform(i, j, |_, aj| before(aj));
    st.field("Q'(i) and Q'(j) disjoint", ctx.disjoint(i, j));
    if u_joint.is_none() {
        st.note("uniform-cell probabilities skipped: assignment space too large");
    }
    let window = j - i + 1;
    let cube = unmatched_open_prob(window).ok().zip(unmatched_close_prob(window).ok());
    if let Some((open, close)) = &cube {
        st.field("Pr_{0,1}^n[i open, unmatched through j]", ratio(open));
        st.field("Pr_{0,1}^n[j closed, unmatched from i]", ratio(close));
    }
    let slack_uniform = 2.0 / (cf * d.sqrt());
    report.chain = build_chain(vec![
        ("Pr_X[Match(i) > j and Match(j) < i]".into(), Relation::Start, Some(to_f64(&x_joint)), Some(x_joint.clone())),
        ("Pr_Y[d'_i > j and d'_j < i]".into(), Relation::Eq, Some(to_f64(&y_joint)), Some(y_joint)),
        ("Pr_U'[d'_i > j and d'_j < i] - 1/(cd)".into(), Relation::Ge, u_joint.as_ref().map(|p| to_f64(p) - eta), None),
        (
            "Pr_U'[d'_i > j] Pr_U'[d'_j < i] - 1/(cd)".into(),
            Relation::Eq,
            u_i.as_ref().zip(u_j.as_ref()).map(|(a, b)| to_f64(a) * to_f64(b) - eta),
            None,
        ),
        (
            "(Pr_Y[d'_i > j] - 1/(cd))(Pr_Y[d'_j < i] - 1/(cd)) - 1/(cd)".into(),
            Relation::Ge,
            Some((to_f64(&y_i) - eta) * (to_f64(&y_j) - eta) - eta),
            None,
        ),
        (
            "(Pr_X[Match(i) > j] - 1/(cd))(Pr_X[Match(j) < i] - 1/(cd)) - 1/(cd)".into(),
            Relation::Eq,
            Some((to_f64(&x_i) - eta) * (to_f64(&x_j) - eta) - eta),
            None,
        ),
        (
            "(Pr_{0,1}^n[Match(i) > j] - 2/(c sqrt d))(Pr_{0,1}^n[Match(j) < i] - 2/(c sqrt d)) - 1/(cd)".into(),
            Relation::Ge,
            cube.as_ref()
                .map(|(o, cl)| (to_f64(o) - slack_uniform) * (to_f64(cl) - slack_uniform) - eta),
            None,
        ),
        ("0".into(), Relation::Gt, Some(0.0), None),
    ]);
    st.check("left side is exactly 0", x_joint.is_zero());
    st.check("restricted probabilities match X", report.chain[1].holds == Some(true));
    report.evaluation = Some(contradiction_chain(to_f64(&x_joint), to_f64(&x_i), to_f64(&x_j), eta));
    report.final_lhs = Some(x_joint);
    stages.push(st);
    Ok(report)
}
