//! Staged greedy separators: grow a blocker set B until many of the sets
//! Q(i) \ B are pairwise disjoint.
//!
//! Each stage collects a maximal disjoint subfamily S greedily. If S is large
//! enough the procedure stops; otherwise every element of S joins B, which
//! hits every set in the family and shrinks each one by at least one element.
//! After q stages every set is empty, so the loop always terminates.
//!
//! Query indices (the positions in the family) are 1-indexed.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// Indices (1-indexed) of the maximal disjoint subfamily found by scanning
/// in ascending order and keeping every set that avoids all kept ones.
/// Empty sets are disjoint from everything.
pub fn greedy_disjoint<S: AsRef<[usize]>>(family: &[S]) -> Vec<usize> {
    let mut used = HashSet::new();
    let mut chosen = Vec::new();
    for (idx, set) in family.iter().enumerate() {
        let set = set.as_ref();
        if set.iter().all(|e| !used.contains(e)) {
            used.extend(set.iter().copied());
            chosen.push(idx + 1);
        }
    }
    chosen
}

/// True when the sets Q(v) \ B for v in `indices` are pairwise disjoint.
pub fn reduced_disjoint(family: &[Vec<usize>], blocker: &[usize], indices: &[usize]) -> bool {
    let blocker: HashSet<usize> = blocker.iter().copied().collect();
    let mut seen = HashSet::new();
    for &v in indices {
        for e in &family[v - 1] {
            if !blocker.contains(e) && !seen.insert(*e) {
                return false;
            }
        }
    }
    true
}

fn reduce(family: &[Vec<usize>], blocker: &BTreeSet<usize>) -> Vec<Vec<usize>> {
    family
        .iter()
        .map(|s| s.iter().copied().filter(|e| !blocker.contains(e)).collect())
        .collect()
}

fn max_set_size(family: &[Vec<usize>]) -> usize {
    family.iter().map(Vec::len).max().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageLog {
    pub stage: usize,
    /// |B| at the start of the stage.
    pub blocker_before: usize,
    /// Bound on |B| the stage invariant promises, when one applies.
    pub blocker_bound: Option<f64>,
    pub threshold: f64,
    pub disjoint_found: usize,
    pub succeeded: bool,
    /// |B| after the stage (unchanged on success).
    pub blocker_after: usize,
}

impl StageLog {
    pub fn invariant_holds(&self) -> bool {
        self.blocker_bound
            .is_none_or(|bound| self.blocker_before as f64 <= bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorResult {
    pub blocker: Vec<usize>,
    pub disjoint: Vec<usize>,
    pub w: usize,
    pub stages_run: usize,
    pub log: Vec<StageLog>,
    pub n: usize,
    pub q: usize,
    pub gap: f64,
}

impl SeparatorResult {
    /// k_0 = n / (g q)^q.
    pub fn k0(&self) -> f64 {
        self.n as f64 / (self.gap * self.q as f64).powi(self.q as i32)
    }

    pub fn w_lower_bound_holds(&self) -> bool {
        self.w as f64 >= self.k0() && self.w <= self.n
    }

    pub fn blocker_bound_holds(&self) -> bool {
        self.blocker.len() as f64 * self.gap <= self.w as f64
    }

    pub fn disjoint_holds(&self, family: &[Vec<usize>]) -> bool {
        self.disjoint.len() >= self.w && reduced_disjoint(family, &self.blocker, &self.disjoint)
    }

    pub fn all_guarantees_hold(&self, family: &[Vec<usize>]) -> bool {
        self.w_lower_bound_holds()
            && self.blocker_bound_holds()
            && self.disjoint_holds(family)
            && self.stages_run <= self.q + 1
            && self.log.iter().all(StageLog::invariant_holds)
    }
}

/// Separator with gap g for a family of sets of size at most q.
pub fn find_separator(family: &[Vec<usize>], q: usize, gap: f64) -> Result<SeparatorResult> {
    if !(gap >= 2.0) || !gap.is_finite() {
        return Err(Error::Parameter(format!("gap must be a finite value >= 2, got {gap}")));
    }
    let largest = max_set_size(family);
    if largest > q {
        return Err(Error::Parameter(format!("a set has {largest} elements, above q = {q}")));
    }
    let n = family.len();
    let gq = gap * q as f64;
    let k0 = n as f64 / gq.powi(q as i32);
    let mut blocker = BTreeSet::new();
    let mut log = Vec::new();
    for stage in 0..=q {
        let reduced = reduce(family, &blocker);
        let chosen = greedy_disjoint(&reduced);
        // k_0 (gq)^i, written as n / (gq)^(q-i) so stage q compares against n exactly.
        let threshold = n as f64 / gq.powi((q - stage) as i32);
        let blocker_bound =
            (stage >= 1).then(|| k0 * gap.powi(stage as i32 - 1) * (q as f64).powi(stage as i32));
        let before = blocker.len();
        let succeeded = chosen.len() as f64 >= threshold;
        if !succeeded {
            for &v in &chosen {
                blocker.extend(reduced[v - 1].iter().copied());
            }
        }
        log.push(StageLog {
            stage,
            blocker_before: before,
            blocker_bound,
            threshold,
            disjoint_found: chosen.len(),
            succeeded,
            blocker_after: blocker.len(),
        });
        if succeeded {
            return Ok(SeparatorResult {
                blocker: blocker.into_iter().collect(),
                w: chosen.len(),
                disjoint: chosen,
                stages_run: stage + 1,
                log,
                n,
                q,
                gap,
            });
        }
    }
    unreachable!("at stage q every set is empty and all n are chosen")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketSeparatorResult {
    pub blocker: Vec<usize>,
    pub disjoint: Vec<usize>,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub n: usize,
    pub q: usize,
    pub stages_run: usize,
    pub log: Vec<StageLog>,
}

impl BracketSeparatorResult {
    fn lg_n(&self) -> f64 {
        (self.n as f64).log2()
    }

    /// n / lg^b n.
    pub fn blocker_limit(&self) -> f64 {
        self.n as f64 / self.lg_n().powf(self.b as f64)
    }

    /// n / lg^a n.
    pub fn disjoint_target(&self) -> f64 {
        self.n as f64 / self.lg_n().powf(self.a as f64)
    }

    /// c a <= b <= c (2c)^a.
    pub fn exponents_hold(&self) -> bool {
        let upper = (2.0 * self.c as f64).powf(self.a as f64) * self.c as f64;
        self.c * self.a <= self.b && self.b as f64 <= upper
    }

    pub fn blocker_bound_holds(&self) -> bool {
        self.blocker.len() as f64 <= self.blocker_limit()
    }

    pub fn disjoint_bound_holds(&self) -> bool {
        self.disjoint.len() as f64 >= self.disjoint_target()
    }

    /// n / lg^b n >= 1; only reachable at astronomically large n once q >= 1.
    pub fn scale_bound_holds(&self) -> bool {
        self.blocker_limit() >= 1.0
    }
}

/// The bracket-problem separator with schedule d = 2c, L = lg n: stage i
/// stops once n / L^(d^(q-i)) disjoint sets exist, giving a = d^(q-i) and
/// b = c d^(q-i).
pub fn find_separator_brackets(family: &[Vec<usize>], q: usize, c: u64) -> Result<BracketSeparatorResult> {
    if c < 4 {
        return Err(Error::Parameter(format!("c must be at least 4, got {c}")));
    }
    let n = family.len();
    if n < 4 {
        return Err(Error::Parameter(format!("n = {n} too small: lg lg n must be positive")));
    }
    let lglg = (n as f64).log2().log2();
    if q as f64 > lglg / c as f64 {
        return Err(Error::Parameter(format!(
            "q = {q} exceeds (lg lg n)/c = {:.4}",
            lglg / c as f64
        )));
    }
    bracket_separator_stages(family, q, c)
}

/// Runs the bracket schedule without the parameter preconditions.
pub fn bracket_separator_stages(family: &[Vec<usize>], q: usize, c: u64) -> Result<BracketSeparatorResult> {
    let largest = max_set_size(family);
    if largest > q {
        return Err(Error::Parameter(format!("a set has {largest} elements, above q = {q}")));
    }
    let n = family.len();
    let big_l = (n as f64).log2();
    let d = 2 * c;
    let mut blocker = BTreeSet::new();
    let mut log = Vec::new();
    for stage in 0..=q {
        let a = d
            .checked_pow((q - stage) as u32)
            .ok_or_else(|| Error::Parameter(format!("(2c)^{} overflows", q - stage)))?;
        let b = c * a;
        let reduced = reduce(family, &blocker);
        let chosen = greedy_disjoint(&reduced);
        let threshold = n as f64 / big_l.powf(a as f64);
        let blocker_bound = (stage >= 1).then(|| n as f64 / big_l.powf(b as f64));
        let before = blocker.len();
        let succeeded = chosen.len() as f64 >= threshold;
        if !succeeded {
            for &v in &chosen {
                blocker.extend(reduced[v - 1].iter().copied());
            }
        }
        log.push(StageLog {
            stage,
            blocker_before: before,
            blocker_bound,
            threshold,
            disjoint_found: chosen.len(),
            succeeded,
            blocker_after: blocker.len(),
        });
        if succeeded {
            return Ok(BracketSeparatorResult {
                blocker: blocker.into_iter().collect(),
                disjoint: chosen,
                a,
                b,
                c,
                n,
                q,
                stages_run: stage + 1,
                log,
            });
        }
    }
    unreachable!("at stage q every set is empty and all n are chosen")
}
