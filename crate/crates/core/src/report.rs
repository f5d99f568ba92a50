//! Structured reports with two renderings: indented `key: value` text for
//! people and `section.key=value` lines for scripts.

use std::fmt::{Display, Write as _};

use num_rational::BigRational;

use crate::entropy_sum::{show_ratio, EntropySumWitness};
use crate::info::GoodSetReport;
use crate::separator::{BracketSeparatorResult, SeparatorResult, StageLog};
use crate::stretcher::StretcherResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

impl Format {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "text" => Some(Format::Text),
            "machine" => Some(Format::Machine),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Entry {
    Field(String, String),
    Section(String),
}

/// An ordered list of fields grouped into sections.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    entries: Vec<Entry>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push(Entry::Field(key.to_string(), value.to_string()));
        self
    }

    /// Starts a section; fields that follow belong to it.
    pub fn section(&mut self, name: &str) -> &mut Self {
        self.entries.push(Entry::Section(name.to_string()));
        self
    }

    pub fn check(&mut self, key: &str, holds: bool) -> &mut Self {
        self.field(key, pass_fail(holds))
    }

    /// The value of the first field with this key in the given section
    /// (`""` for fields before any section).
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        let mut current = "";
        for e in &self.entries {
            match e {
                Entry::Section(s) => current = s,
                Entry::Field(k, v) if current == section && k == key => return Some(v),
                _ => {}
            }
        }
        None
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        let mut current: Option<&str> = None;
        for e in &self.entries {
            match (e, format) {
                (Entry::Section(s), Format::Text) => {
                    let _ = writeln!(out, "[{s}]");
                    current = Some(s);
                }
                (Entry::Section(s), Format::Machine) => current = Some(s),
                (Entry::Field(k, v), Format::Text) => {
                    let indent = if current.is_some() { "  " } else { "" };
                    let _ = writeln!(out, "{indent}{k}: {v}");
                }
                (Entry::Field(k, v), Format::Machine) => {
                    let key = k.replace(' ', "_");
                    match current {
                        Some(s) => {
                            let _ = writeln!(out, "{}.{key}={v}", s.replace(' ', "_"));
                        }
                        None => {
                            let _ = writeln!(out, "{key}={v}");
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn pass_fail(holds: bool) -> &'static str {
    if holds {
        "pass"
    } else {
        "fail"
    }
}

pub fn real(x: f64) -> String {
    if x.is_finite() && x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.6}")
    }
}

pub fn list<T: Display>(items: &[T]) -> String {
    if items.is_empty() {
        "{}".into()
    } else {
        format!("{{{}}}", items.iter().map(T::to_string).collect::<Vec<_>>().join(", "))
    }
}

pub fn ratio(r: &BigRational) -> String {
    show_ratio(r)
}

fn stage_log(r: &mut Report, log: &[StageLog]) {
    for s in log {
        let bound = s.blocker_bound.map_or("-".to_string(), real);
        r.field(
            &format!("stage {}", s.stage),
            format!(
                "|B| {} -> {} (bound {bound}), disjoint {} vs threshold {}, {}",
                s.blocker_before,
                s.blocker_after,
                s.disjoint_found,
                real(s.threshold),
                if s.succeeded { "stop" } else { "grow" }
            ),
        );
    }
}

pub fn separator_report(res: &SeparatorResult, family: &[Vec<usize>]) -> Report {
    let mut r = Report::new();
    r.section("separator");
    r.field("n", res.n).field("q", res.q).field("gap", real(res.gap));
    r.field("B", list(&res.blocker));
    r.field("V", list(&res.disjoint));
    r.field("w", res.w);
    r.field("stages", res.stages_run);
    r.section("log");
    stage_log(&mut r, &res.log);
    r.section("checks");
    r.field("k0", real(res.k0()));
    r.check("w >= n/(gq)^q", res.w_lower_bound_holds());
    r.check("|B| <= w/g", res.blocker_bound_holds());
    r.check("disjoint", res.disjoint_holds(family));
    r
}

pub fn bracket_separator_report(res: &BracketSeparatorResult, family: &[Vec<usize>]) -> Report {
    let mut r = Report::new();
    r.section("bracket separator");
    r.field("n", res.n).field("q", res.q).field("c", res.c);
    r.field("a", res.a).field("b", res.b);
    r.field("B", list(&res.blocker));
    r.field("V", list(&res.disjoint));
    r.field("stages", res.stages_run);
    r.section("log");
    stage_log(&mut r, &res.log);
    r.section("checks");
    r.check("c*a <= b <= c*(2c)^a", res.exponents_hold());
    r.field("n/lg^b n", real(res.blocker_limit()));
    r.check("|B| <= n/lg^b n", res.blocker_bound_holds());
    r.field("n/lg^a n", real(res.disjoint_target()));
    r.check("|V| >= n/lg^a n", res.disjoint_bound_holds());
    r.check("n/lg^b n >= 1", res.scale_bound_holds());
    r.check(
        "disjoint",
        crate::separator::reduced_disjoint(family, &res.blocker, &res.disjoint),
    );
    r
}

pub fn stretcher_report(res: &StretcherResult, w: usize) -> Report {
    let mut r = Report::new();
    r.section("stretcher");
    r.field("n", res.n).field("c", real(res.c)).field("w", w);
    r.field("window", res.window);
    r.field("V'", list(&res.v_prime));
    r.field("w'", res.w_prime());
    for (k, p) in res.pairs.iter().enumerate() {
        r.field(
            &format!("pair {k}"),
            format!("v'={} -> {} -> {} ratio {}", p.start, p.first, p.second, real(p.ratio())),
        );
    }
    r.section("checks");
    let guaranteed = StretcherResult::guaranteed_len(w, res.n, res.c);
    r.field("guaranteed w'", guaranteed);
    r.check("w' >= 2 floor(w/(c lg n))", res.w_prime() >= guaranteed);
    r.check("gap inequality", res.gaps_hold());
    r
}

pub fn entropy_sum_report(w: &EntropySumWitness) -> Report {
    let mut r = Report::new();
    r.section("entropy sum");
    r.field("n", w.n).field("p", w.p).field("i", w.i).field("j", w.j);
    r.field("l", w.ell).field("d", w.d).field("c", real(w.c));
    r.field("H(X_p+1..j | X_1..p)", real(w.hypothesis_entropy));
    r.field("required", real(w.hypothesis_required));
    r.field("|A|", &w.good_prefix_count);
    r.field("Pr[Y in A]", ratio(&w.good_prefix_mass));
    if w.prefix_fallback {
        r.field("note", "A too light for a threshold; all prefixes used");
    }
    r.field("t", w.t);
    r.field("Pr[Y in A, sum >= t]", ratio(&w.at_t));
    r.field("Pr[Y in A, sum >= t+1]", ratio(&w.at_next));
    r.field("Pr[Y in A, sum <= t]", ratio(&w.at_or_below_t));
    r.field("s", real(w.s)).field("s'", real(w.s_prime));
    r.field("P_upper", ratio(&w.p_upper));
    r.field("P_lower", ratio(&w.p_lower));
    r.field("P_lower non-strict", ratio(&w.p_lower_nonstrict));
    r.field("P_joint", ratio(&w.p_joint));
    r.field("block threshold", real(w.block_threshold));
    r.field("block tail", ratio(&w.block_tail));
    r.field("uniform block tail", ratio(&w.uniform_block_tail));
    r.field("block TV", real(w.block_tv));
    r.section("checks");
    r.check("hypothesis", w.hypothesis_holds());
    r.check("l >= c d", w.spacing_holds());
    r.check("Pr[Y in A] >= 1/2", w.prefix_mass_holds());
    r.check("t maximal", w.threshold_maximal());
    r.check("Pr[Y in A, sum <= t] >= 1/4", w.below_t_holds());
    r.check("P_upper >= 1/10", w.upper_holds());
    r.check("P_lower >= 1/10", w.lower_holds());
    r.check("P_joint <= 1/1000", w.joint_holds());
    r.check("P_joint <= block tail <= uniform tail + TV", w.joint_chain_holds());
    r.field("strict and non-strict lower differ", w.lower_forms_differ());
    r.check("holds", w.holds());
    r
}

pub fn good_set_report(g: &GoodSetReport) -> Report {
    let mut r = Report::new();
    let kind = match g.kind {
        crate::info::GoodSetKind::Blocks => "blocks",
        crate::info::GoodSetKind::Cells => "cells",
    };
    r.section("good set");
    r.field("mode", kind);
    r.field("G", list(&g.good));
    r.field("|G|", g.good.len());
    r.field("deficiency a", real(g.deficiency));
    r.field("parameter", real(g.parameter));
    r.field(
        "scores",
        list(&g.scores.iter().map(|&s| real(s)).collect::<Vec<_>>()),
    );
    r.field(
        "marginal TV",
        list(&g.marginal_tv.iter().map(|&s| real(s)).collect::<Vec<_>>()),
    );
    if g.kind == crate::info::GoodSetKind::Cells {
        r.field("subsets verified", g.subsets_verified);
    } else {
        r.field("deficiency sum", real(g.deficiency_sum()));
    }
    r.field("size bound", real(g.size_bound));
    r.check("size bound satisfied", g.size_bound_satisfied);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_formats() {
        let mut r = Report::new();
        r.field("status", "pass");
        r.section("sep");
        r.field("w", 3).check("bound ok", false);
        assert_eq!(r.render(Format::Text), "status: pass\n[sep]\n  w: 3\n  bound ok: fail\n");
        assert_eq!(r.render(Format::Machine), "status=pass\nsep.w=3\nsep.bound_ok=fail\n");
        assert_eq!(r.get("sep", "w"), Some("3"));
        assert_eq!(r.get("", "status"), Some("pass"));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(real(4.0), "4");
        assert_eq!(real(0.5), "0.500000");
        assert_eq!(list::<usize>(&[]), "{}");
        assert_eq!(list(&[1, 2]), "{1, 2}");
    }
}
