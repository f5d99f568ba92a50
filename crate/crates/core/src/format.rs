//! Text formats: scheme files, distribution files and index lists.
//!
//! A scheme file is a sequence of `key: value` header lines followed by the
//! encoder, probe and decoder sections:
//!
//! ```text
//! n: 4
//! u: 4
//! q: 1
//! cell_alphabet: 5
//! domain: all_bitstrings
//! encoder: builtin:precomputed_sums
//! probes:
//! 0
//! 1
//! 2
//! 3
//! decoders: builtin:precomputed_sums
//! ```
//!
//! A table encoder is `encoder: table` followed by one `input -> cells` line
//! per domain element. Table decoders are `decoders: table` followed, for each
//! query i, by a `d i:` line and `values -> answer` lines. An empty probe set
//! or value tuple is written `-`. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::info::{Distribution, Tuple};
use crate::reference::{Builtin, SchemeSpecParams, Variant};
use crate::scheme::{CellValue, Decoders, Domain, Encoder, ProbeFamily, Scheme};

fn join<T: ToString>(items: &[T]) -> String {
    if items.is_empty() {
        "-".to_string()
    } else {
        items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
    }
}

fn builtin_ref(b: &Builtin) -> String {
    match b {
        Builtin::TwoLevelRank { block, superblock } => {
            format!("builtin:{} block={block} superblock={superblock}", b.variant().name())
        }
        other => format!("builtin:{}", other.variant().name()),
    }
}

pub fn write_scheme(scheme: &Scheme) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n: {}", scheme.n());
    let _ = writeln!(out, "u: {}", scheme.u());
    let _ = writeln!(out, "q: {}", scheme.q());
    let _ = writeln!(out, "cell_alphabet: {}", scheme.cell_alphabet());
    let _ = writeln!(out, "domain: {}", scheme.domain().name());
    match scheme.encoder() {
        Encoder::Builtin(b) => {
            let _ = writeln!(out, "encoder: {}", builtin_ref(b));
        }
        Encoder::Table(table) => {
            out.push_str("encoder: table\n");
            for (x, cells) in table {
                let _ = writeln!(out, "{x} -> {}", join(cells));
            }
        }
    }
    out.push_str("probes:\n");
    for set in scheme.probes().sets() {
        out.push_str(&join(set));
        out.push('\n');
    }
    match scheme.decoders() {
        Decoders::Builtin(b) => {
            let _ = writeln!(out, "decoders: {}", builtin_ref(b));
        }
        Decoders::Table(tables) => {
            out.push_str("decoders: table\n");
            for (i, table) in tables.iter().enumerate() {
                let _ = writeln!(out, "d {}:", i + 1);
                for (values, answer) in table {
                    let _ = writeln!(out, "{} -> {answer}", join(values));
                }
            }
        }
    }
    out
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Lines { lines, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next_line(&mut self, expecting: &str) -> Result<(usize, &'a str)> {
        let last = self.lines.last().map_or(0, |l| l.0);
        let line = self
            .peek()
            .ok_or_else(|| Error::parse(last + 1, format!("unexpected end of file, expected {expecting}")))?;
        self.pos += 1;
        Ok(line)
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (no, line) = self.next_line(&format!("`{key}:`"))?;
        match line.split_once(':') {
            Some((k, v)) if k.trim() == key => Ok((no, v.trim())),
            _ => Err(Error::parse(no, format!("expected `{key}: ...`, found {line:?}"))),
        }
    }
}

fn number<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {s:?}")))
}

fn number_list<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<Vec<T>> {
    let s = s.trim();
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|t| !t.is_empty())
        .map(|t| number(line, t, what))
        .collect()
}

fn parse_builtin(line: usize, spec: &str) -> Result<Builtin> {
    let rest = spec
        .strip_prefix("builtin:")
        .ok_or_else(|| Error::parse(line, format!("expected `table` or `builtin:<name>`, found {spec:?}")))?;
    let mut words = rest.split_whitespace();
    let name = words.next().unwrap_or("");
    let variant =
        Variant::from_name(name).ok_or_else(|| Error::parse(line, format!("unknown builtin {name:?}")))?;
    let mut params: BTreeMap<&str, usize> = BTreeMap::new();
    for word in words {
        let (k, v) = word
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("expected key=value, found {word:?}")))?;
        if k != "block" && k != "superblock" {
            return Err(Error::parse(line, format!("unknown builtin parameter {k:?}")));
        }
        params.insert(k, number(line, v, k)?);
    }
    match variant {
        Variant::TwoLevelRank => {
            let get = |k: &str| {
                params
                    .get(k)
                    .copied()
                    .ok_or_else(|| Error::parse(line, format!("two_level_rank needs {k}=")))
            };
            Ok(Builtin::TwoLevelRank {
                block: get("block")?,
                superblock: get("superblock")?,
            })
        }
        _ if !params.is_empty() => Err(Error::parse(line, format!("{name} takes no parameters"))),
        Variant::PrecomputedSums => Ok(Builtin::PrecomputedSums),
        Variant::RawIdentity => Ok(Builtin::RawIdentity),
        Variant::BracketTable => Ok(Builtin::BracketTable),
    }
}

fn build_builtin(b: Builtin, n: usize, cell_alphabet: u64) -> Result<Scheme> {
    let (block, superblock) = match b {
        Builtin::TwoLevelRank { block, superblock } => (block, superblock),
        _ => (0, 0),
    };
    SchemeSpecParams {
        n,
        block,
        superblock,
        cell_alphabet,
        variant: b.variant(),
    }
    .build()
}

pub fn parse_scheme(text: &str) -> Result<Scheme> {
    let mut lines = Lines::new(text);
    let (l, v) = lines.field("n")?;
    let n: usize = number(l, v, "n")?;
    let (l, v) = lines.field("u")?;
    let u: usize = number(l, v, "u")?;
    let (l, v) = lines.field("q")?;
    let q: usize = number(l, v, "q")?;
    let (l, v) = lines.field("cell_alphabet")?;
    let cell_alphabet: u64 = number(l, v, "cell_alphabet")?;
    let (l, v) = lines.field("domain")?;
    let domain = Domain::from_name(v).ok_or_else(|| Error::parse(l, format!("unknown domain {v:?}")))?;

    let (enc_line, enc_spec) = lines.field("encoder")?;
    let encoder = if enc_spec == "table" {
        let mut table = BTreeMap::new();
        while let Some((no, line)) = lines.peek() {
            if line.starts_with("probes:") {
                break;
            }
            lines.pos += 1;
            let (x, cells) = line
                .split_once("->")
                .ok_or_else(|| Error::parse(no, format!("expected `input -> cells`, found {line:?}")))?;
            let x: BitVector = x
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(no, e.to_string()))?;
            if table.insert(x, number_list::<CellValue>(no, cells, "cell value")?).is_some() {
                return Err(Error::parse(no, "duplicate encoder entry"));
            }
        }
        Encoder::Table(table)
    } else {
        Encoder::Builtin(parse_builtin(enc_line, enc_spec)?)
    };

    let (l, v) = lines.field("probes")?;
    if !v.is_empty() {
        return Err(Error::parse(l, "probe sets go on the lines after `probes:`"));
    }
    let mut sets = Vec::with_capacity(n);
    for _ in 0..n {
        let (no, line) = lines.next_line("a probe set")?;
        sets.push(number_list(no, line, "cell index")?);
    }

    let (dec_line, dec_spec) = lines.field("decoders")?;
    let decoders = if dec_spec == "table" {
        let mut tables = Vec::with_capacity(n);
        for i in 1..=n {
            let (no, header) = lines.next_line(&format!("`d {i}:`"))?;
            if header != format!("d {i}:") {
                return Err(Error::parse(no, format!("expected `d {i}:`, found {header:?}")));
            }
            let mut table = BTreeMap::new();
            while let Some((no, line)) = lines.peek() {
                if line.starts_with("d ") && line.ends_with(':') {
                    break;
                }
                lines.pos += 1;
                let (values, answer) = line
                    .split_once("->")
                    .ok_or_else(|| Error::parse(no, format!("expected `values -> answer`, found {line:?}")))?;
                let key = number_list::<CellValue>(no, values, "probe value")?;
                if table.insert(key, number(no, answer, "answer")?).is_some() {
                    return Err(Error::parse(no, "duplicate decoder entry"));
                }
            }
            tables.push(table);
        }
        Decoders::Table(tables)
    } else {
        Decoders::Builtin(parse_builtin(dec_line, dec_spec)?)
    };
    if let Some((no, line)) = lines.peek() {
        return Err(Error::parse(no, format!("unexpected trailing content {line:?}")));
    }

    let probes = ProbeFamily::with_bound(sets, u, q)?;
    match (&encoder, &decoders) {
        (Encoder::Builtin(e), Decoders::Builtin(d)) => {
            if e != d {
                return Err(Error::parse(dec_line, "encoder and decoder builtins differ"));
            }
            let built = build_builtin(*e, n, cell_alphabet)?;
            if built.u() != u || built.domain() != domain || built.probes().sets() != probes.sets() {
                return Err(Error::Consistency(format!(
                    "header or probes disagree with builtin {}",
                    e.variant().name()
                )));
            }
            Scheme::new(n, u, cell_alphabet, domain, encoder, probes, decoders)
        }
        (Encoder::Table(_), Decoders::Table(_)) => {
            Scheme::new(n, u, cell_alphabet, domain, encoder, probes, decoders)
        }
        _ => Err(Error::parse(
            dec_line,
            "encoder and decoders must both be tables or both builtin",
        )),
    }
}

/// Parses `a/b`, an integer, or a decimal such as `0.125`, exactly.
pub fn parse_probability(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        return (!b.is_zero()).then(|| BigRational::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if !frac.chars().all(|c| c.is_ascii_digit()) || int.is_empty() && frac.is_empty() {
        return None;
    }
    let int: BigInt = if int.is_empty() { BigInt::zero() } else { int.parse().ok()? };
    let frac_value: BigInt = if frac.is_empty() { BigInt::zero() } else { frac.parse().ok()? };
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(int * &scale + frac_value, scale))
}

fn parse_tuple(s: &str) -> Option<Tuple> {
    if s == "-" {
        Some(Vec::new())
    } else if s.contains(',') {
        s.split(',').map(|t| t.trim().parse().ok()).collect()
    } else {
        s.chars().map(|ch| ch.to_digit(10)).collect()
    }
}

fn show_tuple(t: &[u32]) -> String {
    if t.is_empty() {
        "-".into()
    } else if t.iter().all(|&v| v < 10) {
        t.iter().map(u32::to_string).collect()
    } else {
        t.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }
}

/// Reads `tuple probability` lines. Tuples are digit strings (`0110`) or
/// comma-separated values (`3,0,12`); probabilities are decimals or `a/b`
/// and must sum to exactly 1.
pub fn parse_distribution(text: &str) -> Result<Distribution> {
    let mut entries: Vec<(Tuple, BigRational)> = Vec::new();
    let mut arity = None;
    for (no, line) in Lines::new(text).lines {
        let mut words = line.split_whitespace();
        let (Some(t), Some(p), None) = (words.next(), words.next(), words.next()) else {
            return Err(Error::parse(no, format!("expected `tuple probability`, found {line:?}")));
        };
        let tuple = parse_tuple(t).ok_or_else(|| Error::parse(no, format!("invalid tuple {t:?}")))?;
        let prob = parse_probability(p).ok_or_else(|| Error::parse(no, format!("invalid probability {p:?}")))?;
        match arity {
            None => arity = Some(tuple.len()),
            Some(a) if a != tuple.len() => {
                return Err(Error::parse(no, format!("tuple of length {}, expected {a}", tuple.len())));
            }
            _ => {}
        }
        entries.push((tuple, prob));
    }
    let arity = arity.ok_or_else(|| Error::Domain("distribution file is empty".into()))?;
    Distribution::from_probabilities(arity, entries)
}

pub fn write_distribution(dist: &Distribution) -> String {
    let total = BigInt::from(dist.total());
    let mut out = String::new();
    for (t, w) in dist.entries() {
        let p = BigRational::new(BigInt::from(*w), total.clone());
        let shown = if p.is_one() { "1".to_string() } else { p.to_string() };
        let _ = writeln!(out, "{} {shown}", show_tuple(t));
    }
    out
}

/// Whitespace- or comma-separated integers.
pub fn parse_indices(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (no, line) in Lines::new(text).lines {
        out.extend(number_list::<usize>(no, line, "index")?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{build_bracket_table, build_precomputed_sums, build_raw_identity, build_two_level_rank};

    #[test]
    fn builtin_roundtrip() {
        for scheme in [
            build_precomputed_sums(8, 9).unwrap(),
            build_two_level_rank(16, 4, 8, 17).unwrap(),
            build_raw_identity(10, 8).unwrap(),
            build_bracket_table(6, 7).unwrap(),
        ] {
            let text = write_scheme(&scheme);
            assert_eq!(parse_scheme(&text).unwrap(), scheme, "{text}");
        }
    }

    #[test]
    fn table_roundtrip() {
        let scheme = build_two_level_rank(4, 2, 4, 5).unwrap().to_table().unwrap();
        let text = write_scheme(&scheme);
        assert!(text.contains("encoder: table\n0000 -> "));
        assert_eq!(parse_scheme(&text).unwrap(), scheme);
    }

    #[test]
    fn builtin_text_layout() {
        let text = write_scheme(&build_precomputed_sums(2, 3).unwrap());
        assert_eq!(
            text,
            "n: 2\nu: 2\nq: 1\ncell_alphabet: 3\ndomain: all_bitstrings\n\
             encoder: builtin:precomputed_sums\nprobes:\n0\n1\ndecoders: builtin:precomputed_sums\n"
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "n: 2\nu: 2\nq: 1\ncell_alphabet: 3\ndomain: trees\n";
        assert!(matches!(parse_scheme(bad), Err(Error::Parse { line: 5, .. })));
        let short = "n: 2\nu: 2\nq: 1\ncell_alphabet: 3\ndomain: all_bitstrings\nencoder: builtin:precomputed_sums\nprobes:\n0\n";
        assert!(matches!(parse_scheme(short), Err(Error::Parse { .. })));
        let mismatch = write_scheme(&build_precomputed_sums(2, 3).unwrap()).replace("probes:\n0\n1", "probes:\n1\n0");
        assert!(matches!(parse_scheme(&mismatch), Err(Error::Consistency(_))));
    }

    #[test]
    fn probabilities() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(parse_probability("0.125"), Some(r(1, 8)));
        assert_eq!(parse_probability("3/12"), Some(r(1, 4)));
        assert_eq!(parse_probability("1"), Some(r(1, 1)));
        assert_eq!(parse_probability(".5"), Some(r(1, 2)));
        assert_eq!(parse_probability("1/0"), None);
        assert_eq!(parse_probability("abc"), None);
    }

    #[test]
    fn distribution_roundtrip() {
        let d = parse_distribution("# two bits\n00 0.5\n01 1/4\n11 0.25\n").unwrap();
        assert_eq!(d.arity(), 2);
        assert_eq!(d.weight(&[0, 0]), 2);
        assert_eq!(parse_distribution(&write_distribution(&d)).unwrap(), d);
        let wide = parse_distribution("12,0 1/2\n3,4 1/2\n").unwrap();
        assert_eq!(wide.weight(&[12, 0]), 1);
        assert_eq!(parse_distribution(&write_distribution(&wide)).unwrap(), wide);
        assert!(parse_distribution("0 0.5\n").is_err());
        assert!(parse_distribution("0 0.5\n11 0.5\n").is_err());
    }

    #[test]
    fn indices() {
        assert_eq!(parse_indices("1 4, 9\n12\n").unwrap(), vec![1, 4, 9, 12]);
        assert!(parse_indices("1 x").is_err());
    }
}
