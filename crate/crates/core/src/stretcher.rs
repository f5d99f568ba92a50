//! Stretcher extraction: from ascending indices v_1 < ... < v_w in [1, n],
//! pick pairs (v'_{2k+1}, v'_{2k+2}) such that the interval ending at
//! v'_{2k+1} (starting at v'_{2k}, with v'_0 = 0) is at least c times longer
//! than the interval that follows it.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StretchPair {
    /// v'_{2k}, the end of the previous pair (0 for the first).
    pub start: usize,
    pub first: usize,
    pub second: usize,
}

impl StretchPair {
    /// (v'_{2k+1} - v'_{2k}) / (v'_{2k+2} - v'_{2k+1}).
    pub fn ratio(&self) -> f64 {
        (self.first - self.start) as f64 / (self.second - self.first) as f64
    }

    pub fn satisfies(&self, c: f64) -> bool {
        (self.first - self.start) as f64 >= c * (self.second - self.first) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StretcherResult {
    pub v_prime: Vec<usize>,
    pub pairs: Vec<StretchPair>,
    /// Window length t = floor(c lg n).
    pub window: usize,
    pub c: f64,
    pub n: usize,
}

impl StretcherResult {
    pub fn w_prime(&self) -> usize {
        self.v_prime.len()
    }

    /// 2 floor(w / (c lg n)).
    pub fn guaranteed_len(w: usize, n: usize, c: f64) -> usize {
        2 * (w as f64 / (c * (n as f64).log2())).floor() as usize
    }

    pub fn gaps_hold(&self) -> bool {
        self.pairs.iter().all(|p| p.satisfies(self.c))
    }
}

pub fn find_stretcher(indices: &[usize], n: usize, c: f64) -> Result<StretcherResult> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(Error::Parameter(format!("c must be a finite value > 1, got {c}")));
    }
    if n < 2 {
        return Err(Error::Parameter(format!("n must be at least 2, got {n}")));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("indices must be strictly ascending".into()));
    }
    if indices.first().is_some_and(|&v| v == 0) || indices.last().is_some_and(|&v| v > n) {
        return Err(Error::Parameter(format!("indices must lie in [1, {n}]")));
    }

    let w = indices.len();
    let window = (c * (n as f64).log2()).floor() as usize;
    // v_0 = 0 followed by the input.
    let v = |k: usize| if k == 0 { 0 } else { indices[k - 1] };

    let mut pairs = Vec::new();
    let mut s = 0;
    while window >= 1 && s + window <= w {
        let step =
            (1..window).find(|&i| (v(s + i) - v(s)) as f64 >= c * (v(s + i + 1) - v(s + i)) as f64);
        let Some(i) = step else {
            return Err(Error::Stuck {
                start: s,
                value: v(s),
                n,
                c,
            });
        };
        pairs.push(StretchPair {
            start: v(s),
            first: v(s + i),
            second: v(s + i + 1),
        });
        s += i + 1;
    }
    Ok(StretcherResult {
        v_prime: pairs.iter().flat_map(|p| [p.first, p.second]).collect(),
        pairs,
        window,
        c,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_indices_gives_empty() {
        let r = find_stretcher(&[3, 9, 12], 1 << 10, 2.0).unwrap();
        assert_eq!(r.w_prime(), 0);
        assert_eq!(r.window, 20);
    }

    #[test]
    fn consecutive_indices() {
        let idx: Vec<usize> = (1..=64).collect();
        let r = find_stretcher(&idx, 64, 2.0).unwrap();
        assert_eq!(r.window, 12);
        // From v_0 = 0: i = 1 fails (1 < 2), i = 2 works (2 >= 2).
        assert_eq!(&r.v_prime[..2], &[2, 3]);
        assert!(r.gaps_hold());
        assert!(r.w_prime() >= StretcherResult::guaranteed_len(64, 64, 2.0));
    }

    #[test]
    fn doubling_gaps() {
        let idx: Vec<usize> = (0..16).map(|k| 1usize << k).collect();
        let r = find_stretcher(&idx, 1 << 16, 2.0).unwrap();
        assert!(r.gaps_hold());
        // 16 indices against a window of c lg n = 32: nothing is guaranteed.
        assert_eq!(StretcherResult::guaranteed_len(16, 1 << 16, 2.0), 0);
        assert_eq!(r.w_prime(), 2 * r.pairs.len());
    }

    #[test]
    fn stuck_window_is_reported() {
        // t = floor(1.05 * 4) = 4 and each gap outgrows everything before it.
        let idx = [1, 2, 4, 8];
        match find_stretcher(&idx, 16, 1.05) {
            Err(Error::Stuck { start: 0, .. }) => {}
            other => panic!("expected stuck window, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(find_stretcher(&[2, 2], 8, 2.0).is_err());
        assert!(find_stretcher(&[0, 2], 8, 2.0).is_err());
        assert!(find_stretcher(&[2, 9], 8, 2.0).is_err());
        assert!(find_stretcher(&[2, 3], 8, 1.0).is_err());
    }
}
