//! Single-photon detection patterns and their enumeration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Occupation flags `n_s ∈ {0, 1}` over the output modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectionPattern {
    flags: Vec<bool>,
    n: usize,
}

impl DetectionPattern {
    pub fn new(flags: Vec<bool>) -> Self {
        let n = flags.iter().filter(|&&f| f).count();
        Self { flags, n }
    }

    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        if let Some(&c) = counts.iter().find(|&&c| c > 1) {
            return Err(Error::Parse(format!(
                "detection patterns are restricted to 0/1 occupations, got {c}"
            )));
        }
        Ok(Self::new(counts.iter().map(|&c| c == 1).collect()))
    }

    pub fn zeros(modes: usize) -> Self {
        Self::new(vec![false; modes])
    }

    pub fn ones(modes: usize) -> Self {
        Self::new(vec![true; modes])
    }

    /// Pattern with ones at the given (not necessarily sorted) modes.
    pub fn from_modes(modes: usize, detected: &[usize]) -> Result<Self> {
        let mut flags = vec![false; modes];
        for &s in detected {
            if s >= modes {
                return Err(Error::Parse(format!("mode {s} out of range for {modes} modes")));
            }
            flags[s] = true;
        }
        Ok(Self::new(flags))
    }

    pub fn modes(&self) -> usize {
        self.flags.len()
    }

    /// Number of detected photons `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Detected modes in ascending order.
    pub fn detected(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(s, &f)| f.then_some(s))
            .collect()
    }

    pub fn counts(&self) -> Vec<u32> {
        self.flags.iter().map(|&f| f as u32).collect()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::new(perm.iter().map(|&p| self.flags[p]).collect())
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.flags {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Accepts `"0101"` or `"0,1,0,1"`.
impl FromStr for DetectionPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let tokens: Vec<&str> = if s.contains(',') {
            s.split(',').map(str::trim).collect()
        } else {
            s.split("").filter(|t| !t.is_empty()).collect()
        };
        let flags = tokens
            .iter()
            .map(|t| match *t {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::Parse(format!("invalid pattern entry {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(flags))
    }
}

/// Streams every pattern with `N <= n_max` over `m` modes, ordered by `N` and
/// then lexicographically by the set of detected modes.
pub fn enumerate_patterns(m: usize, n_max: usize) -> Result<PatternIter> {
    if n_max > m {
        return Err(Error::InvalidState(format!("n_max = {n_max} exceeds mode count {m}")));
    }
    Ok(PatternIter {
        m,
        n_max,
        combo: Vec::new(),
        done: false,
    })
}

pub struct PatternIter {
    m: usize,
    n_max: usize,
    combo: Vec<usize>,
    done: bool,
}

impl PatternIter {
    fn advance(&mut self) {
        let (m, k) = (self.m, self.combo.len());
        // rightmost index that can still move
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.combo[i] < m - k + i {
                self.combo[i] += 1;
                for j in i + 1..k {
                    self.combo[j] = self.combo[j - 1] + 1;
                }
                return;
            }
        }
        let next = k + 1;
        if next > self.n_max {
            self.done = true;
        } else {
            self.combo = (0..next).collect();
        }
    }
}

impl Iterator for PatternIter {
    type Item = DetectionPattern;

    fn next(&mut self) -> Option<DetectionPattern> {
        if self.done {
            return None;
        }
        let mut flags = vec![false; self.m];
        for &s in &self.combo {
            flags[s] = true;
        }
        let out = DetectionPattern::new(flags);
        self.advance();
        Some(out)
    }
}
