//! Exact guesswork objects for a fixed word length `k`.
//!
//! A [`GuessworkTable`] lists the distinct word probabilities in decreasing
//! order together with how many words share each one. Because an optimal
//! guesser queries words in that order, level `j` occupies a contiguous block
//! of ranks and every guesswork quantity (pmf, moments, `E[log G]`, entropy)
//! follows from the levels alone, independent of how ties are broken.
//!
//! Tables come from brute-force enumeration of all `m^k` words (any source)
//! or, for i.i.d. letters, from letter-count type classes, which reaches
//! `k = 100` and beyond.

mod ranksum;

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, log_sum_exp};
use crate::sources::{checked_word_count, IidSource, SourceSpec};

use ranksum::RankRange;

/// Absolute log-domain tolerance below which two word probabilities are the
/// same level.
pub const LEVEL_TOL: f64 = 1e-12;
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;
pub const DEFAULT_COMPOSITION_CAP: u64 = 10_000_000;
/// Largest `k` for which type-class multiplicities are cross-checked with
/// exact big-integer arithmetic.
pub const EXACT_MULTINOMIAL_MAX_K: usize = 30;

/// A non-negative integer that may be too large for machine integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Count {
    /// Natural log of the count (`-inf` for zero).
    pub log: f64,
    /// The exact value when known and representable.
    pub exact: Option<u128>,
}

impl Count {
    pub const ZERO: Count = Count {
        log: f64::NEG_INFINITY,
        exact: Some(0),
    };

    pub fn exact(n: u128) -> Self {
        Self {
            log: (n as f64).ln(),
            exact: Some(n),
        }
    }

    pub fn from_log(log: f64) -> Self {
        Self { log, exact: None }
    }

    /// The value as a float (exact when `exact` is set and below 2^53).
    pub fn as_f64(&self) -> f64 {
        match self.exact {
            Some(n) => n as f64,
            None => self.log.exp(),
        }
    }

    /// Exact value when it is small enough to be an exact `f64`.
    fn small_f64(&self) -> Option<f64> {
        const EXACT_F64: u128 = 1 << 53;
        match self.exact {
            Some(n) if n <= EXACT_F64 => Some(n as f64),
            Some(_) => None,
            None if self.log < 30.0 => Some(self.log.exp().round()),
            None => None,
        }
    }

    /// Decimal rendering: exact digits when known, otherwise scientific.
    pub fn display(&self) -> String {
        match self.exact {
            Some(n) => n.to_string(),
            None => {
                let log10 = self.log / std::f64::consts::LN_10;
                let exponent = log10.floor();
                let mantissa = 10f64.powf(log10 - exponent);
                format!("{mantissa:.15}e{exponent}")
            }
        }
    }
}

impl std::ops::Add for Count {
    type Output = Count;

    /// Exact part is dropped on overflow.
    fn add(self, other: Count) -> Count {
        Count {
            log: log_add_exp(self.log, other.log),
            exact: match (self.exact, other.exact) {
                (Some(a), Some(b)) => a.checked_add(b),
                _ => None,
            },
        }
    }
}

/// One probability level: `count` words each of probability `exp(log_prob)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub log_prob: f64,
    pub count: Count,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessworkTable {
    k: usize,
    levels: Vec<Level>,
    /// Inclusive last rank of each level.
    rank_ends: Vec<Count>,
    zero_count: Count,
    total_words: Count,
    compositions: Option<usize>,
}

/// `k^-1 log E[G(W_k)^alpha]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub k: usize,
    pub alpha: f64,
    pub scaled_log_moment: f64,
}

impl GuessworkTable {
    /// Builds a table from `(log_prob, count)` pairs in any order, merging
    /// probabilities within [`LEVEL_TOL`]. Zero-probability entries are
    /// tallied separately.
    pub fn from_entries(k: usize, mut entries: Vec<(f64, Count)>) -> Result<Self> {
        if entries.iter().any(|(lp, _)| lp.is_nan() || *lp > LEVEL_TOL) {
            return Err(Error::Numerical("word log-probability is NaN or positive".into()));
        }
        // descending, -inf last; stable so equal keys keep generation order
        entries.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut levels: Vec<Level> = Vec::new();
        let mut zero_count = Count::ZERO;
        for (log_prob, count) in entries {
            if log_prob == f64::NEG_INFINITY {
                zero_count = zero_count + count;
                continue;
            }
            match levels.last_mut() {
                Some(level) if level.log_prob - log_prob <= LEVEL_TOL => {
                    level.count = level.count + count;
                }
                _ => levels.push(Level { log_prob, count }),
            }
        }
        if levels.is_empty() {
            return Err(Error::Numerical("table has no positive-probability word".into()));
        }
        let mut rank_ends = Vec::with_capacity(levels.len());
        let mut running = Count::ZERO;
        for level in &levels {
            running = running + level.count;
            rank_ends.push(running);
        }
        Ok(Self {
            k,
            levels,
            rank_ends,
            zero_count,
            total_words: running,
            compositions: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Words of probability zero (excluded from the levels).
    pub fn zero_count(&self) -> Count {
        self.zero_count
    }

    /// Words of positive probability.
    pub fn total_words(&self) -> Count {
        self.total_words
    }

    /// Number of type classes generated before merging (type-class path only).
    pub fn compositions(&self) -> Option<usize> {
        self.compositions
    }

    /// First rank of level `j` (1-based ranks).
    pub fn rank_start(&self, j: usize) -> Count {
        if j == 0 {
            Count::exact(1)
        } else {
            self.rank_ends[j - 1] + Count::exact(1)
        }
    }

    pub fn rank_end(&self, j: usize) -> Count {
        self.rank_ends[j]
    }

    /// `log sum_j count_j * p_j`, which is 0 for a normalised table.
    pub fn log_total_probability(&self) -> f64 {
        log_sum_exp(self.levels.iter().map(|l| l.log_prob + l.count.log))
    }

    fn rank_range(&self, j: usize) -> RankRange {
        let start = self.rank_start(j);
        let count = self.levels[j].count;
        RankRange {
            log_start: start.log,
            log_count: count.log,
            start: start.small_f64(),
            count: count.small_f64(),
        }
    }

    /// `log P(G(W_k) = n)` for an integer rank `n >= 1`.
    pub fn guesswork_pmf(&self, n: u128) -> Result<f64> {
        if n == 0 {
            return Err(Error::RankOutOfRange("0".into()));
        }
        if let Some(total) = self.total_words.exact {
            if n > total {
                return Err(Error::RankOutOfRange(format!("{n} > {total}")));
            }
            if self.rank_ends.iter().all(|e| e.exact.is_some()) {
                let j = self.rank_ends.partition_point(|e| e.exact.unwrap() < n);
                return Ok(self.levels[j].log_prob);
            }
        }
        self.guesswork_pmf_log_rank((n as f64).ln())
    }

    /// `log P(G(W_k) = n)` with the rank given as `log n`, for ranks too large
    /// for machine integers.
    pub fn guesswork_pmf_log_rank(&self, log_n: f64) -> Result<f64> {
        if !(log_n >= 0.0) || log_n > self.total_words.log + LEVEL_TOL {
            return Err(Error::RankOutOfRange(format!("log n = {log_n}")));
        }
        let j = self
            .rank_ends
            .partition_point(|e| e.log < log_n - LEVEL_TOL)
            .min(self.levels.len() - 1);
        Ok(self.levels[j].log_prob)
    }

    /// `k^-1 log E[G(W_k)^alpha]`, exactly 0 at `alpha = 0`.
    pub fn scaled_log_moment(&self, alpha: f64) -> MomentReport {
        let scaled_log_moment = if alpha == 0.0 {
            0.0
        } else {
            let log_moment = log_sum_exp(
                (0..self.levels.len())
                    .map(|j| self.levels[j].log_prob + ranksum::log_power_sum(&self.rank_range(j), alpha)),
            );
            log_moment / self.k as f64
        };
        MomentReport {
            k: self.k,
            alpha,
            scaled_log_moment,
        }
    }

    /// `k^-1 E[log G(W_k)]`.
    pub fn expected_log_guesswork(&self) -> f64 {
        let total: f64 = (0..self.levels.len())
            .map(|j| {
                let level = &self.levels[j];
                let mass = (level.log_prob + level.count.log).exp();
                mass * ranksum::mean_log_rank(&self.rank_range(j))
            })
            .sum();
        total / self.k as f64
    }

    /// `k^-1 H(W_k)` in nats.
    pub fn shannon_entropy(&self) -> f64 {
        let h: f64 = self
            .levels
            .iter()
            .map(|l| -(l.log_prob + l.count.log).exp() * l.log_prob)
            .sum();
        h / self.k as f64
    }

    /// Number of words of maximal probability.
    pub fn empirical_turn_count(&self) -> Count {
        self.levels[0].count
    }

    /// CSV with columns `rank_start,rank_end,log_prob,log_count`. Log
    /// columns are divided by `log_scale` (1 for nats, ln 2 for bits).
    pub fn to_csv(&self, log_scale: f64) -> String {
        let mut out = String::from("rank_start,rank_end,log_prob,log_count\n");
        for (j, level) in self.levels.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.rank_start(j).display(),
                self.rank_end(j).display(),
                fmt_float(level.log_prob / log_scale),
                fmt_float(level.count.log / log_scale),
            );
        }
        out
    }
}

pub(crate) fn fmt_float(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.15e}")
    }
}

/// Exact table by enumerating all `m^k` words.
pub fn enumerate_table(source: &SourceSpec, k: usize, cap: u64) -> Result<GuessworkTable> {
    let m = source.alphabet().size();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if let Some(fixed) = source.fixed_length() {
        if fixed != k {
            return Err(Error::LengthMismatch {
                expected: fixed,
                got: k,
            });
        }
    }
    let total = checked_word_count(m, k).filter(|&n| n as u64 <= cap).ok_or(Error::CapExceeded {
        what: "word count m^k",
        needed: (m as f64).powi(k as i32),
        cap,
        hint: "use the type-class path for i.i.d. sources or raise --cap",
    })?;
    let values = all_word_log_probs(source, k, total);
    let mut entries: Vec<(f64, Count)> = Vec::new();
    let mut sorted = values;
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    // pre-group identical bit patterns to keep the entry list short
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        entries.push((v, Count::exact((j - i) as u128)));
        i = j;
    }
    GuessworkTable::from_entries(k, entries)
}

fn all_word_log_probs(source: &SourceSpec, k: usize, total: usize) -> Vec<f64> {
    let m = source.alphabet().size();
    if let SourceSpec::Explicit(s) = source {
        return s.word_log_probs().to_vec();
    }
    let first = |l: usize| match source {
        SourceSpec::Iid(s) => s.letter_log_probs()[l],
        SourceSpec::Markov(s) => s.initial_log_probs()[l],
        SourceSpec::Explicit(_) => unreachable!(),
    };
    let step = |prev: usize, next: usize| match source {
        SourceSpec::Iid(s) => s.letter_log_probs()[next],
        SourceSpec::Markov(s) => s.transition_log_prob(prev, next),
        SourceSpec::Explicit(_) => unreachable!(),
    };
    let mut letters = vec![0usize; k];
    let mut prefix = vec![0.0f64; k];
    let fill = |from: usize, letters: &[usize], prefix: &mut [f64]| {
        for pos in from..k {
            prefix[pos] = if pos == 0 {
                first(letters[0])
            } else {
                prefix[pos - 1] + step(letters[pos - 1], letters[pos])
            };
        }
    };
    fill(0, &letters, &mut prefix);
    let mut out = Vec::with_capacity(total);
    loop {
        out.push(prefix[k - 1]);
        // odometer increment
        let Some(pos) = (0..k).rev().find(|&p| letters[p] + 1 < m) else {
            break;
        };
        letters[pos] += 1;
        for l in letters.iter_mut().skip(pos + 1) {
            *l = 0;
        }
        fill(pos, &letters, &mut prefix);
    }
    out
}

/// Exact table for i.i.d. letters from letter-count type classes: every
/// composition `(c_1..c_m)` of `k` contributes probability
/// `prod p_i^c_i` with multiplicity `k! / prod c_i!`.
pub fn typeclass_table(source: &IidSource, k: usize, cap: u64) -> Result<GuessworkTable> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let m = source.alphabet().size();
    let classes = ln_binomial(k + m - 1, m - 1).exp();
    if classes > cap as f64 * (1.0 + 1e-9) {
        return Err(Error::CapExceeded {
            what: "composition count C(k+m-1, m-1)",
            needed: classes.round(),
            cap,
            hint: "raise --cap or lower k",
        });
    }
    let lp = source.letter_log_probs();
    let ln_fact = log_factorials(k);
    let exact_check = k <= EXACT_MULTINOMIAL_MAX_K;
    let big_fact: Vec<BigUint> = if exact_check {
        let mut f = vec![BigUint::one()];
        for i in 1..=k {
            let next = &f[i - 1] * BigUint::from(i);
            f.push(next);
        }
        f
    } else {
        Vec::new()
    };

    let mut entries: Vec<(f64, Count)> = Vec::with_capacity(classes.round() as usize);
    let mut comp = vec![0usize; m];
    let mut err: Option<Error> = None;
    for_each_composition(k, &mut comp, 0, &mut |c: &[usize]| {
        if err.is_some() {
            return;
        }
        let log_prob: f64 = c
            .iter()
            .zip(lp)
            .filter(|(&ci, _)| ci > 0)
            .map(|(&ci, &l)| ci as f64 * l)
            .sum();
        let log_count = ln_fact[k] - c.iter().map(|&ci| ln_fact[ci]).sum::<f64>();
        let exact = if exact_check {
            let denom = c.iter().fold(BigUint::one(), |acc, &ci| acc * &big_fact[ci]);
            let value = &big_fact[k] / denom;
            let as_f64 = value.to_f64().unwrap_or(f64::INFINITY);
            if (as_f64.ln() - log_count).abs() > 1e-10 * log_count.abs().max(1.0) {
                err = Some(Error::Numerical(format!(
                    "multinomial cross-check failed for {c:?}: ln exact = {}, log-factorial = {log_count}",
                    as_f64.ln()
                )));
            }
            value.to_u128()
        } else {
            None
        };
        let count = match exact {
            Some(n) => Count { log: log_count, exact: Some(n) },
            None => Count::from_log(log_count),
        };
        entries.push((log_prob, count));
    });
    if let Some(e) = err {
        return Err(e);
    }
    let n = entries.len();
    let mut table = GuessworkTable::from_entries(k, entries)?;
    table.compositions = Some(n);
    Ok(table)
}

/// Table by the fastest exact path: type classes for i.i.d. sources,
/// enumeration otherwise.
pub fn exact_table(source: &SourceSpec, k: usize, cap: u64) -> Result<GuessworkTable> {
    match source {
        SourceSpec::Iid(s) => typeclass_table(s, k, cap),
        _ => enumerate_table(source, k, cap),
    }
}

/// `k^-1 H(W_k)` in nats, via the exact table.
pub fn shannon_entropy_exact(source: &SourceSpec, k: usize, cap: u64) -> Result<f64> {
    Ok(exact_table(source, k, cap)?.shannon_entropy())
}

fn for_each_composition<F: FnMut(&[usize])>(remaining: usize, comp: &mut [usize], pos: usize, f: &mut F) {
    let m = comp.len();
    if pos == m - 1 {
        comp[pos] = remaining;
        f(comp);
        return;
    }
    for c in (0..=remaining).rev() {
        comp[pos] = c;
        for_each_composition(remaining - c, comp, pos + 1, f);
    }
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0f64;
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}
