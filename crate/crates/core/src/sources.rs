//! Word-probability sources over a finite alphabet `{1, ..., m}`.
//!
//! Three source classes are supported: words of i.i.d. letters, words whose
//! letters follow a Markov chain, and explicit probability tables for a single
//! word length. All probabilities are natural logarithms; `-inf` is zero.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;

const LETTER_SUM_TOL: f64 = 1e-12;
const EXPLICIT_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSource(vec![Violation::EmptyAlphabet]));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Natural log of the alphabet size, the upper end of `k^-1 log G`.
    pub fn log_size(&self) -> f64 {
        (self.size as f64).ln()
    }
}

/// A word of letters in `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>, alphabet: Alphabet) -> Result<Self> {
        for (position, &letter) in letters.iter().enumerate() {
            if letter == 0 || letter > alphabet.size() {
                return Err(Error::LetterOutOfRange {
                    position,
                    letter,
                    size: alphabet.size(),
                });
            }
        }
        Ok(Self(letters))
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of the word in lexicographic order of `A^k`, starting at 0.
    pub fn lex_index(&self, alphabet: Alphabet) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &l| acc * alphabet.size() + (l - 1))
    }

    /// Inverse of [`Word::lex_index`].
    pub fn from_lex_index(mut index: usize, k: usize, alphabet: Alphabet) -> Self {
        let m = alphabet.size();
        let mut letters = vec![1; k];
        for slot in letters.iter_mut().rev() {
            *slot = index % m + 1;
            index /= m;
        }
        Self(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.0.iter().any(|&l| l > 9) { "," } else { "" };
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(sep))
    }
}

/// A broken source invariant, naming the offending index or value.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyAlphabet,
    Length {
        what: String,
        expected: usize,
        got: usize,
    },
    NotAProbability {
        what: String,
        index: usize,
        value: f64,
    },
    SumToOne {
        what: String,
        sum: f64,
    },
    NoPositiveEntry {
        what: String,
    },
    NotIrreducible {
        unreachable: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAlphabet => write!(f, "alphabet must have at least one letter"),
            Violation::Length {
                what,
                expected,
                got,
            } => write!(f, "{what}: expected {expected} entries, got {got}"),
            Violation::NotAProbability { what, index, value } => {
                write!(f, "{what}[{index}] = {value} is not a probability")
            }
            Violation::SumToOne { what, sum } => {
                write!(f, "sum-to-one: sum of {what} is {sum}, not 1")
            }
            Violation::NoPositiveEntry { what } => {
                write!(f, "{what} has no positive-probability entry")
            }
            Violation::NotIrreducible { unreachable } => {
                let states: Vec<String> = unreachable.iter().map(|s| (s + 1).to_string()).collect();
                write!(
                    f,
                    "irreducibility: states {} are not mutually reachable with state 1",
                    states.join(",")
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IidSource {
    alphabet: Alphabet,
    letter_log_probs: Vec<f64>,
}

impl IidSource {
    /// Builds from linear letter probabilities.
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        Self::from_log_probs(probs.iter().map(|p| p.ln()).collect())
    }

    pub fn from_log_probs(letter_log_probs: Vec<f64>) -> Result<Self> {
        let source = Self::new_unchecked(letter_log_probs)?;
        let violations = source.violations();
        if violations.is_empty() {
            Ok(source)
        } else {
            Err(Error::InvalidSource(violations))
        }
    }

    /// Builds without checking the distribution; see [`SourceSpec::validate`].
    pub fn new_unchecked(letter_log_probs: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(letter_log_probs.len())?;
        Ok(Self {
            alphabet,
            letter_log_probs,
        })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        let lp = -(m as f64).ln();
        Self::from_log_probs(vec![lp; m])
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn letter_log_probs(&self) -> &[f64] {
        &self.letter_log_probs
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_distribution("letter probabilities", &self.letter_log_probs, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSource {
    alphabet: Alphabet,
    transition_log_probs: Vec<Vec<f64>>,
    initial_log_probs: Vec<f64>,
}

impl MarkovSource {
    /// Builds from a row-stochastic transition matrix and an initial distribution.
    pub fn from_probs(transition: &[Vec<f64>], initial: &[f64]) -> Result<Self> {
        let source = Self::new_unchecked(
            transition
                .iter()
                .map(|row| row.iter().map(|p| p.ln()).collect())
                .collect(),
            initial.iter().map(|p| p.ln()).collect(),
        )?;
        let violations = source.violations();
        if violations.is_empty() {
            Ok(source)
        } else {
            Err(Error::InvalidSource(violations))
        }
    }

    /// As [`MarkovSource::from_probs`] with a uniform initial distribution.
    pub fn with_uniform_initial(transition: &[Vec<f64>]) -> Result<Self> {
        let m = transition.len();
        Self::from_probs(transition, &vec![1.0 / m as f64; m])
    }

    pub fn new_unchecked(
        transition_log_probs: Vec<Vec<f64>>,
        initial_log_probs: Vec<f64>,
    ) -> Result<Self> {
        let alphabet = Alphabet::new(transition_log_probs.len())?;
        Ok(Self {
            alphabet,
            transition_log_probs,
            initial_log_probs,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn transition_log_probs(&self) -> &[Vec<f64>] {
        &self.transition_log_probs
    }

    /// Log-probability of moving from letter `from` to letter `to` (0-based).
    pub fn transition_log_prob(&self, from: usize, to: usize) -> f64 {
        self.transition_log_probs[from][to]
    }

    pub fn initial_log_probs(&self) -> &[f64] {
        &self.initial_log_probs
    }

    fn violations(&self) -> Vec<Violation> {
        let m = self.alphabet.size();
        let mut out = Vec::new();
        for (i, row) in self.transition_log_probs.iter().enumerate() {
            let what = format!("transition row {}", i + 1);
            if row.len() != m {
                out.push(Violation::Length {
                    what,
                    expected: m,
                    got: row.len(),
                });
                continue;
            }
            check_distribution(&what, row, &mut out);
        }
        if self.initial_log_probs.len() != m {
            out.push(Violation::Length {
                what: "initial distribution".into(),
                expected: m,
                got: self.initial_log_probs.len(),
            });
        } else {
            check_distribution("initial distribution", &self.initial_log_probs, &mut out);
        }
        if out.is_empty() {
            let unreachable = not_strongly_connected(&self.transition_log_probs);
            if !unreachable.is_empty() {
                out.push(Violation::NotIrreducible { unreachable });
            }
        }
        out
    }
}

/// An explicit probability table over all words of one length `k`, stored in
/// lexicographic word order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSource {
    word_length: usize,
    alphabet: Alphabet,
    word_log_probs: Vec<f64>,
}

impl ExplicitSource {
    pub fn from_log_probs(alphabet: Alphabet, k: usize, word_log_probs: Vec<f64>) -> Result<Self> {
        let source = Self::new_unchecked(alphabet, k, word_log_probs)?;
        let violations = source.violations();
        if violations.is_empty() {
            Ok(source)
        } else {
            Err(Error::InvalidSource(violations))
        }
    }

    pub fn new_unchecked(alphabet: Alphabet, k: usize, word_log_probs: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("word length must be at least 1".into()));
        }
        Ok(Self {
            word_length: k,
            alphabet,
            word_log_probs,
        })
    }

    pub fn word_length(&self) -> usize {
        self.word_length
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Log-probabilities of every word in lexicographic order.
    pub fn word_log_probs(&self) -> &[f64] {
        &self.word_log_probs
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let expected = checked_word_count(self.alphabet.size(), self.word_length);
        if expected != Some(self.word_log_probs.len()) {
            out.push(Violation::Length {
                what: "word table".into(),
                expected: expected.unwrap_or(usize::MAX),
                got: self.word_log_probs.len(),
            });
            return out;
        }
        check_entries("word table", &self.word_log_probs, &mut out);
        let total = log_sum_exp(self.word_log_probs.iter().copied()).exp();
        if (total - 1.0).abs() > EXPLICIT_SUM_TOL {
            out.push(Violation::SumToOne {
                what: "word table".into(),
                sum: total,
            });
        }
        out
    }
}

/// Any supported word-probability model.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Iid(IidSource),
    Markov(MarkovSource),
    Explicit(ExplicitSource),
}

impl From<IidSource> for SourceSpec {
    fn from(s: IidSource) -> Self {
        SourceSpec::Iid(s)
    }
}

impl From<MarkovSource> for SourceSpec {
    fn from(s: MarkovSource) -> Self {
        SourceSpec::Markov(s)
    }
}

impl From<ExplicitSource> for SourceSpec {
    fn from(s: ExplicitSource) -> Self {
        SourceSpec::Explicit(s)
    }
}

impl SourceSpec {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            SourceSpec::Iid(s) => s.alphabet,
            SourceSpec::Markov(s) => s.alphabet,
            SourceSpec::Explicit(s) => s.alphabet,
        }
    }

    /// The single word length an explicit table supports; `None` for sources
    /// that define every length.
    pub fn fixed_length(&self) -> Option<usize> {
        match self {
            SourceSpec::Explicit(s) => Some(s.word_length),
            _ => None,
        }
    }

    /// All invariant violations; empty iff the source is valid.
    pub fn validate(&self) -> Vec<Violation> {
        match self {
            SourceSpec::Iid(s) => s.violations(),
            SourceSpec::Markov(s) => s.violations(),
            SourceSpec::Explicit(s) => s.violations(),
        }
    }

    /// Natural log of `P(W_k = w)` with `k = w.len()`.
    pub fn word_log_prob(&self, word: &Word) -> Result<f64> {
        let alphabet = self.alphabet();
        if word.is_empty() {
            return Err(Error::LengthMismatch {
                expected: self.fixed_length().unwrap_or(1),
                got: 0,
            });
        }
        for (position, &letter) in word.letters().iter().enumerate() {
            if letter == 0 || letter > alphabet.size() {
                return Err(Error::LetterOutOfRange {
                    position,
                    letter,
                    size: alphabet.size(),
                });
            }
        }
        let letters = word.letters();
        Ok(match self {
            SourceSpec::Iid(s) => letters
                .iter()
                .map(|&l| s.letter_log_probs[l - 1])
                .sum(),
            SourceSpec::Markov(s) => {
                let first = s.initial_log_probs[letters[0] - 1];
                letters.windows(2).fold(first, |acc, pair| {
                    acc + s.transition_log_probs[pair[0] - 1][pair[1] - 1]
                })
            }
            SourceSpec::Explicit(s) => {
                if letters.len() != s.word_length {
                    return Err(Error::LengthMismatch {
                        expected: s.word_length,
                        got: letters.len(),
                    });
                }
                s.word_log_probs[word.lex_index(alphabet)]
            }
        })
    }
}

/// Builds the near-uniform single-length family in which word 1 (the
/// all-ones word) has probability `m^-k (1 + eps)` and every other word
/// `m^-k (1 - eps / (m^k - 1))`.
pub fn make_counterexample_source(m: usize, k: usize, eps: f64) -> Result<ExplicitSource> {
    let alphabet = Alphabet::new(m)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let count = checked_word_count(m, k)
        .filter(|&n| n <= 1 << 40)
        .ok_or_else(|| Error::InvalidParameter(format!("m^k = {m}^{k} is too large")))?;
    if count < 2 {
        return Err(Error::InvalidParameter(
            "counterexample needs at least two words (m^k >= 2)".into(),
        ));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be non-negative")));
    }
    let others = count as f64 - 1.0;
    if eps >= others {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} makes the other words' probability non-positive (need eps < m^k - 1 = {others})"
        )));
    }
    let base = -(k as f64) * (m as f64).ln();
    let top = base + eps.ln_1p();
    let rest = base + (-eps / others).ln_1p();
    let mut table = vec![rest; count];
    table[0] = top;
    ExplicitSource::from_log_probs(alphabet, k, table)
}

pub(crate) fn checked_word_count(m: usize, k: usize) -> Option<usize> {
    let k = u32::try_from(k).ok()?;
    m.checked_pow(k)
}

fn check_entries(what: &str, log_probs: &[f64], out: &mut Vec<Violation>) {
    for (index, &lp) in log_probs.iter().enumerate() {
        if lp.is_nan() || lp > 0.0 {
            out.push(Violation::NotAProbability {
                what: what.to_string(),
                index: index + 1,
                value: lp.exp(),
            });
        }
    }
}

fn check_distribution(what: &str, log_probs: &[f64], out: &mut Vec<Violation>) {
    check_entries(what, log_probs, out);
    if log_probs.iter().all(|lp| *lp == f64::NEG_INFINITY) {
        out.push(Violation::NoPositiveEntry {
            what: what.to_string(),
        });
        return;
    }
    let sum: f64 = log_probs.iter().map(|lp| lp.exp()).sum();
    if !sum.is_nan() && (sum - 1.0).abs() > LETTER_SUM_TOL {
        out.push(Violation::SumToOne {
            what: what.to_string(),
            sum,
        });
    }
}

/// States (0-based) not in the strongly connected component of state 0 of
/// the positive-probability transition digraph.
fn not_strongly_connected(transition: &[Vec<f64>]) -> Vec<usize> {
    let m = transition.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..m {
                let arc = if forward {
                    transition[u][v]
                } else {
                    transition[v][u]
                };
                if arc > f64::NEG_INFINITY && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let bwd = reach(false);
    (0..m).filter(|&v| !(fwd[v] && bwd[v])).collect()
}
