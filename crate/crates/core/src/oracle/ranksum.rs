//! Sums of `n^alpha` and `log n` over contiguous rank ranges `a..=b`.
//!
//! Levels of a guesswork table can hold astronomically many ranks (a type
//! class at `k = 100` may have `~2^100` members), so the range is described by
//! logarithms of its start and length. Short ranges are summed directly;
//! integer powers use closed forms; everything else uses Euler-Maclaurin with
//! a directly summed head so the expansion starts far from the origin.

use crate::logspace::{log_add_exp, log_sum_exp, signed_log_sum, SignedLog};

/// Ranges with at most this many ranks are summed term by term.
pub(crate) const DIRECT_MAX: f64 = 4096.0;

const EM_TERMS: usize = 8;
const MAX_CLOSED_FORM_POWER: usize = 20;

/// `B_0 .. B_20` with the `B_1 = -1/2` convention.
const BERNOULLI: [f64; 21] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
    0.0,
    -174611.0 / 330.0,
];

/// A contiguous range of ranks `start ..= start + count - 1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RankRange {
    pub log_start: f64,
    pub log_count: f64,
    /// Exact start, when it is an integer representable in an `f64`.
    pub start: Option<f64>,
    /// Exact count, when it is an integer representable in an `f64`.
    pub count: Option<f64>,
}

impl RankRange {
    #[cfg(test)]
    pub fn exact(start: u64, count: u64) -> Self {
        Self {
            log_start: (start as f64).ln(),
            log_count: (count as f64).ln(),
            start: Some(start as f64),
            count: Some(count as f64),
        }
    }

    fn log_rank(&self, offset: f64) -> f64 {
        match self.start {
            Some(s) => (s + offset).ln(),
            None => self.log_start + (offset * (-self.log_start).exp()).ln_1p(),
        }
    }

    /// Splits off ranks below `threshold` when the start is a small exact
    /// integer. Returns `(head_len, tail)`.
    fn split_head(&self, threshold: f64) -> (u64, Option<RankRange>) {
        let Some(s) = self.start else {
            return (0, Some(*self));
        };
        if s >= threshold {
            return (0, Some(*self));
        }
        let count = (self.log_count).exp();
        let head = (threshold - s).min(count);
        if head >= count {
            return (head as u64, None);
        }
        let tail_start = s + head;
        let log_tail_count = self.log_count + (-head / count).ln_1p();
        let tail = RankRange {
            log_start: tail_start.ln(),
            log_count: log_tail_count,
            start: Some(tail_start),
            count: self.count.map(|c| c - head),
        };
        (head as u64, Some(tail))
    }

    /// `log(count - 1)`.
    fn log_len(&self) -> f64 {
        match self.count {
            Some(c) => (c - 1.0).ln(),
            None => self.log_count + (-(-self.log_count).exp()).ln_1p(),
        }
    }

    /// `log(end)` where `end = start + count - 1`.
    fn log_end(&self) -> f64 {
        log_add_exp(self.log_start, self.log_len())
    }
}

fn small_count(r: &RankRange) -> Option<u64> {
    r.count.filter(|&c| c <= DIRECT_MAX).map(|c| c as u64)
}

/// `log sum_{n in range} n^alpha`.
pub(crate) fn log_power_sum(r: &RankRange, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return r.log_count;
    }
    if let Some(c) = small_count(r) {
        return log_sum_exp((0..c).map(|i| alpha * r.log_rank(i as f64)));
    }
    if alpha > 0.0 && alpha.fract() == 0.0 && alpha <= MAX_CLOSED_FORM_POWER as f64 {
        return log_integer_power_sum(r, alpha as usize);
    }
    log_power_sum_em(r, alpha)
}

/// Mean of `log n` over the range.
pub(crate) fn mean_log_rank(r: &RankRange) -> f64 {
    if let Some(c) = small_count(r) {
        let total: f64 = (0..c).map(|i| r.log_rank(i as f64)).sum();
        return total / c as f64;
    }
    let (head, tail) = r.split_head(64.0);
    let mut total_over_count = 0.0;
    if head > 0 {
        let s = r.start.unwrap_or(1.0);
        let head_sum: f64 = (0..head).map(|i| (s + i as f64).ln()).sum();
        total_over_count += head_sum * (-r.log_count).exp();
    }
    if let Some(t) = tail {
        total_over_count += log_sum_em_over(&t, r.log_count);
    }
    total_over_count
}

/// `sum_{n=A}^{B} log n / c` by Euler-Maclaurin, with `c = exp(log_c)`.
fn log_sum_em_over(t: &RankRange, log_c: f64) -> f64 {
    let log_a = t.log_start;
    let log_b = t.log_end();
    let log_len = t.log_len();
    // x = (B - A) / A
    let x = (log_len - log_a).exp();
    let len_over_c = (log_len - log_c).exp();
    // B * log(B/A) / c
    let b_delta_over_c = if x < 1e-4 {
        len_over_c * (1.0 + x / 2.0 - x * x / 6.0 + x * x * x / 12.0)
    } else {
        (log_b - log_c).exp() * x.ln_1p()
    };
    let mut acc = len_over_c * log_a + b_delta_over_c - len_over_c;
    acc += (log_a + log_b) / 2.0 * (-log_c).exp();
    // f^(2j-1)(x) = (2j-2)! / x^(2j-1)
    let mut fact = 1.0; // (2j-2)!
    let mut fact2j = 2.0; // (2j)!
    for j in 1..=EM_TERMS.min(6) {
        let r = (2 * j - 1) as f64;
        if j > 1 {
            fact *= ((2 * j - 3) * (2 * j - 2)) as f64;
            fact2j *= ((2 * j - 1) * (2 * j)) as f64;
        }
        let coef = BERNOULLI[2 * j] / fact2j * fact;
        let at_b = (-r * log_b - log_c).exp();
        let at_a = (-r * log_a - log_c).exp();
        acc += coef * (at_b - at_a);
    }
    acc
}

/// Closed form `sum_{i=0}^{c-1} (a + i)^p = sum_j C(p,j) a^(p-j) F_j(c)`
/// with `F_j(c) = sum_{i<c} i^j` from Faulhaber's formula. All terms are
/// non-negative, so the log-domain sum has no cancellation.
fn log_integer_power_sum(r: &RankRange, p: usize) -> f64 {
    let log_c = r.log_count;
    let terms = (0..=p).map(|j| {
        let log_binom = ln_binomial(p, j);
        let log_f = if j == 0 {
            log_c
        } else {
            log_faulhaber(j, log_c)
        };
        log_binom + (p - j) as f64 * r.log_start + log_f
    });
    log_sum_exp(terms)
}

/// `log sum_{i=0}^{c-1} i^j` for `j >= 1` and large `c`.
fn log_faulhaber(j: usize, log_c: f64) -> f64 {
    let inv_c = (-log_c).exp();
    let mut inner = 0.0;
    let mut c_pow = 1.0;
    for r in 0..=j {
        let b = BERNOULLI[r];
        if b != 0.0 {
            inner += binomial_f64(j + 1, r) * b * c_pow;
        }
        c_pow *= inv_c;
    }
    (j + 1) as f64 * log_c - ((j + 1) as f64).ln() + inner.ln()
}

fn log_power_sum_em(r: &RankRange, alpha: f64) -> f64 {
    let threshold = (4.0 * alpha.abs()).ceil().clamp(64.0, 1e6);
    let (head, tail) = r.split_head(threshold);
    let mut parts: Vec<SignedLog> = Vec::new();
    if head > 0 {
        let s = r.start.unwrap_or(1.0);
        parts.push(SignedLog::positive(log_sum_exp(
            (0..head).map(|i| alpha * (s + i as f64).ln()),
        )));
    }
    if let Some(t) = tail {
        parts.extend(em_power_terms(&t, alpha));
    }
    signed_log_sum(&parts).log_abs
}

fn em_power_terms(t: &RankRange, alpha: f64) -> Vec<SignedLog> {
    let log_a = t.log_start;
    let log_b = t.log_end();
    let x = (t.log_len() - log_a).exp();
    let delta = x.ln_1p(); // log(B/A)
    let mut out = Vec::with_capacity(3 + 2 * EM_TERMS);

    let e = alpha + 1.0;
    if e == 0.0 {
        out.push(SignedLog::positive(delta.ln()));
    } else {
        let u = e * delta;
        let log_integral = if e > 0.0 {
            let log_expm1 = if u > 1.0 {
                u + (-(-u).exp()).ln_1p()
            } else {
                u.exp_m1().ln()
            };
            e * log_a + log_expm1 - e.ln()
        } else {
            e * log_a + (-u.exp_m1()).ln() - (-e).ln()
        };
        out.push(SignedLog::positive(log_integral));
    }
    let ln2 = std::f64::consts::LN_2;
    out.push(SignedLog::positive(alpha * log_a - ln2));
    out.push(SignedLog::positive(alpha * log_b - ln2));

    // B_{2j}/(2j)! * alpha(alpha-1)...(alpha-2j+2) * (B^(alpha-2j+1) - A^(alpha-2j+1))
    let mut falling = alpha; // alpha^(falling 2j-1)
    let mut fact2j = 2.0;
    for j in 1..=EM_TERMS {
        if j > 1 {
            falling *= (alpha - (2 * j - 3) as f64) * (alpha - (2 * j - 2) as f64);
            fact2j *= ((2 * j - 1) * (2 * j)) as f64;
        }
        let coef = BERNOULLI[2 * j] / fact2j * falling;
        if coef == 0.0 {
            break;
        }
        let power = alpha - (2 * j - 1) as f64;
        let log_coef = coef.abs().ln();
        let neg = coef < 0.0;
        out.push(SignedLog::new(neg, log_coef + power * log_b));
        out.push(SignedLog::new(!neg, log_coef + power * log_a));
    }
    out
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    ln_binomial(n, k).exp().round()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}
