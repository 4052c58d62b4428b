//! Log-domain arithmetic helpers.
//!
//! Probabilities are carried as natural logarithms throughout the crate and
//! `f64::NEG_INFINITY` encodes probability zero.

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(sum(exp(x)))` over an iterator; empty input gives `-inf`.
pub fn log_sum_exp<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// A real number stored as sign and log-magnitude, used to add terms of
/// mixed sign whose magnitudes span many orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub negative: bool,
    pub log_abs: f64,
}

impl SignedLog {
    pub fn positive(log_abs: f64) -> Self {
        Self { negative: false, log_abs }
    }

    pub fn new(negative: bool, log_abs: f64) -> Self {
        Self { negative, log_abs }
    }

    pub fn from_f64(x: f64) -> Self {
        Self {
            negative: x < 0.0,
            log_abs: x.abs().ln(),
        }
    }
}

/// Sum of signed log-magnitudes. Returns `(negative, log|sum|)`.
pub fn signed_log_sum(terms: &[SignedLog]) -> SignedLog {
    let max = terms
        .iter()
        .map(|t| t.log_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return SignedLog::new(false, f64::NEG_INFINITY);
    }
    let sum: f64 = terms
        .iter()
        .map(|t| {
            let v = (t.log_abs - max).exp();
            if t.negative {
                -v
            } else {
                v
            }
        })
        .sum();
    SignedLog::new(sum < 0.0, max + sum.abs().ln())
}

/// Shannon entropy (nats) of the distribution proportional to `exp(weights)`.
pub fn softmax_entropy(weights: &[f64]) -> f64 {
    let norm = log_sum_exp(weights.iter().copied());
    weights
        .iter()
        .filter(|w| w.is_finite())
        .map(|&w| {
            let lq = w - norm;
            -lq.exp() * lq
        })
        .sum()
}
