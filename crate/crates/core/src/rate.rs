//! The rate function `Lambda*(x) = sup_alpha { x alpha - Lambda(alpha) }` of
//! `k^-1 log G(W_k)` and the direct approximations of the guesswork
//! distribution built from it.

use std::fmt;

use crate::error::{Error, Result};
use crate::scgf::ScgfCurve;

pub const DEFAULT_ALPHA_MAX: f64 = 200.0;
pub const ALPHA_MAX_LIMIT: f64 = 1e6;
pub const ALPHA_LOWER_OFFSET: f64 = 1e-9;
pub const DOMAIN_TOL: f64 = 1e-9;
pub const BICONJUGATE_GRID: usize = 2000;
const GOLDEN_ALPHA_TOL: f64 = 1e-10;
const CONVEXITY_TOL: f64 = 1e-10;

/// Which piece of `Lambda*` a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// `-x - gamma` on `[0, turn]`.
    Linear,
    Convex,
    /// The maximiser ran into the largest allowed `alpha`; the value is a
    /// lower bound on the true conjugate.
    Boundary,
    Infinite,
}

impl Segment {
    pub fn label(&self) -> &'static str {
        match self {
            Segment::Linear => "linear",
            Segment::Convex => "convex",
            Segment::Boundary => "boundary",
            Segment::Infinite => "infinite",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An extended-real value of `Lambda*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateValue {
    Finite { value: f64, segment: Segment },
    Infinite,
}

impl RateValue {
    pub fn segment(&self) -> Segment {
        match self {
            RateValue::Finite { segment, .. } => *segment,
            RateValue::Infinite => Segment::Infinite,
        }
    }

    /// The value as an `f64`, `+inf` for the sentinel.
    pub fn as_f64(&self) -> f64 {
        match self {
            RateValue::Finite { value, .. } => *value,
            RateValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, RateValue::Finite { .. })
    }
}

/// A rank `n` for words of length `k`, carried as `log n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxQuery {
    pub k: usize,
    pub log_n: f64,
}

impl ApproxQuery {
    pub fn from_rank(k: usize, n: u128) -> Result<Self> {
        if n == 0 {
            return Err(Error::RankOutOfRange("ranks start at 1".into()));
        }
        Self::from_log_rank(k, (n as f64).ln())
    }

    pub fn from_log_rank(k: usize, log_n: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(log_n >= 0.0) || !log_n.is_finite() {
            return Err(Error::RankOutOfRange(format!("log n = {log_n} is not a valid rank")));
        }
        Ok(Self { k, log_n })
    }

    /// `k^-1 log n`.
    pub fn x(&self) -> f64 {
        self.log_n / self.k as f64
    }
}

/// Result of maximising a concave function on an interval.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a concave `f` on `[lo, hi]`.
/// Endpoints are compared as well, so a monotone `f` returns the right end.
pub(crate) fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a) > tol * (1.0 + a.abs().max(b.abs())) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = if fc >= fd {
        Maximum { arg: c, value: fc }
    } else {
        Maximum { arg: d, value: fd }
    };
    for end in [lo, hi] {
        let v = f(end)?;
        if v > best.value {
            best = Maximum { arg: end, value: v };
        }
    }
    Ok(best)
}

/// `Lambda*` for one source.
#[derive(Debug, Clone)]
pub struct RateFunction {
    curve: ScgfCurve,
    alpha_max: f64,
}

impl RateFunction {
    pub fn new(curve: ScgfCurve) -> Self {
        Self::with_alpha_max(curve, DEFAULT_ALPHA_MAX)
    }

    pub fn with_alpha_max(curve: ScgfCurve, alpha_max: f64) -> Self {
        Self { curve, alpha_max }
    }

    pub fn curve(&self) -> &ScgfCurve {
        &self.curve
    }

    pub fn gamma(&self) -> f64 {
        self.curve.gamma()
    }

    pub fn turn(&self) -> f64 {
        self.curve.turn().value
    }

    pub fn support_rate(&self) -> f64 {
        self.curve.support_rate()
    }

    pub fn log_m(&self) -> f64 {
        self.curve.alphabet().log_size()
    }

    fn check_domain(&self, x: f64) -> Result<f64> {
        let log_m = self.log_m();
        if !(x >= -DOMAIN_TOL && x <= log_m + DOMAIN_TOL) {
            return Err(Error::InvalidParameter(format!(
                "x = {x} outside [0, log m = {log_m}]"
            )));
        }
        Ok(x.clamp(0.0, log_m))
    }

    /// Maximise `x alpha - Lambda(alpha)` over `[lower, alpha_max]`, growing
    /// `alpha_max` tenfold while the maximiser sits on it.
    fn maximise(&self, x: f64, lower: f64) -> Result<(Maximum, bool)> {
        let mut hi = self.alpha_max.max(lower + 1.0);
        loop {
            let best = golden_max(|a| Ok(x * a - self.curve.lambda(a)?), lower, hi, GOLDEN_ALPHA_TOL)?;
            let at_edge = best.arg >= hi - 1e-6 * (1.0 + hi);
            if !at_edge {
                return Ok((best, false));
            }
            if hi >= ALPHA_MAX_LIMIT {
                return Ok((best, true));
            }
            hi = (hi * 10.0).min(ALPHA_MAX_LIMIT);
        }
    }

    /// `Lambda*(x)` for `x` in `[0, log m]`.
    pub fn rate_at(&self, x: f64) -> Result<RateValue> {
        let x = self.check_domain(x)?;
        if x <= self.turn() + DOMAIN_TOL {
            return Ok(RateValue::Finite {
                value: -x - self.gamma(),
                segment: Segment::Linear,
            });
        }
        let support = self.support_rate();
        if x > support + DOMAIN_TOL {
            return Ok(RateValue::Infinite);
        }
        let x = x.min(support);
        let (best, boundary) = self.maximise(x, -1.0 + ALPHA_LOWER_OFFSET)?;
        Ok(RateValue::Finite {
            value: best.value.max(0.0),
            segment: if boundary { Segment::Boundary } else { Segment::Convex },
        })
    }

    /// The conjugate by numerical search over `alpha` in `[-1, alpha_max]`
    /// with no closed-form shortcut, for checking [`rate_at`](Self::rate_at).
    /// Values of `alpha` below -1 cannot win since `x >= 0`.
    pub fn conjugate_by_search(&self, x: f64) -> Result<f64> {
        let x = self.check_domain(x)?;
        Ok(self.maximise(x, -1.0)?.0.value)
    }

    /// `log` of `n^-1 exp(-k Lambda*(k^-1 log n))`.
    pub fn approx_pmf(&self, q: &ApproxQuery) -> Result<f64> {
        let rate = self.query_rate(q)?;
        Ok(match rate {
            RateValue::Infinite => f64::NEG_INFINITY,
            RateValue::Finite { value, .. } => -q.log_n - q.k as f64 * value,
        })
    }

    /// `log` of `exp(-k (x + Lambda*(x)))` with `x = k^-1 log n`, the
    /// leading-order probability of the `n`-th most likely word.
    pub fn nth_word_prob_estimate(&self, q: &ApproxQuery) -> Result<f64> {
        let rate = self.query_rate(q)?;
        Ok(match rate {
            RateValue::Infinite => f64::NEG_INFINITY,
            RateValue::Finite { value, .. } => -(q.k as f64) * (q.x() + value),
        })
    }

    fn query_rate(&self, q: &ApproxQuery) -> Result<RateValue> {
        let x = q.x();
        if x > self.log_m() + DOMAIN_TOL {
            return Err(Error::RankOutOfRange(format!(
                "log n = {} exceeds k log m = {}",
                q.log_n,
                q.k as f64 * self.log_m()
            )));
        }
        self.rate_at(x)
    }

    /// `max |sup_x {alpha x - Lambda*(x)} - Lambda(alpha)|` over the grid.
    /// The sup is taken on a 2000-point grid over `[0, log m]` and refined by
    /// golden section between the neighbours of the best grid point.
    pub fn biconjugate_check(&self, alpha_grid: &[f64]) -> Result<f64> {
        let log_m = self.log_m();
        let xs: Vec<f64> = (0..BICONJUGATE_GRID)
            .map(|i| log_m * i as f64 / (BICONJUGATE_GRID - 1) as f64)
            .collect();
        let rates = xs
            .iter()
            .map(|&x| self.rate_at(x).map(|r| r.as_f64()))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for &alpha in alpha_grid {
            if !(alpha > -1.0 && alpha <= self.alpha_max) {
                return Err(Error::InvalidParameter(format!(
                    "alpha = {alpha} outside (-1, {}]",
                    self.alpha_max
                )));
            }
            let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
            for (i, (&x, &r)) in xs.iter().zip(&rates).enumerate() {
                let v = alpha * x - r;
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
            let lo = xs[best_i.saturating_sub(1)];
            let hi = xs[(best_i + 1).min(xs.len() - 1)];
            let refined = golden_max(
                |x| {
                    Ok(match self.rate_at(x)? {
                        RateValue::Infinite => f64::NEG_INFINITY,
                        RateValue::Finite { value, .. } => alpha * x - value,
                    })
                },
                lo,
                hi,
                1e-12,
            )?;
            let sup = best.max(refined.value);
            worst = worst.max((sup - self.curve.lambda(alpha)?).abs());
        }
        Ok(worst)
    }

    /// Tabulate `Lambda*` on a grid, checking that finite slopes never
    /// decrease.
    pub fn rate_curve(&self, x_grid: &[f64]) -> Result<Vec<(f64, RateValue)>> {
        let rows = x_grid
            .iter()
            .map(|&x| Ok((x, self.rate_at(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let finite: Vec<(f64, f64)> = rows
            .iter()
            .filter(|(_, r)| matches!(r.segment(), Segment::Linear | Segment::Convex))
            .map(|(x, r)| (*x, r.as_f64()))
            .collect();
        for w in finite.windows(3) {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            let slack = CONVEXITY_TOL * 4.0 / (w[1].0 - w[0].0).min(w[2].0 - w[1].0);
            if s2 < s1 - slack {
                return Err(Error::Numerical(format!(
                    "rate function slope decreases near x = {}: {s1} then {s2}",
                    w[1].0
                )));
            }
        }
        Ok(rows)
    }
}
