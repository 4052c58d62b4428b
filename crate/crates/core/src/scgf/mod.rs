//! The scaled cumulant generating function of `log G(W_k)`.
//!
//! For `alpha > -1`,
//!
//! ```text
//! Lambda(alpha) = (1 + alpha) log sum_w p_w^(1/(1+alpha))          i.i.d. letters
//! Lambda(alpha) = (1 + alpha) log rho(P_alpha),  (P_alpha)_ij = p_ij^(1/(1+alpha))   Markov
//! ```
//!
//! and `Lambda(alpha) = gamma` for `alpha <= -1`, where `gamma` is the
//! exponential decay rate of the most likely word's probability.
//!
//! Both forms are evaluated as `gamma + (1 + alpha) log rho(Q_beta)` with
//! `beta = 1/(1+alpha)` and `Q_beta = exp(beta * r)`, where `r` are arc
//! weights shifted by `gamma` and rescaled by max-plus potentials so that
//! every entry of `Q_beta` is at most 1. This stays finite for `beta` up to
//! `1e7`, which the turn-point extrapolation needs.

mod perron;

use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, softmax_entropy};
use crate::oracle::Count;
use crate::sources::{Alphabet, IidSource, MarkovSource, SourceSpec};

use perron::{max_cycle_mean, perron, potentials, spectral_radius};

/// Offsets `epsilon` at which `Lambda'(-1 + epsilon)` is sampled for the turn.
pub const TURN_EPSILONS: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
pub const TURN_CONVERGENCE_TOL: f64 = 1e-5;
pub const TURN_IID_AGREEMENT_TOL: f64 = 1e-4;
pub const TURN_CLASSIFY_TOL: f64 = 1e-3;
const CRITICAL_ARC_TOL: f64 = 1e-9;

/// The only values the turn can take for two-letter Markov sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnClass {
    Zero,
    LogPhi,
    Log2,
}

impl TurnClass {
    pub const ALL: [TurnClass; 3] = [TurnClass::Zero, TurnClass::LogPhi, TurnClass::Log2];

    pub fn value(&self) -> f64 {
        match self {
            TurnClass::Zero => 0.0,
            TurnClass::LogPhi => ((1.0 + 5f64.sqrt()) / 2.0).ln(),
            TurnClass::Log2 => std::f64::consts::LN_2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TurnClass::Zero => "zero",
            TurnClass::LogPhi => "log_phi",
            TurnClass::Log2 => "log_2",
        }
    }

    /// Nearest class within [`TURN_CLASSIFY_TOL`].
    pub fn classify(turn: f64) -> Option<TurnClass> {
        Self::ALL
            .into_iter()
            .find(|c| (c.value() - turn).abs() <= TURN_CLASSIFY_TOL)
    }
}

/// The right-derivative limit of `Lambda` at `alpha = -1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnPoint {
    /// Extrapolated numerical limit.
    pub value: f64,
    /// Whether successive samples agreed within [`TURN_CONVERGENCE_TOL`].
    pub converged: bool,
    /// `(epsilon, Lambda'(-1 + epsilon))` samples that were evaluated.
    pub samples: Vec<(f64, f64)>,
    /// `log |argmax p|` for i.i.d. sources.
    pub analytic: Option<f64>,
    /// Classification for two-letter Markov sources.
    pub class: Option<TurnClass>,
}

#[derive(Debug, Clone)]
enum Model {
    /// Finite letter log-probabilities minus `gamma`.
    Iid { shifted: Vec<f64> },
    /// Reduced 2x2 weights: `(l11, l22, l12 + l21)` minus `gamma` (twice for
    /// the cross term), each `<= 0`.
    Markov2 { a: f64, d: f64, cross: f64 },
    /// Reduced weights `log p_ij - gamma + u_i - u_j <= 0`.
    Markov { reduced: Vec<Vec<f64>> },
}

/// `Lambda` for one source with its derived constants.
#[derive(Debug, Clone)]
pub struct ScgfCurve {
    alphabet: Alphabet,
    model: Model,
    reduced: Option<Vec<Vec<f64>>>,
    gamma: f64,
    turn: TurnPoint,
    support_rate: f64,
    shannon_slope: f64,
}

impl ScgfCurve {
    pub fn new(source: &SourceSpec) -> Result<Self> {
        let violations = source.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidSource(violations));
        }
        match source {
            SourceSpec::Iid(s) => Self::from_iid(s),
            SourceSpec::Markov(s) => Self::from_markov(s),
            SourceSpec::Explicit(_) => Err(Error::Unsupported(
                "an explicit single-length table has no k -> infinity limit, so Lambda is undefined".into(),
            )),
        }
    }

    fn from_iid(s: &IidSource) -> Result<Self> {
        let lp = s.letter_log_probs();
        let gamma = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let finite: Vec<f64> = lp.iter().copied().filter(|l| l.is_finite()).collect();
        let support_rate = (finite.len() as f64).ln();
        let shifted = finite.iter().map(|l| l - gamma).collect();
        let top = lp.iter().filter(|&&l| gamma - l <= 1e-12).count();
        let mut curve = Self {
            alphabet: s.alphabet(),
            model: Model::Iid { shifted },
            reduced: None,
            gamma,
            turn: placeholder_turn(),
            support_rate,
            shannon_slope: 0.0,
        };
        curve.shannon_slope = curve.lambda_prime(0.0)?;
        let mut turn = curve.extrapolate_turn()?;
        let analytic = (top as f64).ln();
        if (turn.value - analytic).abs() > TURN_IID_AGREEMENT_TOL {
            return Err(Error::Numerical(format!(
                "turn {} disagrees with log|argmax p| = {analytic}",
                turn.value
            )));
        }
        turn.analytic = Some(analytic);
        curve.turn = turn;
        Ok(curve)
    }

    fn from_markov(s: &MarkovSource) -> Result<Self> {
        let m = s.alphabet().size();
        let w = s.transition_log_probs();
        let gamma = if m == 2 {
            w[0][0].max(w[1][1]).max(0.5 * (w[0][1] + w[1][0]))
        } else {
            max_cycle_mean(w)
        };
        let pot = potentials(w, gamma);
        let reduced: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| w[i][j] - gamma + pot[i] - pot[j]).collect())
            .collect();
        let model = if m == 2 {
            Model::Markov2 {
                a: w[0][0] - gamma,
                d: w[1][1] - gamma,
                cross: w[0][1] + w[1][0] - 2.0 * gamma,
            }
        } else {
            Model::Markov {
                reduced: reduced.clone(),
            }
        };
        let support: Vec<Vec<f64>> = w
            .iter()
            .map(|row| row.iter().map(|&l| if l.is_finite() { 1.0 } else { 0.0 }).collect())
            .collect();
        let support_rate = spectral_radius(&support)?.ln();
        let mut curve = Self {
            alphabet: s.alphabet(),
            model,
            reduced: Some(reduced),
            gamma,
            turn: placeholder_turn(),
            support_rate,
            shannon_slope: 0.0,
        };
        curve.shannon_slope = curve.lambda_prime(0.0)?;
        let mut turn = curve.extrapolate_turn()?;
        if m == 2 {
            turn.class = TurnClass::classify(turn.value);
        }
        curve.turn = turn;
        Ok(curve)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// `lim k^-1 log P(G(W_k) = 1)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn turn(&self) -> &TurnPoint {
        &self.turn
    }

    /// Growth rate of the number of positive-probability words.
    pub fn support_rate(&self) -> f64 {
        self.support_rate
    }

    /// `Lambda'(0)`, the specific Shannon entropy.
    pub fn shannon_slope(&self) -> f64 {
        self.shannon_slope
    }

    /// `log rho(Q_beta)` and its `beta`-derivative.
    fn log_rho(&self, beta: f64) -> Result<(f64, f64)> {
        match &self.model {
            Model::Iid { shifted } => {
                let scaled: Vec<f64> = shifted.iter().map(|l| beta * l).collect();
                let norm = log_sum_exp(scaled.iter().copied());
                let slope = scaled
                    .iter()
                    .zip(shifted)
                    .map(|(s, l)| (s - norm).exp() * l)
                    .sum();
                Ok((norm, slope))
            }
            &Model::Markov2 { a, d, cross } => {
                let ea = (beta * a).exp();
                let ed = (beta * d).exp();
                let ec = (beta * cross).exp();
                let disc = ((ea - ed) * (ea - ed) + 4.0 * ec).sqrt();
                let rho = 0.5 * (ea + ed) + 0.5 * disc;
                // both numerator and disc vanish when the diagonal ties and
                // the cross term underflows; the ratio then tends to 0
                let split = if disc > 0.0 {
                    ((ea - ed) * (a * ea - d * ed) + 2.0 * cross * ec) / (2.0 * disc)
                } else {
                    0.0
                };
                let drho = 0.5 * (a * ea + d * ed) + split;
                Ok((rho.ln(), drho / rho))
            }
            Model::Markov { reduced } => {
                let q: Vec<Vec<f64>> = reduced
                    .iter()
                    .map(|row| row.iter().map(|r| (beta * r).exp()).collect())
                    .collect();
                let p = perron(&q)?;
                let n = q.len();
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..n {
                    den += p.left[i] * p.right[i];
                    for j in 0..n {
                        if q[i][j] > 0.0 {
                            num += p.left[i] * q[i][j] * reduced[i][j] * p.right[j];
                        }
                    }
                }
                Ok((p.rho.ln(), num / (den * p.rho)))
            }
        }
    }

    /// `Lambda(alpha)`; exactly `gamma` for `alpha <= -1` and 0 at `alpha = 0`.
    pub fn lambda(&self, alpha: f64) -> Result<f64> {
        if alpha <= -1.0 {
            return Ok(self.gamma);
        }
        if alpha == 0.0 {
            return Ok(0.0);
        }
        if alpha.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let beta = 1.0 / (1.0 + alpha);
        let (log_rho, _) = self.log_rho(beta)?;
        Ok(self.gamma + (1.0 + alpha) * log_rho)
    }

    /// `Lambda'(alpha)` for `alpha > -1`.
    pub fn lambda_prime(&self, alpha: f64) -> Result<f64> {
        if !(alpha > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Lambda' is only defined for alpha > -1, got {alpha}"
            )));
        }
        let beta = 1.0 / (1.0 + alpha);
        if let Model::Iid { shifted } = &self.model {
            // entropy of the escort distribution p^beta / sum p^beta
            let scaled: Vec<f64> = shifted.iter().map(|l| beta * l).collect();
            return Ok(softmax_entropy(&scaled));
        }
        let (log_rho, slope) = self.log_rho(beta)?;
        Ok(log_rho - beta * slope)
    }

    fn extrapolate_turn(&self) -> Result<TurnPoint> {
        let mut samples = Vec::with_capacity(TURN_EPSILONS.len());
        let mut converged = false;
        for eps in TURN_EPSILONS {
            let v = self.lambda_prime(-1.0 + eps)?;
            let agrees = samples
                .last()
                .is_some_and(|&(_, prev): &(f64, f64)| (v - prev).abs() < TURN_CONVERGENCE_TOL);
            samples.push((eps, v));
            if agrees {
                converged = true;
                break;
            }
        }
        let value = samples.last().map(|s| s.1).unwrap_or(f64::NAN);
        Ok(TurnPoint {
            value,
            converged,
            samples,
            analytic: None,
            class: None,
        })
    }

    /// Specific Renyi entropy `lim k^-1 R_k(beta)` = `Lambda(alpha) / alpha`
    /// with `alpha = (1 - beta) / beta`; the Shannon slope at `beta = 1`.
    pub fn renyi_specific(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
        }
        if beta == 1.0 {
            return Ok(self.shannon_slope);
        }
        let alpha = (1.0 - beta) / beta;
        Ok(self.lambda(alpha)? / alpha)
    }

    /// Words of length `k` whose every transition lies on a cycle of maximal
    /// mean log-probability. They are the words whose probability stays
    /// within a `k`-independent factor of `exp(k gamma)`, and their number
    /// grows like `exp(k turn)`. Markov sources only.
    pub fn critical_word_count(&self, k: usize) -> Result<Count> {
        let reduced = self.reduced.as_ref().ok_or_else(|| {
            Error::Unsupported("critical words are defined for Markov sources".into())
        })?;
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let n = reduced.len();
        let tight: Vec<Vec<bool>> = reduced
            .iter()
            .map(|row| row.iter().map(|&r| r >= -CRITICAL_ARC_TOL).collect())
            .collect();
        let comp = strong_components(&tight);
        let critical = |i: usize, j: usize| tight[i][j] && comp[i] == comp[j];
        let on_cycle: Vec<bool> = (0..n).map(|i| (0..n).any(|j| critical(i, j))).collect();
        let mut counts: Vec<Option<u128>> = on_cycle.iter().map(|&c| Some(c as u128)).collect();
        let mut logs: Vec<f64> = on_cycle
            .iter()
            .map(|&c| if c { 0.0 } else { f64::NEG_INFINITY })
            .collect();
        for _ in 1..k {
            let mut next_counts = vec![Some(0u128); n];
            let mut next_logs = vec![f64::NEG_INFINITY; n];
            for j in 0..n {
                for i in 0..n {
                    if critical(i, j) {
                        next_counts[j] = match (next_counts[j], counts[i]) {
                            (Some(a), Some(b)) => a.checked_add(b),
                            _ => None,
                        };
                        next_logs[j] = crate::logspace::log_add_exp(next_logs[j], logs[i]);
                    }
                }
            }
            counts = next_counts;
            logs = next_logs;
        }
        let exact = counts
            .iter()
            .try_fold(0u128, |acc, c| c.and_then(|c| acc.checked_add(c)));
        Ok(Count {
            log: log_sum_exp(logs),
            exact,
        })
    }
}

fn placeholder_turn() -> TurnPoint {
    TurnPoint {
        value: f64::NAN,
        converged: false,
        samples: Vec::new(),
        analytic: None,
        class: None,
    }
}

/// Component label per node (Kosaraju on a boolean adjacency matrix).
fn strong_components(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    fn dfs(v: usize, adj: &dyn Fn(usize, usize) -> bool, n: usize, seen: &mut [bool], out: &mut Vec<usize>) {
        seen[v] = true;
        for u in 0..n {
            if adj(v, u) && !seen[u] {
                dfs(u, adj, n, seen, out);
            }
        }
        out.push(v);
    }
    let fwd = |a: usize, b: usize| adj[a][b];
    let bwd = |a: usize, b: usize| adj[b][a];
    for v in 0..n {
        if !seen[v] {
            dfs(v, &fwd, n, &mut seen, &mut order);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut label = 0;
    for &v in order.iter().rev() {
        if !seen[v] {
            let mut members = Vec::new();
            dfs(v, &bwd, n, &mut seen, &mut members);
            for u in members {
                comp[u] = label;
            }
            label += 1;
        }
    }
    comp
}
