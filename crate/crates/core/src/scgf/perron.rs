//! Perron roots of non-negative matrices and max-plus cycle means.

use crate::error::{Error, Result};

pub(crate) const POWER_TOL: f64 = 1e-12;
pub(crate) const POWER_MAX_ITER: usize = 100_000;

/// Spectral radius with right (`A v = rho v`) and left (`u^T A = rho u^T`)
/// Perron vectors, each normalised to sum 1.
#[derive(Debug, Clone)]
pub(crate) struct Perron {
    pub rho: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

/// Shifted power iteration on `A + I`. The shift keeps the iteration
/// convergent when the support digraph is periodic; the spectral radius of
/// `A + I` is `rho(A) + 1` for non-negative irreducible `A`.
pub(crate) fn perron(a: &[Vec<f64>]) -> Result<Perron> {
    let (rho_r, right) = shifted_power(a, false)?;
    let (rho_l, left) = shifted_power(a, true)?;
    let rho = 0.5 * (rho_r + rho_l);
    Ok(Perron { rho, right, left })
}

pub(crate) fn spectral_radius(a: &[Vec<f64>]) -> Result<f64> {
    Ok(shifted_power(a, false)?.0)
}

fn shifted_power(a: &[Vec<f64>], transpose: bool) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut lambda = f64::NAN;
    for iter in 1..=POWER_MAX_ITER {
        for i in 0..n {
            let mut s = x[i];
            for j in 0..n {
                let aij = if transpose { a[j][i] } else { a[i][j] };
                s += aij * x[j];
            }
            y[i] = s;
        }
        // sum-normalised iterate; the sum is the eigenvalue estimate of A + I
        let total: f64 = y.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numerical(format!(
                "power iteration produced non-finite norm {total}"
            )));
        }
        let mut change = 0.0f64;
        for i in 0..n {
            let v = y[i] / total;
            change = change.max((v - x[i]).abs());
            x[i] = v;
        }
        let previous = lambda;
        lambda = total;
        if iter > 1 && (lambda - previous).abs() <= POWER_TOL * lambda && change <= POWER_TOL {
            return Ok((lambda - 1.0, x));
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_MAX_ITER,
    })
}

/// Maximum cycle mean of the digraph with arc weights `w[i][j]` (`-inf` for
/// absent arcs), by Karp's algorithm with a virtual source joined to every
/// node.
pub(crate) fn max_cycle_mean(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    // d[k][v]: heaviest walk of exactly k arcs ending at v
    let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    d[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=n {
        for v in 0..n {
            let mut best = f64::NEG_INFINITY;
            for u in 0..n {
                if d[k - 1][u] > f64::NEG_INFINITY && w[u][v] > f64::NEG_INFINITY {
                    best = best.max(d[k - 1][u] + w[u][v]);
                }
            }
            d[k][v] = best;
        }
    }
    let mut result = f64::NEG_INFINITY;
    for v in 0..n {
        if d[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for k in 0..n {
            if d[k][v] > f64::NEG_INFINITY {
                worst = worst.min((d[n][v] - d[k][v]) / (n - k) as f64);
            }
        }
        result = result.max(worst);
    }
    result
}

/// Potentials `p` with `w[i][j] - mean + p[i] - p[j] <= 0` on every arc,
/// from longest-path distances once every cycle has non-positive weight.
pub(crate) fn potentials(w: &[Vec<f64>], mean: f64) -> Vec<f64> {
    let n = w.len();
    let mut dist = vec![0.0f64; n];
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            for v in 0..n {
                if w[u][v] == f64::NEG_INFINITY {
                    continue;
                }
                let cand = dist[u] + w[u][v] - mean;
                if cand > dist[v] + 1e-15 {
                    dist[v] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    // reduced weight w - mean + p_i - p_j = w - mean + dist_u - dist_v <= 0
    dist
}
