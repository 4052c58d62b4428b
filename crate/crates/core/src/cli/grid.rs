//! Command-line value syntaxes: grids, lists and rank selections.

use std::str::FromStr;

/// `MIN:MAX:COUNT` (evenly spaced, endpoints included) or a comma list.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Range { min, max, count } => (0..*count)
                .map(|i| {
                    if i + 1 == *count {
                        *max
                    } else {
                        min + (max - min) * i as f64 / (*count - 1) as f64
                    }
                })
                .collect(),
            Grid::List(v) => v.clone(),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [min, max, count] => {
                let (min, max) = (parse_f64(min)?, parse_f64(max)?);
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| format!("`{count}` is not a point count"))?;
                if count < 2 {
                    return Err("a grid needs at least 2 points".into());
                }
                if !(min < max) {
                    return Err(format!("grid minimum {min} must be below maximum {max}"));
                }
                Ok(Grid::Range { min, max, count })
            }
            [list] => {
                let values = list.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
                Ok(Grid::List(values))
            }
            _ => Err(format!("`{s}` is neither MIN:MAX:COUNT nor a comma list")),
        }
    }
}

/// Comma-separated word lengths, each at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct KList(pub Vec<usize>);

impl FromStr for KList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let ks = s
            .split(',')
            .map(|p| match p.trim().parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(format!("`{p}` is not a word length >= 1")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KList(ks))
    }
}

/// Ranks to evaluate: explicit positive integers, or `log-uniform:COUNT`
/// points spread evenly in `log n` over `[1, m^k]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Ranks {
    List(Vec<u128>),
    LogUniform(usize),
}

impl Ranks {
    /// `(exact rank if representable, log n)` pairs for words of length `k`
    /// over `m` letters. Log-uniform points are rounded to whole ranks
    /// (at most `m^k`) while those fit in an `f64` mantissa, and deduplicated.
    pub fn log_ranks(&self, k: usize, m: usize) -> Vec<(Option<u128>, f64)> {
        let log_m = (m as f64).ln();
        let total = u32::try_from(k).ok().and_then(|k| (m as u128).checked_pow(k));
        match self {
            Ranks::List(ns) => ns.iter().map(|&n| (Some(n), (n as f64).ln())).collect(),
            Ranks::LogUniform(count) => {
                let top = k as f64 * log_m;
                let mut out: Vec<(Option<u128>, f64)> = Vec::with_capacity(*count);
                for i in 0..*count {
                    let log_n = top * i as f64 / (*count - 1) as f64;
                    let point = if log_n < 53.0 * std::f64::consts::LN_2 {
                        let mut n = (log_n.exp().round() as u128).max(1);
                        if let Some(total) = total {
                            n = n.min(total);
                        }
                        (Some(n), (n as f64).ln())
                    } else {
                        (None, log_n)
                    };
                    let dup = out.last().is_some_and(|last| match (last.0, point.0) {
                        (Some(a), Some(b)) => a == b,
                        _ => false,
                    });
                    if !dup {
                        out.push(point);
                    }
                }
                out
            }
        }
    }
}

impl FromStr for Ranks {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(count) = s.strip_prefix("log-uniform:") {
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("`{count}` is not a point count"))?;
            if count < 2 {
                return Err("log-uniform needs at least 2 points".into());
            }
            return Ok(Ranks::LogUniform(count));
        }
        let ns = s
            .split(',')
            .map(|p| match p.trim().parse::<u128>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(format!("`{p}` is not a rank >= 1")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ranks::List(ns))
    }
}
