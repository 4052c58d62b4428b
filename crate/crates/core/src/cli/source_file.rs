//! Source-spec files.
//!
//! A TOML document with a `type` key and the fields that type needs:
//!
//! ```toml
//! type = "iid"              # probs = [0.4, 0.4, 0.2]
//! type = "markov"           # transition = [0.6, 0.4, 0.9, 0.1] (row-major), initial optional
//! type = "explicit"         # k = 2, probs over the m^k words in lexicographic order, m optional
//! type = "counterexample"   # m = 3, k = 6, eps = 0.05
//! ```

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sources::{
    make_counterexample_source, Alphabet, ExplicitSource, IidSource, MarkovSource, SourceSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Iid,
    Markov,
    Explicit,
    Counterexample,
}

impl SourceKind {
    pub fn label(&self) -> &'static str {
        match self {
            SourceKind::Iid => "iid",
            SourceKind::Markov => "markov",
            SourceKind::Explicit => "explicit",
            SourceKind::Counterexample => "counterexample",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceFile {
    #[serde(rename = "type")]
    pub kind: SourceKind,
    pub probs: Option<Vec<f64>>,
    pub transition: Option<Vec<f64>>,
    pub initial: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub eps: Option<f64>,
}

fn require<T>(field: Option<T>, name: &str, kind: SourceKind) -> Result<T> {
    field.ok_or_else(|| {
        Error::InvalidParameter(format!("source type `{}` needs field `{name}`", kind.label()))
    })
}

fn reject<T>(field: &Option<T>, name: &str, kind: SourceKind) -> Result<()> {
    match field {
        Some(_) => Err(Error::InvalidParameter(format!(
            "field `{name}` does not apply to source type `{}`",
            kind.label()
        ))),
        None => Ok(()),
    }
}

/// Integer `r` with `r^k == n`, if there is one.
fn integer_root(n: usize, k: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / k as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1)
        .find(|&r| r >= 1 && r.checked_pow(k as u32) == Some(n))
}

impl SourceFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("source file: {e}")))
    }

    pub fn into_spec(self) -> Result<SourceSpec> {
        let kind = self.kind;
        match kind {
            SourceKind::Iid => {
                for (f, n) in [(&self.transition, "transition"), (&self.initial, "initial")] {
                    reject(f, n, kind)?;
                }
                reject(&self.k, "k", kind)?;
                reject(&self.eps, "eps", kind)?;
                let probs = require(self.probs, "probs", kind)?;
                if let Some(m) = self.m {
                    if m != probs.len() {
                        return Err(Error::LengthMismatch {
                            expected: m,
                            got: probs.len(),
                        });
                    }
                }
                Ok(IidSource::from_probs(&probs)?.into())
            }
            SourceKind::Markov => {
                reject(&self.probs, "probs", kind)?;
                reject(&self.k, "k", kind)?;
                reject(&self.eps, "eps", kind)?;
                let flat = require(self.transition, "transition", kind)?;
                let m = match self.m {
                    Some(m) => m,
                    None => integer_root(flat.len(), 2).ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "transition has {} entries, not a square number",
                            flat.len()
                        ))
                    })?,
                };
                if m == 0 || flat.len() != m * m {
                    return Err(Error::LengthMismatch {
                        expected: m * m,
                        got: flat.len(),
                    });
                }
                let rows: Vec<Vec<f64>> = flat.chunks(m).map(<[f64]>::to_vec).collect();
                let source = match self.initial {
                    Some(initial) => MarkovSource::from_probs(&rows, &initial)?,
                    None => MarkovSource::with_uniform_initial(&rows)?,
                };
                Ok(source.into())
            }
            SourceKind::Explicit => {
                reject(&self.transition, "transition", kind)?;
                reject(&self.initial, "initial", kind)?;
                reject(&self.eps, "eps", kind)?;
                let probs = require(self.probs, "probs", kind)?;
                let k = require(self.k, "k", kind)?;
                if k == 0 {
                    return Err(Error::InvalidParameter("k must be at least 1".into()));
                }
                let m = match self.m {
                    Some(m) => m,
                    None => integer_root(probs.len(), k).ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "{} probabilities is not m^{k} for any alphabet size m",
                            probs.len()
                        ))
                    })?,
                };
                let logs = probs.iter().map(|p| p.ln()).collect();
                Ok(ExplicitSource::from_log_probs(Alphabet::new(m)?, k, logs)?.into())
            }
            SourceKind::Counterexample => {
                for (f, n) in [
                    (&self.probs, "probs"),
                    (&self.transition, "transition"),
                    (&self.initial, "initial"),
                ] {
                    reject(f, n, kind)?;
                }
                let m = require(self.m, "m", kind)?;
                let k = require(self.k, "k", kind)?;
                let eps = require(self.eps, "eps", kind)?;
                Ok(make_counterexample_source(m, k, eps)?.into())
            }
        }
    }
}
