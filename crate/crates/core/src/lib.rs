//! Guesswork large deviations for i.i.d. and Markov word sources.
//!
//! The crate computes the scaled cumulant generating function `Lambda` of
//! `log G(W_k)`, its Legendre-Fenchel conjugate `Lambda*` (the rate function of
//! `k^-1 log G(W_k)`), and the direct estimate
//! `P(G(W_k) = n) ~ n^-1 exp(-k Lambda*(k^-1 log n))`, together with exact
//! brute-force and type-class oracles to check them against.

// `!(x > y)` guards are used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod logspace;
pub mod oracle;
pub mod rate;
pub mod scgf;
pub mod sources;

pub use error::{Error, Result};
