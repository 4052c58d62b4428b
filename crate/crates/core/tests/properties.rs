//! Cross-module properties of Lambda, Lambda* and the exact oracles.

use guesswork::oracle::{enumerate_table, exact_table, typeclass_table, GuessworkTable};
use guesswork::rate::{RateFunction, DEFAULT_ALPHA_MAX};
use guesswork::scgf::ScgfCurve;
use guesswork::sources::{IidSource, MarkovSource, SourceSpec};
use proptest::prelude::*;

const CAP: u64 = 10_000_000;

fn skewed() -> IidSource {
    IidSource::from_probs(&[0.4, 0.4, 0.2]).unwrap()
}

fn markov(rows: &[[f64; 2]; 2]) -> SourceSpec {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    MarkovSource::with_uniform_initial(&rows).unwrap().into()
}

fn rate_of(spec: &SourceSpec) -> RateFunction {
    RateFunction::new(ScgfCurve::new(spec).unwrap())
}

fn exact_at(table: &GuessworkTable, log_n: f64) -> f64 {
    if log_n < 36.0 {
        table.guesswork_pmf((log_n.exp().round() as u128).max(1)).unwrap()
    } else {
        table.guesswork_pmf_log_rank(log_n).unwrap()
    }
}

#[test]
fn nth_word_estimate_gap_shrinks() {
    let source = skewed();
    let rate = rate_of(&source.clone().into());
    let tables: Vec<(usize, GuessworkTable)> = [10, 20, 50, 100]
        .iter()
        .map(|&k| (k, typeclass_table(&source, k, CAP).unwrap()))
        .collect();
    for x in [0.3, 0.6, 0.9] {
        let target = x + rate.rate_at(x).unwrap().as_f64();
        let gaps: Vec<f64> = tables
            .iter()
            .map(|(k, t)| {
                let kf = *k as f64;
                let log_n = if kf * x < 36.0 {
                    (kf * x).exp().round().ln()
                } else {
                    kf * x
                };
                (exact_at(t, log_n) / kf + target).abs()
            })
            .collect();
        assert!(
            gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12),
            "x = {x}: {gaps:?}"
        );
    }
}

#[test]
fn rate_is_strictly_convex_past_the_turn() {
    for spec in [
        skewed().into(),
        markov(&[[0.6, 0.4], [0.9, 0.1]]),
        markov(&[[0.85, 0.15], [0.15, 0.85]]),
    ] {
        let r = rate_of(&spec);
        let (lo, hi) = (r.turn(), r.support_rate());
        let xs: Vec<f64> = (0..100).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / 100.0).collect();
        let v: Vec<f64> = xs.iter().map(|&x| r.rate_at(x).unwrap().as_f64()).collect();
        for w in v.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] > -1e-10);
        }
        assert!(v.iter().all(|&y| y >= 0.0));
    }
}

#[test]
fn rate_is_continuous_on_a_grid() {
    let r = rate_of(&skewed().into());
    let step = 3f64.ln() / 200.0;
    let v: Vec<f64> = (0..=200)
        .map(|i| r.rate_at(step * i as f64).unwrap().as_f64())
        .collect();
    for w in v.windows(2) {
        assert!((w[1] - w[0]).abs() <= step * (DEFAULT_ALPHA_MAX + 1.0));
    }
}

#[test]
fn markov_moments_approach_lambda() {
    let spec = markov(&[[0.6, 0.4], [0.9, 0.1]]);
    let c = ScgfCurve::new(&spec).unwrap();
    for a in [-0.5, 1.0] {
        let gaps: Vec<f64> = [4, 8, 12, 16]
            .iter()
            .map(|&k| {
                let t = enumerate_table(&spec, k, CAP).unwrap();
                (t.scaled_log_moment(a).scaled_log_moment - c.lambda(a).unwrap()).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "alpha {a}: {gaps:?}");
    }
}

#[test]
fn renyi_matches_single_letter_value() {
    // for i.i.d. letters the specific Renyi entropy is the single-letter one
    let p: [f64; 3] = [0.4, 0.4, 0.2];
    let c = ScgfCurve::new(&skewed().into()).unwrap();
    for beta in [0.25, 0.5, 2.0, 3.0] {
        let r = (p.iter().map(|x| x.powf(beta)).sum::<f64>()).ln() / (1.0 - beta);
        assert!((c.renyi_specific(beta).unwrap() - r).abs() < 1e-12);
    }
}

#[test]
fn shannon_entropy_oracle_is_additive_for_iid() {
    let s: SourceSpec = skewed().into();
    let h1 = exact_table(&s, 1, CAP).unwrap().shannon_entropy();
    let h7 = exact_table(&s, 7, CAP).unwrap().shannon_entropy();
    assert!((h1 - h7).abs() < 1e-12);
}

proptest! {
    #[test]
    fn lambda_is_permutation_invariant(
        w in prop::collection::vec(0.05f64..1.0, 2..6),
        alpha in -0.95f64..6.0,
        shift in 0usize..6,
    ) {
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mut q = p.clone();
        let len = q.len();
        q.rotate_left(shift % len);
        let a = ScgfCurve::new(&IidSource::from_probs(&p).unwrap().into()).unwrap();
        let b = ScgfCurve::new(&IidSource::from_probs(&q).unwrap().into()).unwrap();
        prop_assert!((a.lambda(alpha).unwrap() - b.lambda(alpha).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn lambda_is_convex_and_increasing(
        a in 0.01f64..0.99,
        b in 0.01f64..0.99,
        alpha in -0.9f64..5.0,
    ) {
        let c = ScgfCurve::new(&markov(&[[a, 1.0 - a], [b, 1.0 - b]])).unwrap();
        let h = 1e-2;
        let (l0, l1, l2) = (
            c.lambda(alpha - h).unwrap(),
            c.lambda(alpha).unwrap(),
            c.lambda(alpha + h).unwrap(),
        );
        prop_assert!(l0 - 2.0 * l1 + l2 > -1e-10);
        prop_assert!(c.lambda_prime(alpha).unwrap() >= -1e-12);
    }

    #[test]
    fn rate_never_negative(x in 0.0f64..1.0986122886681098) {
        let r = RateFunction::new(ScgfCurve::new(&skewed().into()).unwrap());
        prop_assert!(r.rate_at(x).unwrap().as_f64() >= 0.0);
    }
}
