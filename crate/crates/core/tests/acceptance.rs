//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). It exits non-zero if a
//! criterion fails that is not listed in `KNOWN_RED`; known-red criteria are
//! still printed as FAIL with their measured values.

use std::f64::consts::LN_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use guesswork::oracle::{enumerate_table, exact_table, typeclass_table, GuessworkTable};
use guesswork::rate::{ApproxQuery, RateFunction};
use guesswork::scgf::{ScgfCurve, TurnClass};
use guesswork::sources::{make_counterexample_source, IidSource, MarkovSource, SourceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose failure is a documented conflict, not a regression.
/// Criterion 3: the golden-ratio chain with equiprobable initial state has 2
/// words of maximal probability at k = 4; the count of 8 is the number of
/// words that avoid the letter pair "22".
const KNOWN_RED: &[usize] = &[3];

const MONOTONE_SLACK: f64 = 1e-12;
const CAP: u64 = 10_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn phi() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn iid(p: &[f64]) -> SourceSpec {
    IidSource::from_probs(p).unwrap().into()
}

fn markov(rows: &[&[f64]], initial: Option<&[f64]>) -> SourceSpec {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    match initial {
        Some(i) => MarkovSource::from_probs(&rows, i).unwrap().into(),
        None => MarkovSource::with_uniform_initial(&rows).unwrap().into(),
    }
}

fn uniform(m: usize) -> SourceSpec {
    IidSource::uniform(m).unwrap().into()
}

fn skewed() -> SourceSpec {
    iid(&[0.4, 0.4, 0.2])
}

fn two_state_chains() -> [(SourceSpec, f64, &'static str); 3] {
    [
        (markov(&[&[0.5, 0.5], &[0.5, 0.5]], None), LN_2, "log 2"),
        (markov(&[&[0.6, 0.4], &[0.9, 0.1]], None), phi().ln(), "log phi"),
        (markov(&[&[0.85, 0.15], &[0.15, 0.85]], None), 0.0, "0"),
    ]
}

fn non_increasing(gaps: &[f64]) -> bool {
    gaps.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK)
}

fn fmt_gaps(gaps: &[f64]) -> String {
    let parts: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// A random distribution on `m` letters; with `ties`, the largest letter's
/// probability is copied onto another letter before normalising.
fn random_distribution(rng: &mut ChaCha8Rng, m: usize, ties: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    if ties && m > 1 {
        let (imax, &vmax) = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let other = (imax + 1 + rng.gen_range(0..m - 1)) % m;
        w[other] = vmax;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn maximal_letters(p: &[f64]) -> usize {
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    p.iter().filter(|&&x| x == max).count()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<Vec<f64>> = vec![
        vec![0.4, 0.4, 0.2],
        vec![0.5, 0.5],
        vec![0.5; 2],
        vec![1.0 / 3.0; 3],
        vec![0.2; 5],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..200 {
        let m = rng.gen_range(2..=6);
        cases.push(random_distribution(&mut rng, m, i % 2 == 0));
    }
    let mut worst = 0.0f64;
    let mut failures = 0;
    for p in &cases {
        let spec = iid(p);
        let want = (maximal_letters(p) as f64).ln();
        match ScgfCurve::new(&spec) {
            Ok(c) => {
                let err = (c.turn().value - want).abs();
                worst = worst.max(err);
                if err > 1e-4 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(10),
        format!(
            "{} sources, max |turn - log #argmax| = {worst:.2e} (tol 1e-4), failures {failures}, {:.2?}",
            cases.len(),
            elapsed
        ),
    )
}

fn random_two_state(rng: &mut ChaCha8Rng, i: usize) -> [[f64; 2]; 2] {
    if i % 50 == 7 {
        return [[0.5, 0.5], [0.5, 0.5]];
    }
    match i % 4 {
        // golden family: p11^2 = p12 p21 with p22 below both
        0 => {
            let a = rng.gen_range(0.51..0.61);
            let p21 = a * a / (1.0 - a);
            [[a, 1.0 - a], [p21, 1.0 - p21]]
        }
        // equal diagonal entries
        1 => {
            let a = rng.gen_range(0.05..0.95);
            let b = if rng.gen_bool(0.3) { a } else { rng.gen_range(0.05..0.95) };
            [[a, 1.0 - a], [1.0 - b, b]]
        }
        _ => {
            let a = rng.gen_range(0.01..0.99);
            let b = rng.gen_range(0.01..0.99);
            [[a, 1.0 - a], [b, 1.0 - b]]
        }
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for (spec, want, name) in two_state_chains() {
        let c = ScgfCurve::new(&spec).unwrap();
        let err = (c.turn().value - want).abs();
        pass &= err <= 1e-3;
        detail.push(format!("{name}: {:.6} (err {err:.1e})", c.turn().value));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tally = [0usize; 3];
    let mut unclassified = Vec::new();
    for i in 0..1000 {
        let t = random_two_state(&mut rng, i);
        let spec = markov(&[&t[0], &t[1]], None);
        match ScgfCurve::new(&spec).map(|c| (c.turn().class, c.turn().value)) {
            Ok((Some(class), _)) => {
                tally[TurnClass::ALL.iter().position(|c| *c == class).unwrap()] += 1;
            }
            Ok((None, v)) => unclassified.push(format!("{t:?} -> {v}")),
            Err(e) => unclassified.push(format!("{t:?} -> {e}")),
        }
    }
    let elapsed = start.elapsed();
    pass &= unclassified.is_empty() && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "{}; 1000 random: zero {} / log_phi {} / log_2 {}, unclassified {}{}, {:.2?}",
            detail.join(", "),
            tally[0],
            tally[1],
            tally[2],
            unclassified.len(),
            unclassified.first().map(|s| format!(" (first: {s})")).unwrap_or_default(),
            elapsed
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let spec = markov(&[&[0.6, 0.4], &[0.9, 0.1]], Some(&[0.5, 0.5]));
    let curve = ScgfCurve::new(&spec).unwrap();
    let log_phi = phi().ln();
    let mut counts = Vec::new();
    let mut gaps = Vec::new();
    for k in [4, 8, 12, 16, 20] {
        let t = enumerate_table(&spec, k, CAP).unwrap();
        let top = t.empirical_turn_count();
        counts.push(top.exact.unwrap());
        gaps.push((top.log / k as f64 - log_phi).abs());
    }
    let strictly_shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
    let elapsed = start.elapsed();
    let critical = curve.critical_word_count(4).unwrap().exact.unwrap();
    let eight = counts[0] == 8;
    outcome(
        eight && strictly_shrinking && elapsed < Duration::from_secs(60),
        format!(
            "k=4 maximal-probability words = {} (required 8: {}); words on maximal-mean cycles at k=4 = {critical}; \
             top counts k=4..20 {:?}, gaps to log phi {} strictly shrinking: {}, {:.2?}",
            counts[0],
            if eight { "ok" } else { "NOT MET" },
            counts,
            fmt_gaps(&gaps),
            strictly_shrinking,
            elapsed
        ),
    )
}

fn criterion_4() -> Outcome {
    let sources: Vec<(&str, SourceSpec)> = vec![
        ("iid(0.4,0.4,0.2)", skewed()),
        ("iid(0.5,0.5)", iid(&[0.5, 0.5])),
        ("uniform3", uniform(3)),
        ("uniform5", uniform(5)),
        ("markov half", markov(&[&[0.5, 0.5], &[0.5, 0.5]], None)),
        ("markov golden", markov(&[&[0.6, 0.4], &[0.9, 0.1]], None)),
        ("markov sticky", markov(&[&[0.85, 0.15], &[0.15, 0.85]], None)),
        (
            "markov 3-state",
            markov(&[&[0.5, 0.3, 0.2], &[0.1, 0.6, 0.3], &[0.4, 0.4, 0.2]], None),
        ),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, spec) in &sources {
        let c = ScgfCurve::new(spec).unwrap();
        for a in [-1.0, -2.0, -10.0] {
            pass &= (c.lambda(a).unwrap() - c.gamma()).abs() <= 1e-12;
        }
        let t = exact_table(spec, 12, CAP).unwrap();
        let gap = (t.levels()[0].log_prob / 12.0 - c.gamma()).abs();
        if matches!(spec, SourceSpec::Iid(_)) {
            pass &= gap < 0.02;
        }
        notes.push(format!("{name} {gap:.1e}"));
    }
    outcome(
        pass,
        format!(
            "Lambda = gamma on alpha in {{-1,-2,-10}} for {} sources; |k^-1 log P(G=1) - gamma| at k=12: {}",
            sources.len(),
            notes.join(", ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let spec = skewed();
    let source = match &spec {
        SourceSpec::Iid(s) => s.clone(),
        _ => unreachable!(),
    };
    let c = ScgfCurve::new(&spec).unwrap();
    let tables: Vec<GuessworkTable> = [4, 8, 12, 16]
        .iter()
        .map(|&k| typeclass_table(&source, k, CAP).unwrap())
        .collect();
    let mut pass = true;
    let mut notes = Vec::new();
    for a in [-0.5, 0.5, 1.0, 2.0] {
        let lambda = c.lambda(a).unwrap();
        let gaps: Vec<f64> = tables
            .iter()
            .map(|t| (t.scaled_log_moment(a).scaled_log_moment - lambda).abs())
            .collect();
        pass &= non_increasing(&gaps);
        notes.push(format!("alpha={a}: {}", fmt_gaps(&gaps)));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    outcome(pass, format!("gaps over k=4,8,12,16 {}, {:.2?}", notes.join("; "), elapsed))
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    for p in [
        vec![0.4, 0.4, 0.2],
        vec![0.5, 0.5],
        vec![0.7, 0.2, 0.1],
        vec![0.1, 0.2, 0.3, 0.4],
    ] {
        let c = ScgfCurve::new(&iid(&p)).unwrap();
        let h: f64 = p.iter().map(|x| -x * x.ln()).sum();
        worst = worst.max((c.lambda_prime(0.0).unwrap() - h).abs());
    }
    pass &= worst <= 1e-8;
    let spec = skewed();
    let slope = ScgfCurve::new(&spec).unwrap().shannon_slope();
    let gaps: Vec<f64> = [5, 10, 15]
        .iter()
        .map(|&k| (exact_table(&spec, k, CAP).unwrap().expected_log_guesswork() - slope).abs())
        .collect();
    pass &= non_increasing(&gaps);
    outcome(
        pass,
        format!(
            "max |Lambda'(0) - H| = {worst:.1e} (tol 1e-8); |k^-1 E log G - Lambda'(0)| over k=5,10,15 {}",
            fmt_gaps(&gaps)
        ),
    )
}

fn criterion_7() -> Outcome {
    let sources: Vec<(&str, SourceSpec)> = vec![
        ("iid(0.4,0.4,0.2)", skewed()),
        ("iid(0.5,0.5)", iid(&[0.5, 0.5])),
        ("uniform3", uniform(3)),
        ("markov half", markov(&[&[0.5, 0.5], &[0.5, 0.5]], None)),
        ("markov golden", markov(&[&[0.6, 0.4], &[0.9, 0.1]], None)),
        ("markov sticky", markov(&[&[0.85, 0.15], &[0.15, 0.85]], None)),
    ];
    let alphas: Vec<f64> = (0..50).map(|i| -0.9 + 5.9 * i as f64 / 49.0).collect();
    let mut pass = true;
    let mut bic = Vec::new();
    let (mut lin_err, mut zero_err) = (0.0f64, 0.0f64);
    for (name, spec) in &sources {
        let r = RateFunction::new(ScgfCurve::new(spec).unwrap());
        let e = r.biconjugate_check(&alphas).unwrap();
        pass &= e < 1e-6;
        bic.push(format!("{name} {e:.1e}"));
        let turn = r.turn();
        for i in 0..=20 {
            let x = turn * i as f64 / 20.0;
            lin_err = lin_err.max((r.conjugate_by_search(x).unwrap() + x + r.gamma()).abs());
        }
        zero_err = zero_err.max(r.rate_at(r.curve().shannon_slope()).unwrap().as_f64());
    }
    pass &= lin_err <= 1e-8 && zero_err < 1e-8;
    let mut uni_err = 0.0f64;
    for m in [2, 3, 5] {
        let r = RateFunction::new(ScgfCurve::new(&uniform(m)).unwrap());
        let log_m = (m as f64).ln();
        for i in 0..=50 {
            let x = log_m * i as f64 / 50.0;
            uni_err = uni_err.max((r.rate_at(x).unwrap().as_f64() - (log_m - x)).abs());
        }
    }
    pass &= uni_err <= 1e-9;
    outcome(
        pass,
        format!(
            "biconjugate errors {}; linear segment by search {lin_err:.1e}; Lambda*(Lambda'(0)) max {zero_err:.1e}; uniform {uni_err:.1e}",
            bic.join(", ")
        ),
    )
}

/// `sup_x |k^-1 log P_exact(n_k) - k^-1 log approx(n_k)|` with
/// `n_k = round(e^{kx})`, on `x` evenly spread over `[0.1, log 3 - 0.1]`.
fn eq2_sup_gap(rate: &RateFunction, table: &GuessworkTable, k: usize) -> f64 {
    let (lo, hi) = (0.1, 3f64.ln() - 0.1);
    let kf = k as f64;
    (0..60)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 59.0;
            let log_n = kf * x;
            let (exact, log_n) = if log_n < 36.0 {
                let n = (log_n.exp().round() as u128).max(1);
                (table.guesswork_pmf(n).unwrap(), (n as f64).ln())
            } else {
                (table.guesswork_pmf_log_rank(log_n).unwrap(), log_n)
            };
            let approx = rate
                .approx_pmf(&ApproxQuery::from_log_rank(k, log_n).unwrap())
                .unwrap();
            ((exact - approx) / kf).abs()
        })
        .fold(0.0, f64::max)
}

fn criterion_8() -> Outcome {
    let spec = skewed();
    let source = match &spec {
        SourceSpec::Iid(s) => s.clone(),
        _ => unreachable!(),
    };
    let rate = RateFunction::new(ScgfCurve::new(&spec).unwrap());
    let mut gaps = Vec::new();
    let mut k100 = Duration::ZERO;
    let mut levels100 = 0;
    for k in [10, 20, 50, 100] {
        let start = Instant::now();
        let t = typeclass_table(&source, k, CAP).unwrap();
        if k == 100 {
            k100 = start.elapsed();
            levels100 = t.compositions().unwrap_or(0);
        }
        gaps.push(eq2_sup_gap(&rate, &t, k));
    }
    outcome(
        non_increasing(&gaps) && k100 < Duration::from_secs(5),
        format!(
            "sup gaps over k=10,20,50,100 {}; k=100 type classes {levels100} built in {:.2?}",
            fmt_gaps(&gaps),
            k100
        ),
    )
}

fn tables_agree(a: &GuessworkTable, b: &GuessworkTable) -> bool {
    a.levels().len() == b.levels().len()
        && a.levels().iter().zip(b.levels()).all(|(x, y)| {
            (x.log_prob - y.log_prob).abs() <= 1e-12 && x.count.exact == y.count.exact
        })
        && a.zero_count().exact == b.zero_count().exact
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    let mut worst_mass = 0.0f64;
    for i in 0..100 {
        let m = rng.gen_range(2..=6);
        let max_k = ((1e5f64).ln() / (m as f64).ln()).floor() as usize;
        let k = rng.gen_range(1..=max_k);
        let mut p = random_distribution(&mut rng, m, i % 3 == 0);
        if i % 5 == 0 {
            // a zero-probability letter
            p[0] = 0.0;
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= total);
        }
        let source = IidSource::from_probs(&p).unwrap();
        let e = enumerate_table(&source.clone().into(), k, CAP).unwrap();
        let t = typeclass_table(&source, k, CAP).unwrap();
        if !tables_agree(&e, &t) {
            mismatches += 1;
        }
        worst_mass = worst_mass
            .max(e.log_total_probability().exp_m1().abs())
            .max(t.log_total_probability().exp_m1().abs());
    }
    for (spec, _, _) in two_state_chains() {
        let t = enumerate_table(&spec, 10, CAP).unwrap();
        worst_mass = worst_mass.max(t.log_total_probability().exp_m1().abs());
    }
    outcome(
        mismatches == 0 && worst_mass <= 1e-9,
        format!("100 random sources: {mismatches} table mismatches; max |sum pmf - 1| = {worst_mass:.1e}"),
    )
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (m, k, eps) in [(2, 8, 0.1), (3, 6, 0.05)] {
        let spec: SourceSpec = make_counterexample_source(m, k, eps).unwrap().into();
        let t = enumerate_table(&spec, k, CAP).unwrap();
        let top = t.empirical_turn_count().exact;
        pass &= top == Some(1);
        let turn = ScgfCurve::new(&uniform(m)).unwrap().turn().value;
        let err = (turn - (m as f64).ln()).abs();
        pass &= err <= 1e-4;
        notes.push(format!(
            "(m={m},k={k},eps={eps}): top-level count {}, uniform turn {turn:.6} vs log m {:.6}",
            top.map_or("?".into(), |c| c.to_string()),
            (m as f64).ln()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (n, run) in criteria {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let known = KNOWN_RED.contains(&n);
        let tag = match (result.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{tag} criterion {n}: {}", result.detail);
        if !result.pass && !known {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
