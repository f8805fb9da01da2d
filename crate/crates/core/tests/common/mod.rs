#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One-sample Kolmogorov–Smirnov statistic against `cdf`.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov tail `P(D_n > d)` with the Stephens correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powf(j - 1.0) * (-2.0 * j * j * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

pub fn ks_test(xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    let n = xs.len();
    ks_p_value(ks_statistic(xs, cdf), n)
}

/// `P(Gamma(k, 1) ≤ x)` for integer `k`.
pub fn erlang_cdf(k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= x / j as f64;
        sum += term;
    }
    (1.0 - (-x).exp() * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square p-value of integer `counts` against a Poisson(`mean`)
/// law. Bins with expected count below 5 are merged into their neighbours.
pub fn poisson_chi_square_p(counts: &[u64], mean: f64) -> f64 {
    let n = counts.len() as f64;
    let max = *counts.iter().max().unwrap() as usize;
    let mut observed = vec![0.0; max + 1];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    let mut pmf = Vec::with_capacity(max + 1);
    let mut p = (-mean).exp();
    for j in 0..=max {
        if j > 0 {
            p *= mean / j as f64;
        }
        pmf.push(p);
    }
    // last bin absorbs the upper tail
    let tail = 1.0 - pmf[..max].iter().sum::<f64>();
    pmf[max] = tail;

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (ob, pr) in observed.iter().zip(&pmf) {
        o += ob;
        e += pr * n;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 {
        let last = bins.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (bins.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Prints one acceptance line and returns whether it passed.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {id} {}: {name} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}
