mod common;

use common::ks_test;
use hetnet_sim::geometry::sample_ppp;
use hetnet_sim::params::{default_paper_scenario, MbsInterference};
use hetnet_sim::{estimate_connection_probabilities, estimate_coverage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn ppp_angles_and_squared_radii_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let radius = 250.0;
    let density = 20.0 / (PI * radius * radius);
    let (mut angles, mut radii2) = (Vec::new(), Vec::new());
    // condition on a fixed count
    while angles.len() < 100_000 {
        let pts = sample_ppp(density, radius, &mut rng);
        if pts.len() != 20 {
            continue;
        }
        for p in pts {
            angles.push(p.y.atan2(p.x).rem_euclid(2.0 * PI));
            radii2.push(p.x * p.x + p.y * p.y);
        }
    }
    let r2 = radius * radius;
    assert!(ks_test(angles, |a| (a / (2.0 * PI)).clamp(0.0, 1.0)) > 0.01);
    assert!(ks_test(radii2, |s| (s / r2).clamp(0.0, 1.0)) > 0.01);
}

#[test]
fn offloading_grows_with_bias_and_density() {
    let base = default_paper_scenario().with_density_ratio(5.0);
    let by_bias: Vec<_> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&b| estimate_connection_probabilities(&base.with_uniform_bias(b), 100_000, 5).p_sbs)
        .collect();
    let by_density: Vec<_> = [2.0, 5.0, 10.0]
        .iter()
        .map(|&r| estimate_connection_probabilities(&base.with_density_ratio(r), 100_000, 5).p_sbs)
        .collect();
    for series in [by_bias, by_density] {
        for w in series.windows(2) {
            assert!(w[1].value > w[0].value, "{} then {}", w[0].value, w[1].value);
            assert!(w[1].ci_disjoint(&w[0]));
        }
    }
}

/// `∫ 2πλ r e^(−λπr²) e^(−θσ²r⁴/p) dr` by composite Simpson on `u = λπr²`.
fn noise_only_coverage(lambda: f64, theta: f64, noise: f64, power: f64) -> f64 {
    let f = |u: f64| {
        let r2 = u / (PI * lambda);
        (-u).exp() * (-theta * noise * r2 * r2 / power).exp()
    };
    let (a, b, n) = (0.0, 60.0, 200_000);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn noise_limited_mbs_coverage_matches_rayleigh_tail() {
    let mut p = default_paper_scenario().with_sbs_density(0.0);
    p.mbs_interference = MbsInterference::NoiseOnly;
    let theta = 2_000.0;
    let expected = noise_only_coverage(p.mbs_density_per_m2, theta, p.noise_power_watts, p.mbs_power_watts);
    assert!(expected > 0.3 && expected < 0.9, "oracle {expected} should be informative");
    let r = estimate_coverage(&p, theta, 100_000, 9);
    let mbs = r.mbs_conditional.estimate.unwrap();
    assert_eq!(r.mbs_conditional.class_trials, 100_000);
    assert!(
        (mbs.value - expected).abs() <= 3.0 * mbs.std_error,
        "mc {} vs oracle {expected} (se {})",
        mbs.value,
        mbs.std_error
    );
}

#[test]
fn noiseless_isolated_service_is_always_covered() {
    let mut p = default_paper_scenario().with_sbs_density(0.0);
    p.noise_power_watts = 0.0;
    p.mbs_interference = MbsInterference::NoiseOnly;
    let r = estimate_coverage(&p, 1e6, 2_000, 1);
    assert_eq!(r.covered, r.trials);
}
