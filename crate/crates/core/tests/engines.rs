use hetnet_sim::analytic::{
    connection_prob_layer, connection_prob_mbs_joint, connection_prob_mbs_product, coverage_prob_layer, independence_gap,
    interference_laplace, total_coverage, total_coverage_with, AnalyticOptions, LayerCombination,
};
use hetnet_sim::geometry::RadialArrivals;
use hetnet_sim::params::default_paper_scenario;
use hetnet_sim::{estimate_connection_probabilities, estimate_coverage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// Direct simulation of `E[exp(−s Σ_x h_x p |x|^(−α))]` over PPP points beyond
/// `exclusion` inside a large disc.
fn laplace_by_sampling(s: f64, density: f64, power: f64, exclusion: f64, alpha: f64, draws: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let radius = 80.0 * exclusion;
    let values: Vec<f64> = (0..draws)
        .map(|_| {
            let arrivals: Vec<f64> = RadialArrivals::windowed(density, radius, &mut rng)
                .map(|a| a.distance)
                .filter(|&r| r > exclusion)
                .collect();
            let i: f64 = arrivals
                .iter()
                .map(|&r| {
                    let h: f64 = Exp1.sample(&mut rng);
                    h * power * r.powf(-alpha)
                })
                .sum();
            (-s * i).exp()
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn interference_laplace_matches_direct_simulation() {
    let (density, power, exclusion): (f64, f64, f64) = (2e-4, 0.2, 30.0);
    for alpha in [3.5, 4.0, 5.0] {
        // s chosen so the nearest admissible interferer alone gives s·p·r^(−α) = 1
        let s = exclusion.powf(alpha) / power;
        let exact = interference_laplace(s, density, power, exclusion, alpha, 1e-10).unwrap();
        let (mc, se) = laplace_by_sampling(s, density, power, exclusion, alpha, 20_000);
        assert!((exact - mc).abs() <= 3.0 * se, "alpha {alpha}: quadrature {exact} vs sampled {mc} (se {se})");
    }
}

#[test]
fn single_layer_total_coverage_agrees_across_engines() {
    let mut p = default_paper_scenario().with_density_ratio(10.0);
    p.layers.truncate(1);
    let theta = p.snr_threshold;
    let analytic = total_coverage(&p, theta, &AnalyticOptions::with_seed(3)).unwrap();
    let mc = estimate_coverage(&p, theta, 50_000, 3).total;
    let se = (mc.std_error.powi(2) + analytic.abs_error_bound.powi(2)).sqrt();
    assert!(
        (mc.value - analytic.value).abs() <= 3.0 * se,
        "mc {} vs analytic {} (se {se})",
        mc.value,
        analytic.value
    );
}

#[test]
fn single_layer_connection_agrees_across_engines() {
    let mut p = default_paper_scenario().with_density_ratio(3.0);
    p.layers.truncate(1);
    let opts = AnalyticOptions::with_seed(8);
    let product = connection_prob_mbs_product(&p, &opts).unwrap();
    let mc = estimate_connection_probabilities(&p, 50_000, 8).p_mbs;
    let se = (mc.std_error.powi(2) + product.abs_error_bound.powi(2)).sqrt();
    assert!((mc.value - product.value).abs() <= 3.0 * se, "mc {} vs {}", mc.value, product.value);
}

#[test]
fn independence_gap_grows_with_layer_count() {
    let opts = AnalyticOptions {
        samples: 20_000,
        ..AnalyticOptions::with_seed(4)
    };
    let gaps: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&l| {
            let mut p = default_paper_scenario().with_density_ratio(2.0);
            p.layers.truncate(l);
            let product = connection_prob_mbs_product(&p, &opts).unwrap().value;
            let joint = connection_prob_mbs_joint(&p, &opts).unwrap().value;
            assert!(joint >= product - 1e-3, "l = {l}: joint {joint} below product {product}");
            independence_gap(product, joint)
        })
        .collect();
    assert!(gaps[0] < 2e-3, "{gaps:?}");
    assert!(gaps[1] > gaps[0] && gaps[2] > gaps[1], "{gaps:?}");
}

#[test]
fn analytic_outputs_are_probabilities() {
    let opts = AnalyticOptions {
        samples: 5_000,
        ..AnalyticOptions::with_seed(5)
    };
    for ratio in [1.0, 20.0, 100.0] {
        for bias in [1.0, 8.0] {
            for k in [1, 3] {
                let mut p = default_paper_scenario().with_density_ratio(ratio).with_uniform_bias(bias);
                p.layers.truncate(3);
                p.cluster_size = k;
                for theta in [0.1, 5.0, 50.0] {
                    for combination in [LayerCombination::ShareWeighted, LayerCombination::LiteralSum] {
                        let t = total_coverage_with(&p, theta, p.mbs_interference, combination, &opts).unwrap();
                        let mut values = vec![t.p_mbs.value, t.mbs_conditional.value];
                        values.extend(t.layer_win.iter().map(|w| w.value));
                        values.extend(t.per_layer_conditional.iter().flatten().map(|c| c.value));
                        if combination == LayerCombination::ShareWeighted {
                            values.extend([t.total.value, t.sbs_conditional.value]);
                        }
                        for v in values {
                            assert!((0.0..=1.0).contains(&v), "{v} at ratio {ratio} bias {bias} k {k} theta {theta}");
                        }
                    }
                    let c = coverage_prob_layer(&p, 2, theta, &opts).unwrap().value;
                    assert!((0.0..=1.0).contains(&c));
                }
                assert!((0.0..=1.0).contains(&connection_prob_layer(&p, 3, &opts).unwrap().value));
            }
        }
    }
}
