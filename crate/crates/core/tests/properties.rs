use hetnet_sim::association::associate_distances;
use hetnet_sim::energy::{mbs_energy, sbs_layer_energy, total_energy, SbsLoad};
use hetnet_sim::geometry::{ordered_knn_distances, OrderedDistances, Point2D};
use hetnet_sim::harness::{Engine, ResultRow, ResultTable, SweepVariable, TableMetadata};
use hetnet_sim::params::{default_paper_scenario, LayerParams, MbsInterference, SystemParams};
use hetnet_sim::propagation::{path_gain, rss_cluster};
use hetnet_sim::{load_config, to_config_string, validate, MonteCarloEstimate};
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = SystemParams> {
    (
        (1usize..6, 1usize..4),
        (0.1f64..100.0, 1e-7f64..1e-5, 1.0f64..200.0),
        prop::collection::vec((1e-3f64..10.0, 0.5f64..50.0), 6),
        (2.1f64..6.0, 0.0f64..1e-9, 1e-3f64..1e3, any::<bool>()),
        (1_000.0f64..20_000.0, 100u64..1_000_000, 0u64..=i64::MAX as u64),
        (0.0f64..500.0, 0.0f64..10.0, 0.0f64..10.0, 1u64..500, 1u64..500),
    )
        .prop_map(|((l, k), (pm, lm, ratio), layer_vals, (alpha, noise, theta, co), (window, trials, seed), energy)| {
            let mut p = default_paper_scenario();
            p.mbs_power_watts = pm;
            p.mbs_density_per_m2 = lm;
            p.layers = layer_vals[..l]
                .iter()
                .enumerate()
                .map(|(i, &(power, bias))| LayerParams {
                    index: i + 1,
                    tx_power_watts: power,
                    bias,
                    density_per_m2: lm * ratio,
                })
                .collect();
            p.cluster_size = k;
            p.path_loss_exponent = alpha;
            p.noise_power_watts = noise;
            p.snr_threshold = theta;
            p.mbs_interference = if co { MbsInterference::CoTier } else { MbsInterference::NoiseOnly };
            p.window_radius_m = window;
            p.sim.trials = trials;
            p.sim.seed = seed;
            p.energy.mbs_static_watts = energy.0;
            p.energy.sbs_static_watts = energy.1;
            p.energy.backhaul_watts = energy.2;
            p.energy.num_users = energy.3;
            p.energy.mbs_capacity_users = energy.4;
            p
        })
}

fn ordered(mut v: Vec<f64>) -> OrderedDistances {
    v.sort_by(f64::total_cmp);
    OrderedDistances::new(v).unwrap()
}

proptest! {
    #[test]
    fn config_round_trip(p in scenario()) {
        let text = to_config_string(&p).unwrap();
        prop_assert_eq!(load_config(&text).unwrap(), p);
    }

    #[test]
    fn knn_matches_sort_and_truncate(
        pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..60),
        k in 1usize..8,
    ) {
        let points: Vec<Point2D> = pts.iter().map(|&(x, y)| Point2D::new(x, y)).collect();
        let mut all: Vec<f64> = points.iter().map(Point2D::distance_to_origin).collect();
        all.sort_by(f64::total_cmp);
        match ordered_knn_distances(&points, k) {
            Ok(d) => {
                prop_assert!(k <= points.len());
                prop_assert_eq!(d.values(), &all[..k]);
            }
            Err(_) => prop_assert!(k > points.len() || all[0] <= 0.0),
        }
    }

    #[test]
    fn path_gain_is_reciprocal(d in 1e-3f64..1e4, alpha in 2.01f64..6.0) {
        let prod = path_gain(d, alpha).unwrap() * path_gain(1.0 / d, alpha).unwrap();
        prop_assert!((prod - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_rss_is_monotone(
        dists in prop::collection::vec(1.0f64..1e3, 2..5),
        shrink in 0.1f64..0.99,
        bias in 0.5f64..20.0,
        extra_bias in 1.01f64..5.0,
        which in 0usize..5,
    ) {
        let layer = LayerParams { index: 1, tx_power_watts: 0.2, bias, density_per_m2: 1e-5 };
        let base = ordered(dists.clone());
        let rss = rss_cluster(&layer, &base, 4.0).unwrap().watts();

        let more_bias = LayerParams { bias: bias * extra_bias, ..layer.clone() };
        prop_assert!(rss_cluster(&more_bias, &base, 4.0).unwrap().watts() > rss);

        let mut closer = dists.clone();
        let i = which % closer.len();
        closer[i] *= shrink;
        prop_assert!(rss_cluster(&layer, &ordered(closer), 4.0).unwrap().watts() > rss);

        let mut fewer = base.values().to_vec();
        fewer.remove(i);
        prop_assert!(rss_cluster(&layer, &ordered(fewer), 4.0).unwrap().watts() <= rss);
    }

    #[test]
    fn association_ignores_global_power_scale(
        r_m in 1.0f64..2e3,
        clusters in prop::collection::vec(prop::collection::vec(1.0f64..2e3, 2), 1..6),
        exponent in -20i32..20,
    ) {
        let mut p = default_paper_scenario();
        p.layers.truncate(clusters.len());
        let c: Vec<Option<OrderedDistances>> = clusters.into_iter().map(|v| Some(ordered(v))).collect();
        let scale = 2f64.powi(exponent);
        let a = associate_distances(r_m, &c, &p).kind;
        let b = associate_distances(r_m, &c, &p.with_scaled_powers(scale)).kind;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn complementary_probabilities_sum_to_one(mbs in 0u64..=10_000, extra in 0u64..10_000) {
        let n = mbs + extra + 1;
        let p_mbs = MonteCarloEstimate::from_counts(mbs, n, 0).value;
        let p_sbs = 1.0 - p_mbs;
        prop_assert_eq!(p_mbs + p_sbs, 1.0);
    }

    #[test]
    fn energy_is_linear_and_affine(
        k in 1usize..6,
        p in 0.0f64..1.0,
        scale in 2u64..10,
        pm in 1.0f64..50.0,
    ) {
        let e = default_paper_scenario().energy;
        let one = sbs_layer_energy(&e, k, p).unwrap();
        let k_scaled = sbs_layer_energy(&e, k * scale as usize, p).unwrap();
        prop_assert!((k_scaled - scale as f64 * one).abs() <= 1e-12 * k_scaled.max(1.0));
        let more_users = hetnet_sim::EnergyParams { num_users: e.num_users * scale, ..e.clone() };
        let n_scaled = sbs_layer_energy(&more_users, k, p).unwrap();
        prop_assert!((n_scaled - scale as f64 * one).abs() <= 1e-12 * n_scaled.max(1.0));

        let at0 = mbs_energy(&e, pm, 0.0).unwrap();
        let at1 = mbs_energy(&e, pm, 1.0).unwrap();
        let slope = e.num_users as f64 * pm / e.mbs_capacity_users as f64;
        prop_assert_eq!(at0, e.mbs_static_watts);
        prop_assert!((at1 - at0 - slope).abs() < 1e-9);
        prop_assert!((mbs_energy(&e, pm, p).unwrap() - (at0 + slope * p)).abs() < 1e-9);
    }

    #[test]
    fn energy_parts_add_up(weights in prop::collection::vec(0.0f64..1.0, 10), p_mbs in 0.0f64..1.0) {
        let params = default_paper_scenario();
        let sum: f64 = weights.iter().sum::<f64>().max(1e-12);
        let mut shares: Vec<f64> = weights.iter().map(|w| w * (1.0 - p_mbs) / sum).collect();
        let drift = (1.0 - p_mbs) - shares.iter().sum::<f64>();
        shares[0] = (shares[0] + drift).max(0.0);
        if let Ok(b) = total_energy(&params.energy, &params, p_mbs, &shares, SbsLoad::PerLayerShare) {
            prop_assert_eq!(b.mbs_total_watts, b.mbs_static_watts + b.load_watts);
            prop_assert_eq!(b.sbs_total_watts, b.per_layer_watts.iter().sum::<f64>());
            prop_assert_eq!(b.static_watts, b.mbs_static_watts + b.sbs_static_watts);
        }
    }

    #[test]
    fn csv_round_trip(
        entries in prop::collection::btree_map(
            (0u32..50, 0usize..4, any::<bool>()),
            (-1e6f64..1e6, 0.0f64..10.0, 1u64..1_000_000, any::<u64>()),
            1..40,
        ),
    ) {
        let names = ["p_mbs", "layer_win_1", "coverage_layer_10", "energy_sbs_w"];
        let rows: Vec<ResultRow> = entries
            .iter()
            .map(|(&(x, m, mc), &(estimate, error, trials, seed))| ResultRow {
                sweep_value: x as f64 * 0.37,
                metric: names[m].to_string(),
                engine: if mc { Engine::MonteCarlo } else { Engine::Analytic },
                estimate,
                error,
                trials,
                seed,
            })
            .collect();
        let meta = TableMetadata {
            config_hash: "abc".into(),
            tool_version: "0.1.0".into(),
            timestamp: "2026-01-01T00:00:00Z".into(),
            failures: Vec::new(),
        };
        let table = ResultTable::new(SweepVariable::Bias, rows, meta.clone()).unwrap();
        let back = ResultTable::read_csv(table.to_csv_string().as_bytes(), meta).unwrap();
        prop_assert_eq!(back, table);
    }
}

#[test]
fn default_scenario_validates_and_broken_fields_do_not() {
    let p = default_paper_scenario();
    assert!(validate(&p).is_pass());
    let mutations: Vec<(&str, Box<dyn Fn(&mut SystemParams)>)> = vec![
        ("alpha", Box::new(|p| p.path_loss_exponent = 2.0)),
        ("k", Box::new(|p| p.cluster_size = 0)),
        ("power", Box::new(|p| p.layers[3].tx_power_watts = -1.0)),
        ("bias", Box::new(|p| p.layers[0].bias = 0.0)),
        ("noise", Box::new(|p| p.noise_power_watts = -1e-13)),
        ("theta", Box::new(|p| p.snr_threshold = 0.0)),
        ("density", Box::new(|p| p.mbs_density_per_m2 = 0.0)),
        ("window", Box::new(|p| p.window_radius_m = 10.0)),
        ("capacity", Box::new(|p| p.energy.mbs_capacity_users = 0)),
    ];
    for (name, mutate) in mutations {
        let mut q = p.clone();
        mutate(&mut q);
        assert!(!validate(&q).is_pass(), "{name} mutation passed validation");
    }
}
