//! Biased max-RSS association and Monte Carlo connection probabilities.

use crate::estimate::MonteCarloEstimate;
use crate::geometry::{nearest_in_window, ordered_knn_distances, Arrival, Deployment, GeometryError, OrderedDistances, RadialArrivals};
use crate::params::SystemParams;
use crate::propagation::{cluster_gain, RssValue};
use crate::rng::{run_trials, StreamId, Tally, TrialStreams};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AssociationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("layer {0} does not exist")]
    NoSuchLayer(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServingKind {
    Mbs,
    /// Cooperative cluster of the given 1-based layer.
    SbsCluster { layer: usize },
}

/// Who serves the typical user.
#[derive(Debug, Clone, PartialEq)]
pub struct ServingSet {
    pub kind: ServingKind,
    /// One distance for the MBS, `k` for a cluster.
    pub member_distances: OrderedDistances,
    /// Association RSS of the winner (biased for clusters).
    pub rss: RssValue,
}

impl ServingSet {
    pub fn layer_index(&self) -> Option<usize> {
        match self.kind {
            ServingKind::Mbs => None,
            ServingKind::SbsCluster { layer } => Some(layer),
        }
    }

    pub fn is_mbs(&self) -> bool {
        self.kind == ServingKind::Mbs
    }
}

/// Picks the server from the nearest MBS distance and each layer's cluster.
///
/// A layer without a cluster (`None`, an empty tier) never wins. Among layers
/// the first maximum wins; an exact tie with the MBS goes to the MBS.
pub fn associate_distances(
    mbs_distance: f64,
    clusters: &[Option<OrderedDistances>],
    params: &SystemParams,
) -> ServingSet {
    let alpha = params.path_loss_exponent;
    let rss_m = params.mbs_power_watts * mbs_distance.powf(-alpha);
    let mut best: Option<(usize, f64)> = None;
    for (i, (cluster, lp)) in clusters.iter().zip(&params.layers).enumerate() {
        let Some(c) = cluster else { continue };
        let gain = cluster_gain(c.values(), alpha).expect("ordered distances are positive");
        let rss = lp.bias * lp.tx_power_watts * gain;
        if best.is_none_or(|(_, b)| rss > b) {
            best = Some((i, rss));
        }
    }
    match best {
        Some((i, rss)) if rss > rss_m => ServingSet {
            kind: ServingKind::SbsCluster { layer: i + 1 },
            member_distances: clusters[i].clone().expect("winner has a cluster"),
            rss: RssValue(rss),
        },
        _ => ServingSet {
            kind: ServingKind::Mbs,
            member_distances: OrderedDistances::new(vec![mbs_distance]).expect("positive MBS distance"),
            rss: RssValue(rss_m),
        },
    }
}

/// Associates the typical user of `deployment` by biased maximum RSS.
///
/// Layers with zero density are skipped; a populated layer with fewer than
/// `k` stations is an error.
pub fn associate(deployment: &Deployment, params: &SystemParams) -> Result<ServingSet, AssociationError> {
    let r_m = ordered_knn_distances(&deployment.mbs_points, 1)?.values()[0];
    let clusters = deployment
        .sbs_points
        .iter()
        .zip(&params.layers)
        .map(|(points, lp)| {
            if points.is_empty() && lp.density_per_m2 == 0.0 {
                Ok(None)
            } else {
                ordered_knn_distances(points, params.cluster_size).map(Some)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(associate_distances(r_m, &clusters, params))
}

/// Nearest structure of one trial, with each tier's arrival stream left
/// positioned after the points already taken so interferers can be drawn on
/// demand. Uses the same sub-streams as [`crate::geometry::sample_deployment`].
pub(crate) struct TrialGeometry {
    pub mbs: Option<(Vec<Arrival>, RadialArrivals<ChaCha8Rng>)>,
    pub layers: Vec<Option<(Vec<Arrival>, RadialArrivals<ChaCha8Rng>)>>,
}

impl TrialGeometry {
    pub fn sample(params: &SystemParams, streams: &TrialStreams) -> Self {
        let radius = params.window_radius_m;
        let mbs = nearest_in_window(params.mbs_density_per_m2, radius, 1, streams, |attempt| {
            StreamId::MbsPoints { attempt }
        });
        let layers = params
            .layers
            .iter()
            .enumerate()
            .map(|(layer, lp)| {
                nearest_in_window(lp.density_per_m2, radius, params.cluster_size, streams, |attempt| {
                    StreamId::LayerPoints { layer, attempt }
                })
            })
            .collect();
        Self { mbs, layers }
    }

    pub fn associate(&self, params: &SystemParams) -> ServingSet {
        let r_m = self.mbs.as_ref().map_or(f64::INFINITY, |(p, _)| p[0].distance);
        let clusters: Vec<Option<OrderedDistances>> = self
            .layers
            .iter()
            .map(|l| {
                l.as_ref().map(|(prefix, _)| {
                    OrderedDistances::new(prefix.iter().map(|a| a.distance).collect()).expect("sorted positive arrivals")
                })
            })
            .collect();
        associate_distances(r_m, &clusters, params)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ConnectionTally {
    trials: u64,
    mbs: u64,
    layers: Vec<u64>,
}

impl ConnectionTally {
    fn empty(l: usize) -> Self {
        Self {
            trials: 0,
            mbs: 0,
            layers: vec![0; l],
        }
    }
}

impl Tally for ConnectionTally {
    fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.mbs += other.mbs;
        for (a, b) in self.layers.iter_mut().zip(other.layers) {
            *a += b;
        }
        self
    }
}

/// Connection probabilities from one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionEstimates {
    pub p_mbs: MonteCarloEstimate,
    pub p_sbs: MonteCarloEstimate,
    /// Exclusive association share of each layer.
    pub per_layer: Vec<MonteCarloEstimate>,
    pub trials: u64,
    pub mbs_count: u64,
    pub layer_counts: Vec<u64>,
}

impl ConnectionEstimates {
    pub fn per_layer_values(&self) -> Vec<f64> {
        self.per_layer.iter().map(|e| e.value).collect()
    }
}

/// Estimates P_MBS, P_SBS and the per-layer association shares by sampling
/// deployments and applying the association rule.
///
/// `p_sbs.value` is computed as `1 − p_mbs.value`, so the two sum to exactly
/// one; the per-layer tallies sum to the SBS tally.
pub fn estimate_connection_probabilities(params: &SystemParams, trials: u64, seed: u64) -> ConnectionEstimates {
    assert!(trials > 0);
    let l = params.layer_count();
    let tally = run_trials(
        trials,
        || ConnectionTally::empty(l),
        |t, acc| {
            let geo = TrialGeometry::sample(params, &TrialStreams::new(seed, t));
            acc.trials += 1;
            match geo.associate(params).kind {
                ServingKind::Mbs => acc.mbs += 1,
                ServingKind::SbsCluster { layer } => acc.layers[layer - 1] += 1,
            }
        },
    );
    debug_assert_eq!(tally.mbs + tally.layers.iter().sum::<u64>(), tally.trials);
    let p_mbs = MonteCarloEstimate::from_counts(tally.mbs, trials, seed);
    let p_sbs = MonteCarloEstimate::bernoulli(1.0 - p_mbs.value, trials, seed);
    let per_layer = tally
        .layers
        .iter()
        .map(|&c| MonteCarloEstimate::from_counts(c, trials, seed))
        .collect();
    ConnectionEstimates {
        p_mbs,
        p_sbs,
        per_layer,
        trials,
        mbs_count: tally.mbs,
        layer_counts: tally.layers,
    }
}

#[derive(Default)]
struct WinTally {
    trials: u64,
    wins: u64,
}

impl Tally for WinTally {
    fn merge(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            wins: self.wins + o.wins,
        }
    }
}

/// Estimates Prob{RSS of layer `layer`'s cluster > RSS of the nearest MBS},
/// ignoring all other layers.
///
/// Distances come from the untruncated nearest-neighbour laws (no window).
pub fn estimate_pairwise_layer_win(
    params: &SystemParams,
    layer: usize,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, AssociationError> {
    let lp = params.layer(layer).ok_or(AssociationError::NoSuchLayer(layer))?;
    assert!(trials > 0);
    let alpha = params.path_loss_exponent;
    let k = params.cluster_size;
    let tally = run_trials(trials, WinTally::default, |t, acc| {
        let s = TrialStreams::new(seed, t);
        acc.trials += 1;
        if lp.density_per_m2 <= 0.0 {
            return;
        }
        let r_m = RadialArrivals::unbounded(params.mbs_density_per_m2, s.stream(StreamId::MbsPoints { attempt: 0 }))
            .next()
            .expect("unbounded process always has a nearest point")
            .distance;
        let stream = s.stream(StreamId::LayerPoints {
            layer: layer - 1,
            attempt: 0,
        });
        let gain: f64 = RadialArrivals::unbounded(lp.density_per_m2, stream)
            .take(k)
            .map(|a| a.distance.powf(-alpha))
            .sum();
        if lp.bias * lp.tx_power_watts * gain > params.mbs_power_watts * r_m.powf(-alpha) {
            acc.wins += 1;
        }
    });
    Ok(MonteCarloEstimate::from_counts(tally.wins, tally.trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_deployment, Point2D};
    use crate::params::{default_paper_scenario, LayerParams};

    fn symmetric(k: usize) -> SystemParams {
        let mut p = default_paper_scenario();
        p.layers = vec![LayerParams {
            index: 1,
            tx_power_watts: p.mbs_power_watts,
            bias: 1.0,
            density_per_m2: p.mbs_density_per_m2,
        }];
        p.cluster_size = k;
        p
    }

    fn deployment(mbs: &[(f64, f64)], sbs: &[(f64, f64)]) -> Deployment {
        Deployment {
            mbs_points: mbs.iter().map(|&(x, y)| Point2D::new(x, y)).collect(),
            sbs_points: vec![sbs.iter().map(|&(x, y)| Point2D::new(x, y)).collect()],
            window_radius_m: 5000.0,
        }
    }

    #[test]
    fn path_loss_deficit_keeps_user_on_mbs() {
        let p = symmetric(1);
        let s = associate(&deployment(&[(1.0, 0.0)], &[(10.0, 0.0)]), &p).unwrap();
        assert!(s.is_mbs());
        assert_eq!(s.member_distances.values(), &[1.0]);
        assert_eq!(s.layer_index(), None);
    }

    #[test]
    fn identical_tiers_pick_the_nearer_point() {
        let p = symmetric(1);
        let s = associate(&deployment(&[(0.0, 30.0)], &[(20.0, 0.0)]), &p).unwrap();
        assert_eq!(s.kind, ServingKind::SbsCluster { layer: 1 });
        assert_eq!(s.member_distances.values(), &[20.0]);
        let s = associate(&deployment(&[(0.0, 10.0)], &[(20.0, 0.0)]), &p).unwrap();
        assert!(s.is_mbs());
    }

    #[test]
    fn exact_tie_goes_to_mbs() {
        let p = symmetric(1);
        let s = associate(&deployment(&[(0.0, 25.0)], &[(25.0, 0.0)]), &p).unwrap();
        assert!(s.is_mbs());
    }

    #[test]
    fn short_layer_is_an_error() {
        let p = symmetric(2);
        let err = associate(&deployment(&[(0.0, 25.0)], &[(25.0, 0.0)]), &p).unwrap_err();
        assert!(matches!(err, AssociationError::Geometry(GeometryError::InsufficientPoints { .. })));
    }

    #[test]
    fn fast_path_matches_full_deployment() {
        let p = default_paper_scenario();
        for t in 0..200 {
            let s = TrialStreams::new(77, t);
            let full = associate(&sample_deployment(&p, &s), &p).unwrap();
            let fast = TrialGeometry::sample(&p, &s).associate(&p);
            assert_eq!(full.kind, fast.kind);
            for (a, b) in full.member_distances.values().iter().zip(fast.member_distances.values()) {
                assert!((a - b).abs() <= 1e-9 * a);
            }
        }
    }

    #[test]
    fn tallies_are_complementary() {
        let p = default_paper_scenario().with_density_ratio(5.0);
        let c = estimate_connection_probabilities(&p, 2000, 3);
        assert_eq!(c.p_mbs.value + c.p_sbs.value, 1.0);
        assert_eq!(c.mbs_count + c.layer_counts.iter().sum::<u64>(), c.trials);
    }

    #[test]
    fn symmetric_tiers_split_evenly() {
        let p = symmetric(1);
        let c = estimate_connection_probabilities(&p, 20_000, 1);
        assert!((c.p_mbs.value - 0.5).abs() < 3.0 * c.p_mbs.std_error, "{:?}", c.p_mbs);
        let w = estimate_pairwise_layer_win(&p, 1, 20_000, 2).unwrap();
        assert!((w.value - 0.5).abs() < 3.0 * w.std_error, "{w:?}");
    }

    #[test]
    fn huge_bias_always_wins() {
        let p = default_paper_scenario().with_uniform_bias(1e6);
        let w = estimate_pairwise_layer_win(&p, 10, 5000, 4).unwrap();
        assert!(w.value > 0.99);
    }

    #[test]
    fn sparse_layer_almost_never_wins() {
        let p = symmetric(1).with_sbs_density(symmetric(1).mbs_density_per_m2 / 1e4);
        let w = estimate_pairwise_layer_win(&p, 1, 5000, 4).unwrap();
        assert!(w.value < 0.01);
    }

    #[test]
    fn unknown_layer_is_rejected() {
        let p = default_paper_scenario();
        assert_eq!(estimate_pairwise_layer_win(&p, 11, 100, 0), Err(AssociationError::NoSuchLayer(11)));
    }
}
