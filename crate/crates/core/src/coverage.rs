//! SINR of the served user and Monte Carlo coverage probabilities.
//!
//! Serving-set members combine coherently: each contributes a CN(0, 1)
//! channel coefficient and the received amplitudes add as complex numbers
//! before squaring. Interferers add as powers, each with its own unit-mean
//! exponential gain. Only stations of the serving tier interfere (per-layer
//! OFDM isolation); the MBS tier is its own layer.

use crate::association::{AssociationError, ServingKind, ServingSet, TrialGeometry};
use crate::estimate::{ClassEstimate, MonteCarloEstimate};
use crate::geometry::{nearest_in_window, Deployment, Point2D};
use crate::params::{MbsInterference, SystemParams};
use crate::propagation::{draw_channel, draw_fading};
use crate::rng::{run_trials, StreamId, Tally, TrialStreams};
use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub signal_watts: f64,
    pub interference_watts: f64,
    pub noise_watts: f64,
    pub sinr: f64,
}

impl SinrSample {
    /// `signal / (interference + noise)`; infinite when both are zero and the
    /// signal is positive.
    pub fn new(signal_watts: f64, interference_watts: f64, noise_watts: f64) -> Self {
        let denom = interference_watts + noise_watts;
        let sinr = if denom > 0.0 {
            signal_watts / denom
        } else if signal_watts > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            signal_watts,
            interference_watts,
            noise_watts,
            sinr,
        }
    }
}

/// `P · |Σ_j h_j r_j^(-α/2)|²` with one channel draw per member, in order.
fn coherent_signal<R: Rng>(power: f64, distances: impl Iterator<Item = f64>, alpha: f64, rng: &mut R) -> f64 {
    let amplitude: Complex64 = distances.map(|r| draw_channel(rng) * r.powf(-alpha / 2.0)).sum();
    power * amplitude.norm_sqr()
}

/// `Σ P · g · r^(-α)` with one exponential gain per interferer, in order.
fn interference_power<R: Rng>(power: f64, distances: impl Iterator<Item = f64>, alpha: f64, rng: &mut R) -> f64 {
    if alpha == 4.0 {
        // hot loop over thousands of interferers; skip powf for the common case
        return power
            * distances
                .map(|r| {
                    let r2 = r * r;
                    draw_fading(rng).gain / (r2 * r2)
                })
                .sum::<f64>();
    }
    power * distances.map(|r| draw_fading(rng).gain * r.powf(-alpha)).sum::<f64>()
}

fn sorted_distances(points: &[Point2D]) -> Vec<f64> {
    let mut d: Vec<f64> = points.iter().map(Point2D::distance_to_origin).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// SINR of the typical user of `deployment` served by `serving`.
///
/// Fading is drawn from `rng`: first one channel coefficient per serving
/// member (nearest first), then one power gain per interferer (nearest first).
pub fn compute_sinr<R: Rng>(
    deployment: &Deployment,
    serving: &ServingSet,
    params: &SystemParams,
    rng: &mut R,
) -> Result<SinrSample, AssociationError> {
    let alpha = params.path_loss_exponent;
    let (power, tier, members) = match serving.kind {
        ServingKind::Mbs => (params.mbs_power_watts, &deployment.mbs_points, 1),
        ServingKind::SbsCluster { layer } => {
            let lp = params.layer(layer).ok_or(AssociationError::NoSuchLayer(layer))?;
            let pts = deployment
                .sbs_points
                .get(layer - 1)
                .ok_or(AssociationError::NoSuchLayer(layer))?;
            (lp.tx_power_watts, pts, serving.member_distances.len())
        }
    };
    let distances = sorted_distances(tier);
    let members = members.min(distances.len());
    let signal = coherent_signal(power, distances[..members].iter().copied(), alpha, rng);
    let interferers = match (serving.kind, params.mbs_interference) {
        (ServingKind::Mbs, MbsInterference::NoiseOnly) => &distances[..0],
        _ => &distances[members..],
    };
    let interference = interference_power(power, interferers.iter().copied(), alpha, rng);
    Ok(SinrSample::new(signal, interference, params.noise_power_watts))
}

/// Draws the served user's SINR for one trial without materializing the
/// non-serving tiers. Uses the same streams as [`compute_sinr`] on
/// [`crate::geometry::sample_deployment`] with the tier's fading stream.
pub(crate) fn trial_sinr(params: &SystemParams, streams: &TrialStreams, geo: TrialGeometry, serving: &ServingSet) -> SinrSample {
    let alpha = params.path_loss_exponent;
    match serving.kind {
        ServingKind::Mbs => {
            let mut rng = streams.stream(StreamId::MbsFading);
            let (prefix, rest) = geo.mbs.expect("an MBS serves only when one exists");
            let p = params.mbs_power_watts;
            let signal = coherent_signal(p, prefix.iter().map(|a| a.distance), alpha, &mut rng);
            let interference = match params.mbs_interference {
                MbsInterference::CoTier => interference_power(p, rest.map(|a| a.distance), alpha, &mut rng),
                MbsInterference::NoiseOnly => 0.0,
            };
            SinrSample::new(signal, interference, params.noise_power_watts)
        }
        ServingKind::SbsCluster { layer } => {
            let mut rng = streams.stream(StreamId::LayerFading { layer: layer - 1 });
            let (prefix, rest) = geo
                .layers
                .into_iter()
                .nth(layer - 1)
                .flatten()
                .expect("serving layer has a cluster");
            let p = params.layers[layer - 1].tx_power_watts;
            let signal = coherent_signal(p, prefix.iter().map(|a| a.distance), alpha, &mut rng);
            let interference = interference_power(p, rest.map(|a| a.distance), alpha, &mut rng);
            SinrSample::new(signal, interference, params.noise_power_watts)
        }
    }
}

/// Coverage at one threshold, computed from shared trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub theta: f64,
    pub total: MonteCarloEstimate,
    pub mbs_conditional: ClassEstimate,
    pub sbs_conditional: ClassEstimate,
    /// Conditional on exclusive association with each layer.
    pub per_layer_conditional: Vec<ClassEstimate>,
    /// MBS association share of the same trials.
    pub p_mbs: MonteCarloEstimate,
    pub trials: u64,
    pub covered: u64,
}

#[derive(Debug, Clone)]
struct CoverageTally {
    trials: u64,
    mbs: u64,
    layers: Vec<u64>,
    // [theta][class]: class 0 is the MBS, class i the i-th layer
    covered: Vec<Vec<u64>>,
}

impl CoverageTally {
    fn empty(l: usize, n_theta: usize) -> Self {
        Self {
            trials: 0,
            mbs: 0,
            layers: vec![0; l],
            covered: vec![vec![0; l + 1]; n_theta],
        }
    }
}

impl Tally for CoverageTally {
    fn merge(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.mbs += o.mbs;
        for (a, b) in self.layers.iter_mut().zip(o.layers) {
            *a += b;
        }
        for (row, orow) in self.covered.iter_mut().zip(o.covered) {
            for (a, b) in row.iter_mut().zip(orow) {
                *a += b;
            }
        }
        self
    }
}

/// Coverage at every threshold in `thetas`, all computed on the same trials.
///
/// Each trial samples a deployment, associates, draws fading once and
/// compares the resulting SINR with every threshold, so coverage is
/// pointwise non-increasing in θ.
pub fn estimate_coverage_sweep(params: &SystemParams, thetas: &[f64], trials: u64, seed: u64) -> Vec<CoverageResult> {
    assert!(trials > 0);
    let l = params.layer_count();
    let tally = run_trials(
        trials,
        || CoverageTally::empty(l, thetas.len()),
        |t, acc| {
            let streams = TrialStreams::new(seed, t);
            let geo = TrialGeometry::sample(params, &streams);
            let serving = geo.associate(params);
            let class = match serving.kind {
                ServingKind::Mbs => {
                    acc.mbs += 1;
                    0
                }
                ServingKind::SbsCluster { layer } => {
                    acc.layers[layer - 1] += 1;
                    layer
                }
            };
            acc.trials += 1;
            let sinr = trial_sinr(params, &streams, geo, &serving).sinr;
            for (row, &theta) in acc.covered.iter_mut().zip(thetas) {
                if sinr > theta {
                    row[class] += 1;
                }
            }
        },
    );
    let sbs_trials: u64 = tally.layers.iter().sum();
    let p_mbs = MonteCarloEstimate::from_counts(tally.mbs, trials, seed);
    thetas
        .iter()
        .zip(&tally.covered)
        .map(|(&theta, row)| {
            let covered: u64 = row.iter().sum();
            let sbs_covered: u64 = row[1..].iter().sum();
            CoverageResult {
                theta,
                total: MonteCarloEstimate::from_counts(covered, trials, seed),
                mbs_conditional: ClassEstimate::from_counts(row[0], tally.mbs, seed),
                sbs_conditional: ClassEstimate::from_counts(sbs_covered, sbs_trials, seed),
                per_layer_conditional: row[1..]
                    .iter()
                    .zip(&tally.layers)
                    .map(|(&c, &n)| ClassEstimate::from_counts(c, n, seed))
                    .collect(),
                p_mbs,
                trials,
                covered,
            }
        })
        .collect()
}

/// Coverage probability at a single threshold.
pub fn estimate_coverage(params: &SystemParams, theta: f64, trials: u64, seed: u64) -> CoverageResult {
    estimate_coverage_sweep(params, &[theta], trials, seed)
        .pop()
        .expect("one threshold in, one result out")
}

#[derive(Debug, Clone)]
struct PairwiseTally {
    wins: u64,
    covered: Vec<u64>,
}

impl Tally for PairwiseTally {
    fn merge(mut self, o: Self) -> Self {
        self.wins += o.wins;
        for (a, b) in self.covered.iter_mut().zip(o.covered) {
            *a += b;
        }
        self
    }
}

/// Coverage of layer `layer`'s cluster conditional on that cluster beating
/// the nearest MBS, ignoring the other layers.
///
/// This is the per-layer counterpart of the pairwise win probability; the
/// user is served by the layer's `k` nearest stations and sees interference
/// from the rest of the layer inside the window.
pub fn estimate_layer_coverage_pairwise(
    params: &SystemParams,
    layer: usize,
    thetas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<ClassEstimate>, AssociationError> {
    let lp = params.layer(layer).ok_or(AssociationError::NoSuchLayer(layer))?;
    let alpha = params.path_loss_exponent;
    let radius = params.window_radius_m;
    let k = params.cluster_size;
    let tally = run_trials(
        trials,
        || PairwiseTally {
            wins: 0,
            covered: vec![0; thetas.len()],
        },
        |t, acc| {
            let streams = TrialStreams::new(seed, t);
            let Some((mbs, _)) = nearest_in_window(params.mbs_density_per_m2, radius, 1, &streams, |attempt| {
                StreamId::MbsPoints { attempt }
            }) else {
                return;
            };
            let Some((cluster, rest)) = nearest_in_window(lp.density_per_m2, radius, k, &streams, |attempt| {
                StreamId::LayerPoints {
                    layer: layer - 1,
                    attempt,
                }
            }) else {
                return;
            };
            let gain: f64 = cluster.iter().map(|a| a.distance.powf(-alpha)).sum();
            if lp.bias * lp.tx_power_watts * gain <= params.mbs_power_watts * mbs[0].distance.powf(-alpha) {
                return;
            }
            acc.wins += 1;
            let mut rng = streams.stream(StreamId::LayerFading { layer: layer - 1 });
            let p = lp.tx_power_watts;
            let signal = coherent_signal(p, cluster.iter().map(|a| a.distance), alpha, &mut rng);
            let interference = interference_power(p, rest.map(|a| a.distance), alpha, &mut rng);
            let sinr = SinrSample::new(signal, interference, params.noise_power_watts).sinr;
            for (c, &theta) in acc.covered.iter_mut().zip(thetas) {
                if sinr > theta {
                    *c += 1;
                }
            }
        },
    );
    Ok(tally
        .covered
        .iter()
        .map(|&c| ClassEstimate::from_counts(c, tally.wins, seed))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::associate;
    use crate::geometry::{sample_deployment, OrderedDistances};
    use crate::params::default_paper_scenario;
    use crate::propagation::RssValue;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ratio_arithmetic() {
        let s = SinrSample::new(0.5, 0.0, 0.1);
        assert!((s.sinr - 5.0).abs() < 1e-12);
        assert_eq!(SinrSample::new(1.0, 0.0, 0.0).sinr, f64::INFINITY);
    }

    #[test]
    fn whole_layer_in_cluster_means_no_interference() {
        let mut p = default_paper_scenario();
        p.layers.truncate(1);
        let d = Deployment {
            mbs_points: vec![Point2D::new(900.0, 0.0)],
            sbs_points: vec![vec![Point2D::new(10.0, 0.0), Point2D::new(0.0, 12.0)]],
            window_radius_m: 5000.0,
        };
        let serving = associate(&d, &p).unwrap();
        assert_eq!(serving.layer_index(), Some(1));
        let s = compute_sinr(&d, &serving, &p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(s.interference_watts, 0.0);
    }

    #[test]
    fn single_interferer_has_unit_mean_fading() {
        let p = default_paper_scenario();
        let d = Deployment {
            mbs_points: vec![Point2D::new(50.0, 0.0), Point2D::new(0.0, 400.0)],
            sbs_points: vec![Vec::new(); 10],
            window_radius_m: 5000.0,
        };
        let serving = ServingSet {
            kind: ServingKind::Mbs,
            member_distances: OrderedDistances::new(vec![50.0]).unwrap(),
            rss: RssValue(0.0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| compute_sinr(&d, &serving, &p, &mut rng).unwrap().interference_watts)
            .sum::<f64>()
            / n as f64;
        let want = 20.0 * 400f64.powi(-4);
        assert!((mean / want - 1.0).abs() < 0.01, "{mean} vs {want}");
    }

    #[test]
    fn fast_path_sinr_matches_deployment_path() {
        let p = default_paper_scenario().with_density_ratio(5.0);
        for t in 0..50 {
            let streams = TrialStreams::new(5, t);
            let d = sample_deployment(&p, &streams);
            let serving = associate(&d, &p).unwrap();
            let id = match serving.kind {
                ServingKind::Mbs => StreamId::MbsFading,
                ServingKind::SbsCluster { layer } => StreamId::LayerFading { layer: layer - 1 },
            };
            let slow = compute_sinr(&d, &serving, &p, &mut streams.stream(id)).unwrap();
            let geo = TrialGeometry::sample(&p, &streams);
            let fast = trial_sinr(&p, &streams, geo, &serving);
            assert!((slow.sinr - fast.sinr).abs() <= 1e-9 * slow.sinr, "trial {t}: {slow:?} vs {fast:?}");
        }
    }

    #[test]
    fn extreme_thresholds() {
        let p = default_paper_scenario().with_density_ratio(5.0);
        let r = estimate_coverage_sweep(&p, &[1e-9, 1e9], 2000, 1);
        // users within a metre of a station still clear 10⁹ occasionally
        assert!(1.0 - r[0].total.value <= 3.0 * r[0].total.std_error);
        assert!(r[1].total.value <= 3.0 * r[1].total.std_error);
    }

    #[test]
    fn decomposition_holds_on_tallies() {
        let p = default_paper_scenario().with_density_ratio(2.0);
        for r in estimate_coverage_sweep(&p, &[0.5, 5.0, 50.0], 3000, 9) {
            assert_eq!(r.covered, r.mbs_conditional.successes + r.sbs_conditional.successes);
            let per_layer: u64 = r.per_layer_conditional.iter().map(|c| c.successes).sum();
            assert_eq!(per_layer, r.sbs_conditional.successes);
        }
    }

    #[test]
    fn empty_class_is_flagged_undefined() {
        let p = default_paper_scenario().with_sbs_density(0.0);
        let r = estimate_coverage(&p, 1.0, 500, 2);
        assert!(!r.sbs_conditional.is_defined());
        assert!(r.per_layer_conditional.iter().all(|c| !c.is_defined()));
        assert!(r.mbs_conditional.is_defined());
    }
}
