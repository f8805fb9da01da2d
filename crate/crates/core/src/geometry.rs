//! Poisson point processes around a typical user at the origin.
//!
//! Points are generated in order of increasing distance: the squared radii of
//! a planar PPP of density λ, scaled by πλ, are the arrival times of a
//! unit-rate Poisson process. Stopping at πλR² gives an exact PPP on the disc
//! of radius R (Poisson count, i.i.d. uniform positions), and for a fixed
//! random stream the j-th nearest distance is `sqrt(Γ_j / (πλ))`, so
//! distances shrink monotonically as the density grows.

use crate::params::SystemParams;
use crate::rng::{StreamId, TrialStreams};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use std::f64::consts::PI;
use thiserror::Error;

/// Points closer than this to the user are discarded (the PPP is restricted to
/// the annulus `ε < r < R`).
pub const ORIGIN_EXCLUSION_M: f64 = 1e-6;

/// Give up resampling a tier after this many empty or short windows.
const MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("need {needed} points but only {available} are available")]
    InsufficientPoints { needed: usize, available: usize },
    #[error("invalid ordered distances: {0}")]
    InvalidDistances(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: r * c, y: r * s }
    }

    pub fn distance_to_origin(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Distances sorted ascending, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedDistances(Vec<f64>);

impl OrderedDistances {
    pub fn new(values: Vec<f64>) -> Result<Self, GeometryError> {
        if values.is_empty() {
            return Err(GeometryError::InvalidDistances("empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(GeometryError::InvalidDistances(format!("non-positive distance {bad}")));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(GeometryError::InvalidDistances("not sorted ascending".into()));
        }
        Ok(Self(values))
    }

    /// Like [`OrderedDistances::new`] but also rejects ties.
    pub fn strictly_increasing(values: Vec<f64>) -> Result<Self, GeometryError> {
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeometryError::InvalidDistances("not strictly increasing".into()));
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The farthest member (r_k).
    pub fn outermost(&self) -> f64 {
        *self.0.last().expect("non-empty by construction")
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// One realization: MBS points plus one point set per SBS layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub mbs_points: Vec<Point2D>,
    pub sbs_points: Vec<Vec<Point2D>>,
    pub window_radius_m: f64,
}

/// A PPP point as produced by [`RadialArrivals`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub distance: f64,
    pub angle: f64,
}

impl Arrival {
    pub fn point(&self) -> Point2D {
        Point2D::from_polar(self.distance, self.angle)
    }
}

/// Streams the points of a PPP in order of increasing distance.
///
/// Each point consumes one unit exponential (the radial increment) and one
/// uniform (the angle) from the stream, in that order.
#[derive(Debug, Clone)]
pub struct RadialArrivals<R> {
    rng: R,
    rate: f64,
    elapsed: f64,
    limit: f64,
}

impl<R: Rng> RadialArrivals<R> {
    /// Arrivals inside the disc of radius `window_radius`.
    pub fn windowed(density: f64, window_radius: f64, rng: R) -> Self {
        let rate = PI * density;
        Self {
            rng,
            rate,
            elapsed: 0.0,
            limit: rate * window_radius * window_radius,
        }
    }

    /// Arrivals of the untruncated process.
    pub fn unbounded(density: f64, rng: R) -> Self {
        Self {
            rng,
            rate: PI * density,
            elapsed: 0.0,
            limit: f64::INFINITY,
        }
    }
}

impl<R: Rng> Iterator for RadialArrivals<R> {
    type Item = Arrival;

    fn next(&mut self) -> Option<Arrival> {
        if self.rate <= 0.0 {
            return None;
        }
        loop {
            let step: f64 = Exp1.sample(&mut self.rng);
            self.elapsed += step;
            if self.elapsed > self.limit {
                // park the process so later calls keep returning None
                self.elapsed = f64::INFINITY;
                return None;
            }
            let angle = 2.0 * PI * self.rng.random::<f64>();
            let distance = (self.elapsed / self.rate).sqrt();
            if distance >= ORIGIN_EXCLUSION_M {
                return Some(Arrival { distance, angle });
            }
        }
    }
}

/// Samples a homogeneous PPP of `density` on the disc of radius
/// `window_radius` centred at the origin. Points come out sorted by distance.
pub fn sample_ppp<R: Rng>(density: f64, window_radius: f64, rng: &mut R) -> Vec<Point2D> {
    assert!(density >= 0.0 && window_radius > 0.0);
    RadialArrivals::windowed(density, window_radius, rng)
        .map(|a| a.point())
        .collect()
}

/// The `needed` nearest points of one tier inside the window, plus the
/// arrival stream positioned right after them.
///
/// Windows holding fewer than `needed` points are redrawn on a fresh
/// sub-stream. Returns `None` for an empty tier (zero density) or when every
/// attempt comes up short.
pub(crate) fn nearest_in_window(
    density: f64,
    window_radius: f64,
    needed: usize,
    streams: &TrialStreams,
    id: impl Fn(u32) -> StreamId,
) -> Option<(Vec<Arrival>, RadialArrivals<rand_chacha::ChaCha8Rng>)> {
    if density <= 0.0 {
        return None;
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut arrivals = RadialArrivals::windowed(density, window_radius, streams.stream(id(attempt)));
        let prefix: Vec<Arrival> = arrivals.by_ref().take(needed).collect();
        if prefix.len() == needed {
            return Some((prefix, arrivals));
        }
        log::debug!(
            "trial {}: window held {} of {needed} required points, resampling tier",
            streams.trial,
            prefix.len()
        );
    }
    None
}

fn draw_tier(
    density: f64,
    window_radius: f64,
    needed: usize,
    streams: &TrialStreams,
    id: impl Fn(u32) -> StreamId,
) -> Vec<Point2D> {
    match nearest_in_window(density, window_radius, needed, streams, id) {
        Some((prefix, rest)) => prefix.iter().chain(rest.collect::<Vec<_>>().iter()).map(Arrival::point).collect(),
        None => Vec::new(),
    }
}

/// Draws one MBS process and `l` independent SBS processes for one trial.
///
/// Each tier reads its own sub-stream of `streams`. An SBS layer whose window
/// holds fewer than `k` stations, or an MBS window with no station, is redrawn.
pub fn sample_deployment(params: &SystemParams, streams: &TrialStreams) -> Deployment {
    let radius = params.window_radius_m;
    let mbs_points = draw_tier(params.mbs_density_per_m2, radius, 1, streams, |attempt| {
        StreamId::MbsPoints { attempt }
    });
    let sbs_points = params
        .layers
        .iter()
        .enumerate()
        .map(|(layer, lp)| {
            draw_tier(lp.density_per_m2, radius, params.cluster_size, streams, |attempt| {
                StreamId::LayerPoints { layer, attempt }
            })
        })
        .collect();
    Deployment {
        mbs_points,
        sbs_points,
        window_radius_m: radius,
    }
}

/// The `k` smallest distances from the origin, ascending.
pub fn ordered_knn_distances(points: &[Point2D], k: usize) -> Result<OrderedDistances, GeometryError> {
    if k == 0 || points.len() < k {
        return Err(GeometryError::InsufficientPoints {
            needed: k.max(1),
            available: points.len(),
        });
    }
    let mut d: Vec<f64> = points.iter().map(Point2D::distance_to_origin).collect();
    d.select_nth_unstable_by(k - 1, f64::total_cmp);
    d.truncate(k);
    d.sort_by(f64::total_cmp);
    OrderedDistances::new(d)
}

/// Draws the `k` nearest-neighbour distances of a PPP of `density` directly
/// from their joint law, without a window.
pub fn sample_ordered_distances_direct<R: Rng>(density: f64, k: usize, rng: &mut R) -> OrderedDistances {
    assert!(density > 0.0 && k >= 1);
    let first: f64 = Exp1.sample(rng);
    ordered_distances_from_first(density, k, first, rng)
}

/// Same law as [`sample_ordered_distances_direct`], with the first unit-rate
/// arrival supplied by the caller (used for stratified sampling).
pub fn ordered_distances_from_first<R: Rng>(density: f64, k: usize, first_arrival: f64, rng: &mut R) -> OrderedDistances {
    let rate = PI * density;
    let mut t = first_arrival;
    let mut out = Vec::with_capacity(k);
    out.push((t / rate).sqrt());
    for _ in 1..k {
        let step: f64 = Exp1.sample(rng);
        t += step;
        out.push((t / rate).sqrt());
    }
    OrderedDistances(out)
}
