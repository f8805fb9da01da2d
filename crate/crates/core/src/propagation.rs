//! Path loss, Rayleigh fading and received signal strength.

use crate::geometry::OrderedDistances;
use crate::params::LayerParams;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PropagationError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

/// Rayleigh power gain |h|², unit-mean exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub gain: f64,
}

/// Received power in watts.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RssValue(pub f64);

impl RssValue {
    pub fn watts(self) -> f64 {
        self.0
    }
}

/// `distance^(-alpha)`.
pub fn path_gain(distance: f64, alpha: f64) -> Result<f64, PropagationError> {
    if !(distance > 0.0) {
        return Err(PropagationError::NonPositiveDistance(distance));
    }
    Ok(distance.powf(-alpha))
}

/// Association RSS of an MBS: `p_m · r_m^(-α)`, without fading or bias.
pub fn rss_mbs(power: f64, distance: f64, alpha: f64) -> Result<RssValue, PropagationError> {
    Ok(RssValue(power * path_gain(distance, alpha)?))
}

/// Biased association RSS of a cooperative cluster:
/// `β_i · p_s,i · Σ_j r_j^(-α)`.
pub fn rss_cluster(layer: &LayerParams, distances: &OrderedDistances, alpha: f64) -> Result<RssValue, PropagationError> {
    let sum = cluster_gain(distances.values(), alpha)?;
    Ok(RssValue(layer.bias * layer.tx_power_watts * sum))
}

/// `Σ_j r_j^(-α)` over the given distances.
pub fn cluster_gain(distances: &[f64], alpha: f64) -> Result<f64, PropagationError> {
    distances.iter().map(|&r| path_gain(r, alpha)).sum()
}

pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> FadingDraw {
    FadingDraw {
        gain: Exp1.sample(rng),
    }
}

/// Circularly-symmetric CN(0, 1) channel coefficient; `|h|²` is unit-mean
/// exponential and the phase is uniform.
pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}
