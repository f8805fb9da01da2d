//! Static-plus-load power consumption of the MBS tier and the SBS layers.
//!
//! Connection probabilities act as expected load fractions: the MBS pays its
//! static power plus its transmit power scaled by the share of its capacity
//! in use, and every cooperating SBS pays static and backhaul power for each
//! user it serves.

use crate::params::{EnergyParams, SystemParams};
use thiserror::Error;

/// Tolerance on `Σ shares = 1 − p_mbs`.
pub const SHARE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EnergyError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("layer shares sum to {shares_sum} but 1 - p_mbs = {expected}")]
    Consistency { shares_sum: f64, expected: f64 },
}

/// Which probability drives each layer's SBS load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SbsLoad {
    /// The layer's own association share.
    #[default]
    PerLayerShare,
    /// The whole-tier probability `1 − p_mbs` for every layer.
    WholeTier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    /// `mbs_static_watts + load_watts`.
    pub mbs_total_watts: f64,
    /// Sum of `per_layer_watts`.
    pub sbs_total_watts: f64,
    pub per_layer_watts: Vec<f64>,
    /// `mbs_static_watts + sbs_static_watts`.
    pub static_watts: f64,
    pub mbs_static_watts: f64,
    pub sbs_static_watts: f64,
    /// MBS transmit power drawn by its served users.
    pub load_watts: f64,
    pub backhaul_watts: f64,
}

fn check_probability(name: &str, p: f64) -> Result<(), EnergyError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(EnergyError::Domain(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// `P_ms + n · p_m · p_MBS / N`.
pub fn mbs_energy(e: &EnergyParams, p_m: f64, p_mbs_conn: f64) -> Result<f64, EnergyError> {
    check_probability("MBS connection probability", p_mbs_conn)?;
    Ok(e.mbs_static_watts + mbs_load(e, p_m, p_mbs_conn))
}

fn mbs_load(e: &EnergyParams, p_m: f64, p: f64) -> f64 {
    e.num_users as f64 * p_m * p / e.mbs_capacity_users as f64
}

/// `k · n · p_SBS · (P_s + P_bkh)` for one layer.
pub fn sbs_layer_energy(e: &EnergyParams, k: usize, p_sbs_conn: f64) -> Result<f64, EnergyError> {
    if k == 0 {
        return Err(EnergyError::Domain("cluster size must be at least 1".into()));
    }
    check_probability("SBS connection probability", p_sbs_conn)?;
    Ok(k as f64 * e.num_users as f64 * p_sbs_conn * (e.sbs_static_watts + e.backhaul_watts))
}

/// Full breakdown from `p_mbs` and the per-layer association shares.
pub fn total_energy(
    e: &EnergyParams,
    params: &SystemParams,
    p_mbs: f64,
    shares: &[f64],
    load: SbsLoad,
) -> Result<EnergyBreakdown, EnergyError> {
    check_probability("MBS connection probability", p_mbs)?;
    for &s in shares {
        check_probability("layer share", s)?;
    }
    let shares_sum: f64 = shares.iter().sum();
    let expected = 1.0 - p_mbs;
    if (shares_sum - expected).abs() > SHARE_TOLERANCE {
        return Err(EnergyError::Consistency { shares_sum, expected });
    }
    let k = params.cluster_size;
    let users = k as f64 * e.num_users as f64;
    let mut per_layer_watts = Vec::with_capacity(shares.len());
    let (mut sbs_static, mut backhaul) = (0.0, 0.0);
    for &share in shares {
        let p = match load {
            SbsLoad::PerLayerShare => share,
            SbsLoad::WholeTier => expected,
        };
        per_layer_watts.push(sbs_layer_energy(e, k, p)?);
        sbs_static += users * p * e.sbs_static_watts;
        backhaul += users * p * e.backhaul_watts;
    }
    let load_watts = mbs_load(e, params.mbs_power_watts, p_mbs);
    Ok(EnergyBreakdown {
        mbs_total_watts: e.mbs_static_watts + load_watts,
        sbs_total_watts: per_layer_watts.iter().sum(),
        per_layer_watts,
        static_watts: e.mbs_static_watts + sbs_static,
        mbs_static_watts: e.mbs_static_watts,
        sbs_static_watts: sbs_static,
        load_watts,
        backhaul_watts: backhaul,
    })
}
