//! Scenario parameters and their validation.
//!
//! [`SystemParams`] is immutable once built and is shared by every engine.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Expected number of points a tier must have inside the simulation window.
pub const MIN_EXPECTED_POINTS: f64 = 100.0;

/// Macro-tier density of one station per disc of radius 500 m.
pub const DEFAULT_MBS_DENSITY: f64 = 1.0 / (500.0 * 500.0 * PI);

/// One hierarchical SBS layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// 1-based layer index.
    pub index: usize,
    pub tx_power_watts: f64,
    /// Association bias; multiplies the layer's RSS only when choosing a server.
    pub bias: f64,
    pub density_per_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Static MBS consumption.
    pub mbs_static_watts: f64,
    /// Static consumption of one SBS.
    pub sbs_static_watts: f64,
    /// Backhaul consumption of one cooperating SBS.
    pub backhaul_watts: f64,
    pub num_users: u64,
    /// Users an MBS carries at full load.
    pub mbs_capacity_users: u64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            mbs_static_watts: 130.0,
            sbs_static_watts: 0.35,
            backhaul_watts: 0.30,
            num_users: 50,
            mbs_capacity_users: 100,
        }
    }
}

/// Interferers seen by an MBS-served user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MbsInterference {
    /// Every other MBS in the window interferes (the MBS tier is its own
    /// OFDM layer).
    #[default]
    CoTier,
    /// Noise only.
    NoiseOnly,
}

impl MbsInterference {
    pub fn as_str(self) -> &'static str {
        match self {
            MbsInterference::CoTier => "co_tier",
            MbsInterference::NoiseOnly => "noise_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub trials: u64,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            trials: 20_000,
            seed: 2018,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub mbs_power_watts: f64,
    pub mbs_density_per_m2: f64,
    pub layers: Vec<LayerParams>,
    /// Stations per cooperative cluster.
    pub cluster_size: usize,
    pub path_loss_exponent: f64,
    pub noise_power_watts: f64,
    /// Linear SINR threshold.
    pub snr_threshold: f64,
    pub window_radius_m: f64,
    pub mbs_interference: MbsInterference,
    pub energy: EnergyParams,
    pub sim: SimSettings,
}

/// Power of layer `i` (1-based) under the geometric default scheme.
pub fn geometric_layer_power(base_power: f64, ratio: f64, index: usize) -> f64 {
    base_power * ratio.powi(index as i32 - 1)
}

/// Builds `count` layers with geometrically decaying power and a uniform bias.
pub fn geometric_layers(count: usize, base_power: f64, ratio: f64, bias: f64, density: f64) -> Vec<LayerParams> {
    (1..=count)
        .map(|index| LayerParams {
            index,
            tx_power_watts: geometric_layer_power(base_power, ratio, index),
            bias,
            density_per_m2: density,
        })
        .collect()
}

pub const DEFAULT_LAYER_COUNT: usize = 10;
pub const DEFAULT_POWER_RATIO: f64 = 0.9;
pub const DEFAULT_BIAS: f64 = 4.0;
pub const DEFAULT_DENSITY_RATIO: f64 = 50.0;
pub const DEFAULT_MBS_POWER: f64 = 20.0;

/// The canonical evaluation scenario: ten layers, clusters of two, α = 4, θ = 5.
pub fn default_paper_scenario() -> SystemParams {
    let lambda_m = DEFAULT_MBS_DENSITY;
    SystemParams {
        mbs_power_watts: DEFAULT_MBS_POWER,
        mbs_density_per_m2: lambda_m,
        layers: geometric_layers(
            DEFAULT_LAYER_COUNT,
            DEFAULT_MBS_POWER / 100.0,
            DEFAULT_POWER_RATIO,
            DEFAULT_BIAS,
            DEFAULT_DENSITY_RATIO * lambda_m,
        ),
        cluster_size: 2,
        path_loss_exponent: 4.0,
        noise_power_watts: 1e-13,
        snr_threshold: 5.0,
        window_radius_m: 5000.0,
        mbs_interference: MbsInterference::CoTier,
        energy: EnergyParams::default(),
        sim: SimSettings::default(),
    }
}

impl SystemParams {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Layer by 1-based index.
    pub fn layer(&self, index: usize) -> Option<&LayerParams> {
        index.checked_sub(1).and_then(|i| self.layers.get(i))
    }

    /// Common SBS density (first layer's; validation enforces equality).
    pub fn sbs_density(&self) -> f64 {
        self.layers.first().map_or(0.0, |l| l.density_per_m2)
    }

    pub fn density_ratio(&self) -> f64 {
        self.sbs_density() / self.mbs_density_per_m2
    }

    /// Copy with every layer's density set to `ratio · λ_m`.
    pub fn with_density_ratio(&self, ratio: f64) -> Self {
        self.with_sbs_density(ratio * self.mbs_density_per_m2)
    }

    pub fn with_sbs_density(&self, density: f64) -> Self {
        let mut p = self.clone();
        for l in &mut p.layers {
            l.density_per_m2 = density;
        }
        p
    }

    /// Copy with the same bias on every layer.
    pub fn with_uniform_bias(&self, bias: f64) -> Self {
        let mut p = self.clone();
        for l in &mut p.layers {
            l.bias = bias;
        }
        p
    }

    pub fn with_snr_threshold(&self, theta: f64) -> Self {
        Self {
            snr_threshold: theta,
            ..self.clone()
        }
    }

    /// Copy with every transmit power (MBS and all layers) multiplied by `c`.
    pub fn with_scaled_powers(&self, c: f64) -> Self {
        let mut p = self.clone();
        p.mbs_power_watts *= c;
        for l in &mut p.layers {
            l.tx_power_watts *= c;
        }
        p
    }

    /// Smallest window radius giving every populated tier at least
    /// [`MIN_EXPECTED_POINTS`] expected points.
    pub fn required_window_radius(&self) -> f64 {
        std::iter::once(self.mbs_density_per_m2)
            .chain(self.layers.iter().map(|l| l.density_per_m2))
            .filter(|&d| d > 0.0)
            .map(|d| (MIN_EXPECTED_POINTS / (PI * d)).sqrt())
            .fold(0.0, f64::max)
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.message.contains(needle) || v.field.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return write!(f, "pass");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn non_negative_finite(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Checks every invariant of `params`. Violations are returned as data.
pub fn validate(params: &SystemParams) -> ValidationReport {
    let mut r = ValidationReport::default();

    if !positive_finite(params.mbs_power_watts) {
        r.push("mbs_power_watts", "MBS transmit power must be positive");
    }
    if !positive_finite(params.mbs_density_per_m2) {
        r.push("mbs_density_per_m2", "MBS density must be positive");
    }
    if params.layers.is_empty() {
        r.push("layers", "at least one SBS layer is required");
    }
    for (i, layer) in params.layers.iter().enumerate() {
        let path = format!("layers[{i}]");
        if layer.index != i + 1 {
            r.push(
                format!("{path}.index"),
                format!("layer indices must run 1..l without gaps (found {} at position {})", layer.index, i + 1),
            );
        }
        if !positive_finite(layer.tx_power_watts) {
            r.push(format!("{path}.tx_power_watts"), "layer transmit power must be positive");
        }
        if !(layer.bias.is_finite() && layer.bias >= 1.0) {
            r.push(format!("{path}.bias"), "bias must be at least 1");
        }
        if !non_negative_finite(layer.density_per_m2) {
            r.push(format!("{path}.density_per_m2"), "layer density must be non-negative");
        }
    }
    if let Some(first) = params.layers.first() {
        if params
            .layers
            .iter()
            .any(|l| l.density_per_m2 != first.density_per_m2)
        {
            r.push("layers.density_per_m2", "all layers share one density");
        }
    }
    if params.cluster_size < 1 {
        r.push("cluster_size", "cluster size must be at least 1");
    }
    if !(params.path_loss_exponent.is_finite() && params.path_loss_exponent > 2.0) {
        r.push("path_loss_exponent", "path_loss_exponent must exceed 2");
    }
    if !non_negative_finite(params.noise_power_watts) {
        r.push("noise_power_watts", "noise power must be non-negative");
    }
    if !positive_finite(params.snr_threshold) {
        r.push("snr_threshold", "SINR threshold must be positive");
    }
    if !positive_finite(params.window_radius_m) {
        r.push("window_radius_m", "window radius must be positive");
    } else {
        let area = PI * params.window_radius_m * params.window_radius_m;
        let tiers = std::iter::once(("mbs_density_per_m2".to_string(), params.mbs_density_per_m2)).chain(
            params
                .layers
                .iter()
                .enumerate()
                .map(|(i, l)| (format!("layers[{i}].density_per_m2"), l.density_per_m2)),
        );
        for (field, density) in tiers {
            // a tiny slack absorbs rounding in radii derived from the rule itself
            if density > 0.0 && density * area < MIN_EXPECTED_POINTS * (1.0 - 1e-9) {
                r.push(
                    "window_radius_m",
                    format!(
                        "window holds {:.1} expected points for {field}; at least {MIN_EXPECTED_POINTS} required (radius >= {:.1} m)",
                        density * area,
                        params.required_window_radius()
                    ),
                );
            }
        }
    }
    let e = &params.energy;
    for (field, v) in [
        ("energy.mbs_static_watts", e.mbs_static_watts),
        ("energy.sbs_static_watts", e.sbs_static_watts),
        ("energy.backhaul_watts", e.backhaul_watts),
    ] {
        if !non_negative_finite(v) {
            r.push(field, "static and backhaul powers must be non-negative");
        }
    }
    if e.mbs_capacity_users < 1 {
        r.push("energy.mbs_capacity_users", "MBS capacity must be at least one user");
    }
    if params.sim.trials < 1 {
        r.push("sim.trials", "at least one trial is required");
    }
    // scenario files are TOML, whose integers are signed 64-bit
    if params.sim.seed > i64::MAX as u64 {
        r.push("sim.seed", "seed must not exceed 9223372036854775807");
    }
    r
}
