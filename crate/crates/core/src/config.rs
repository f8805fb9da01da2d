//! TOML scenario files.
//!
//! The normative key list is documented in the repository README. Unknown keys
//! are rejected; omitted optional keys take the default-scenario value.

use crate::params::{
    default_paper_scenario, geometric_layers, EnergyParams, LayerParams, MbsInterference, SimSettings,
    SystemParams, DEFAULT_BIAS, DEFAULT_POWER_RATIO,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Keys that must be present in every document.
pub const REQUIRED_KEYS: [&str; 5] = [
    "mbs.power_w",
    "mbs.density_per_m2",
    "layers.count",
    "layers.density_per_m2",
    "cluster.k",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(skip_serializing_if = "Option::is_none")]
    mbs: Option<MbsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    layers: Option<LayersSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cluster: Option<ClusterSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<ChannelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sim: Option<SimSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<EnergySection>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MbsSection {
    power_w: Option<f64>,
    density_per_m2: Option<f64>,
    capacity_users: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LayersSection {
    count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    power_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias: Option<f64>,
    density_per_m2: Option<f64>,
    /// Explicit per-layer powers; overrides the geometric scheme.
    #[serde(skip_serializing_if = "Option::is_none")]
    powers_w: Option<Vec<f64>>,
    /// Explicit per-layer biases; overrides `bias`.
    #[serde(skip_serializing_if = "Option::is_none")]
    biases: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ClusterSection {
    k: Option<usize>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum Threshold {
    Linear(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    alpha: Option<f64>,
    noise_w: Option<f64>,
    theta: Option<Threshold>,
    mbs_interference: Option<MbsInterference>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    window_radius_m: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EnergySection {
    mbs_static_w: Option<f64>,
    sbs_static_w: Option<f64>,
    backhaul_w: Option<f64>,
    num_users: Option<u64>,
}

/// Parses a threshold given either as a linear ratio (`"5"`) or in decibels
/// with an explicit suffix (`"7dB"`).
pub fn parse_threshold(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (number, db) = match t.strip_suffix("dB").or_else(|| t.strip_suffix("db")) {
        Some(n) => (n.trim(), true),
        None => (t, false),
    };
    let v: f64 = number
        .parse()
        .map_err(|_| format!("`{text}` is neither a linear ratio nor a value with a dB suffix"))?;
    Ok(if db { 10f64.powf(v / 10.0) } else { v })
}

/// Parses a scenario document into [`SystemParams`].
pub fn load_config(text: &str) -> Result<SystemParams, ConfigError> {
    let doc: Document = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;

    let mbs = doc.mbs.unwrap_or_default();
    let layers = doc.layers.unwrap_or_default();
    let cluster = doc.cluster.unwrap_or_default();
    let channel = doc.channel.unwrap_or_default();
    let sim = doc.sim.unwrap_or_default();
    let energy = doc.energy.unwrap_or_default();

    let present = [
        mbs.power_w.is_some(),
        mbs.density_per_m2.is_some(),
        layers.count.is_some(),
        layers.density_per_m2.is_some(),
        cluster.k.is_some(),
    ];
    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .zip(present)
        .filter(|(_, p)| !p)
        .map(|(k, _)| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::MissingKeys(missing));
    }

    let defaults = default_paper_scenario();
    let count = layers.count.unwrap_or_default();
    let density = layers.density_per_m2.unwrap_or_default();
    let mbs_power = mbs.power_w.unwrap_or(defaults.mbs_power_watts);

    if layers.powers_w.is_some() && (layers.base_power_w.is_some() || layers.power_ratio.is_some()) {
        return Err(ConfigError::Invalid {
            key: "layers.powers_w".into(),
            message: "give either powers_w or base_power_w/power_ratio, not both".into(),
        });
    }
    if layers.biases.is_some() && layers.bias.is_some() {
        return Err(ConfigError::Invalid {
            key: "layers.biases".into(),
            message: "give either biases or bias, not both".into(),
        });
    }

    let mut built: Vec<LayerParams> = geometric_layers(
        count,
        layers.base_power_w.unwrap_or(mbs_power / 100.0),
        layers.power_ratio.unwrap_or(DEFAULT_POWER_RATIO),
        layers.bias.unwrap_or(DEFAULT_BIAS),
        density,
    );
    if let Some(powers) = layers.powers_w {
        check_len("layers.powers_w", powers.len(), count)?;
        for (l, p) in built.iter_mut().zip(powers) {
            l.tx_power_watts = p;
        }
    }
    if let Some(biases) = layers.biases {
        check_len("layers.biases", biases.len(), count)?;
        for (l, b) in built.iter_mut().zip(biases) {
            l.bias = b;
        }
    }

    let snr_threshold = match channel.theta {
        None => defaults.snr_threshold,
        Some(Threshold::Linear(v)) => v,
        Some(Threshold::Text(s)) => parse_threshold(&s).map_err(|message| ConfigError::Invalid {
            key: "channel.theta".into(),
            message,
        })?,
    };

    let de = EnergyParams::default();
    Ok(SystemParams {
        mbs_power_watts: mbs_power,
        mbs_density_per_m2: mbs.density_per_m2.unwrap_or_default(),
        layers: built,
        cluster_size: cluster.k.unwrap_or_default(),
        path_loss_exponent: channel.alpha.unwrap_or(defaults.path_loss_exponent),
        noise_power_watts: channel.noise_w.unwrap_or(defaults.noise_power_watts),
        snr_threshold,
        window_radius_m: sim.window_radius_m.unwrap_or(defaults.window_radius_m),
        mbs_interference: channel.mbs_interference.unwrap_or_default(),
        energy: EnergyParams {
            mbs_static_watts: energy.mbs_static_w.unwrap_or(de.mbs_static_watts),
            sbs_static_watts: energy.sbs_static_w.unwrap_or(de.sbs_static_watts),
            backhaul_watts: energy.backhaul_w.unwrap_or(de.backhaul_watts),
            num_users: energy.num_users.unwrap_or(de.num_users),
            mbs_capacity_users: mbs.capacity_users.unwrap_or(de.mbs_capacity_users),
        },
        sim: SimSettings {
            trials: sim.trials.unwrap_or(defaults.sim.trials),
            seed: sim.seed.unwrap_or(defaults.sim.seed),
        },
    })
}

fn check_len(key: &str, got: usize, want: usize) -> Result<(), ConfigError> {
    if got == want {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            key: key.into(),
            message: format!("expected {want} entries (layers.count), found {got}"),
        })
    }
}

/// Serializes `params` so that [`load_config`] reproduces it exactly.
///
/// Layers are written with explicit per-layer arrays; layer densities must be
/// uniform (which [`crate::params::validate`] enforces).
pub fn to_config_string(params: &SystemParams) -> Result<String, ConfigError> {
    let doc = Document {
        mbs: Some(MbsSection {
            power_w: Some(params.mbs_power_watts),
            density_per_m2: Some(params.mbs_density_per_m2),
            capacity_users: Some(params.energy.mbs_capacity_users),
        }),
        layers: Some(LayersSection {
            count: Some(params.layers.len()),
            base_power_w: None,
            power_ratio: None,
            bias: None,
            density_per_m2: Some(params.sbs_density()),
            powers_w: Some(params.layers.iter().map(|l| l.tx_power_watts).collect()),
            biases: Some(params.layers.iter().map(|l| l.bias).collect()),
        }),
        cluster: Some(ClusterSection {
            k: Some(params.cluster_size),
        }),
        channel: Some(ChannelSection {
            alpha: Some(params.path_loss_exponent),
            noise_w: Some(params.noise_power_watts),
            theta: Some(Threshold::Linear(params.snr_threshold)),
            mbs_interference: Some(params.mbs_interference),
        }),
        sim: Some(SimSection {
            window_radius_m: Some(params.window_radius_m),
            trials: Some(params.sim.trials),
            seed: Some(params.sim.seed),
        }),
        energy: Some(EnergySection {
            mbs_static_w: Some(params.energy.mbs_static_watts),
            sbs_static_w: Some(params.energy.sbs_static_watts),
            backhaul_w: Some(params.energy.backhaul_watts),
            num_users: Some(params.energy.num_users),
        }),
    };
    toml::to_string(&doc).map_err(|e| ConfigError::Parse(e.to_string()))
}
