//! # hetnet-sim
//!
//! Stochastic-geometry evaluation of user offloading from a macro base
//! station (MBS) tier to hierarchical layers of cooperative small-cell
//! (SBS) clusters.
//!
//! Two engines compute the same indicators:
//! - a Monte Carlo engine that samples Poisson deployments around a typical
//!   user at the origin ([`association`], [`coverage`]);
//! - a semi-analytic engine that evaluates the integral expressions by
//!   quadrature and importance sampling over the ordered-distance law
//!   ([`analytic`]).
//!
//! Connection probabilities feed the static-plus-load energy model in
//! [`energy`], and [`harness`] drives parameter sweeps, figure reproduction
//! and engine cross-validation.

pub mod analytic;
pub mod association;
pub mod config;
pub mod coverage;
pub mod energy;
pub mod estimate;
pub mod geometry;
pub mod harness;
pub mod params;
pub mod propagation;
pub mod quad;
pub mod rng;

pub use association::{
    associate, estimate_connection_probabilities, estimate_pairwise_layer_win,
    ConnectionEstimates, ServingKind, ServingSet,
};
pub use config::{load_config, to_config_string, ConfigError};
pub use coverage::{compute_sinr, estimate_coverage, estimate_coverage_sweep, CoverageResult, SinrSample};
pub use estimate::{ClassEstimate, MonteCarloEstimate};
pub use geometry::{Deployment, OrderedDistances, Point2D};
pub use params::{
    default_paper_scenario, validate, EnergyParams, LayerParams, MbsInterference, SimSettings,
    SystemParams, ValidationReport,
};
