//! Parameter sweeps over both engines.

use super::table::{Engine, PointFailure, ResultRow, ResultTable, SweepVariable, TableMetadata};
use super::HarnessError;
use crate::analytic::{self, AnalyticOptions, LayerCombination};
use crate::association::{estimate_connection_probabilities, estimate_pairwise_layer_win};
use crate::config::to_config_string;
use crate::coverage::{estimate_coverage_sweep, estimate_layer_coverage_pairwise};
use crate::energy::{total_energy, SbsLoad};
use crate::estimate::ClassEstimate;
use crate::params::{validate, SystemParams};
use crate::rng::derive_seed;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub const MIN_SWEEP_TRIALS: u64 = 100;

/// Tag mixed into the user seed for the analytic engine's streams.
pub const ANALYTIC_SEED_TAG: u64 = 0xA7A1;

pub mod metric {
    pub const P_MBS: &str = "p_mbs";
    pub const P_SBS: &str = "p_sbs";
    /// Probability the MBS beats every layer at once, without the
    /// independent-layer approximation.
    pub const P_MBS_JOINT: &str = "p_mbs_joint";
    pub const COVERAGE_TOTAL: &str = "coverage_total";
    pub const COVERAGE_MBS: &str = "coverage_mbs";
    pub const COVERAGE_SBS: &str = "coverage_sbs";
    pub const ENERGY_MBS: &str = "energy_mbs_w";
    pub const ENERGY_SBS: &str = "energy_sbs_w";

    /// Probability that the layer's cluster beats the nearest MBS, other
    /// layers ignored.
    pub fn layer_win(i: usize) -> String {
        format!("layer_win_{i}")
    }

    /// Fraction of all users served by the layer.
    pub fn layer_share(i: usize) -> String {
        format!("layer_share_{i}")
    }

    /// Coverage of the layer's cluster given it beats the nearest MBS.
    pub fn coverage_layer(i: usize) -> String {
        format!("coverage_layer_{i}")
    }

    pub fn energy_layer(i: usize) -> String {
        format!("energy_layer_{i}_w")
    }
}

/// Metric families a sweep computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricGroups {
    pub connection: bool,
    pub coverage: bool,
    pub energy: bool,
}

impl Default for MetricGroups {
    fn default() -> Self {
        Self::ALL
    }
}

impl MetricGroups {
    pub const ALL: Self = Self {
        connection: true,
        coverage: true,
        energy: true,
    };
    pub const CONNECTION: Self = Self {
        connection: true,
        coverage: false,
        energy: false,
    };
    pub const COVERAGE: Self = Self {
        connection: false,
        coverage: true,
        energy: false,
    };
    pub const ENERGY: Self = Self {
        connection: false,
        coverage: false,
        energy: true,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub base: SystemParams,
    pub trials: u64,
    pub seed: u64,
    pub engines: Vec<Engine>,
    pub metrics: MetricGroups,
    pub analytic_samples: usize,
}

impl SweepSpec {
    /// Both engines, all metrics, trials and seed taken from `base.sim`.
    pub fn new(variable: SweepVariable, values: Vec<f64>, base: SystemParams) -> Self {
        Self {
            variable,
            values,
            trials: base.sim.trials,
            seed: base.sim.seed,
            base,
            engines: vec![Engine::MonteCarlo, Engine::Analytic],
            metrics: MetricGroups::ALL,
            analytic_samples: AnalyticOptions::default().samples,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Spec(m));
        if self.values.is_empty() {
            return bad("sweep needs at least one value".into());
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return bad(format!("sweep values must be strictly increasing: {:?}", self.values));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        if self.trials < MIN_SWEEP_TRIALS {
            return bad(format!("trials must be at least {MIN_SWEEP_TRIALS}, got {}", self.trials));
        }
        if self.engines.is_empty() {
            return bad("no engine selected".into());
        }
        if self.analytic_samples == 0 {
            return bad("analytic_samples must be positive".into());
        }
        for &v in &self.values {
            let report = validate(&params_at(&self.base, self.variable, v));
            if !report.is_pass() {
                return bad(format!("{} = {v}: {report}", self.variable));
            }
        }
        Ok(())
    }

    fn engines(&self) -> Vec<Engine> {
        let mut e = self.engines.clone();
        e.sort();
        e.dedup();
        e
    }

    /// SHA-256 over the canonical scenario text and the sweep description.
    pub fn config_hash(&self) -> String {
        // the seed is hashed with the sweep fields; zeroing it here keeps the
        // scenario text serializable for any u64 seed
        let mut base = self.base.clone();
        base.sim.seed = 0;
        let mut h = Sha256::new();
        h.update(to_config_string(&base).unwrap_or_default());
        h.update(format!(
            "\n[sweep]\nvariable={}\nvalues={:?}\ntrials={}\nseed={}\nengines={:?}\nmetrics={:?}\nanalytic_samples={}\n",
            self.variable,
            self.values,
            self.trials,
            self.seed,
            self.engines(),
            self.metrics,
            self.analytic_samples
        ));
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Scenario at one sweep point. A density-ratio point rescales every
/// layer's density; a bias point sets every layer's bias; a threshold point
/// sets θ.
pub fn params_at(base: &SystemParams, variable: SweepVariable, value: f64) -> SystemParams {
    match variable {
        SweepVariable::DensityRatio => base.with_density_ratio(value),
        SweepVariable::Bias => base.with_uniform_bias(value),
        SweepVariable::Theta => base.with_snr_threshold(value),
    }
}

struct PointOutput {
    rows: Vec<ResultRow>,
    failures: Vec<PointFailure>,
}

struct RowSink<'a> {
    sweep_value: f64,
    engine: Engine,
    seed: u64,
    out: &'a mut PointOutput,
}

impl RowSink<'_> {
    fn push(&mut self, metric: impl Into<String>, estimate: f64, error: f64, trials: u64) {
        self.out.rows.push(ResultRow {
            sweep_value: self.sweep_value,
            metric: metric.into(),
            engine: self.engine,
            estimate,
            error,
            trials,
            seed: self.seed,
        });
    }

    fn push_class(&mut self, metric: String, c: &ClassEstimate) {
        match &c.estimate {
            Some(e) => {
                if c.low_confidence() {
                    log::warn!("{metric} at {} rests on only {} trials", self.sweep_value, c.class_trials);
                }
                self.push(metric, e.value, e.std_error, c.class_trials);
            }
            None => self.fail(Some(metric), "no trial fell in the conditioning class".into()),
        }
    }

    fn fail(&mut self, metric: Option<String>, message: String) {
        self.out.failures.push(PointFailure {
            sweep_value: self.sweep_value,
            engine: self.engine,
            metric,
            message,
        });
    }
}

/// Runs every requested engine at every sweep value.
///
/// The Monte Carlo engine uses the sweep seed unchanged at every point, so
/// neighbouring points share random numbers and curves are smooth; the
/// analytic engine uses a seed derived from it. A point whose evaluation
/// fails is recorded in the metadata instead of aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultTable, HarnessError> {
    spec.validate()?;
    let engines = spec.engines();
    let mut jobs: Vec<(Engine, Vec<f64>)> = Vec::new();
    for &engine in &engines {
        if spec.variable == SweepVariable::Theta {
            // one job evaluates all thresholds on shared draws
            jobs.push((engine, spec.values.clone()));
        } else {
            jobs.extend(spec.values.iter().map(|&v| (engine, vec![v])));
        }
    }
    let outputs: Vec<PointOutput> = jobs
        .par_iter()
        .map(|(engine, values)| match engine {
            Engine::MonteCarlo => run_mc(spec, values),
            Engine::Analytic => run_analytic(spec, values),
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        failures.extend(o.failures);
    }
    failures.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.engine.cmp(&b.engine))
            .then(a.metric.cmp(&b.metric))
    });
    let metadata = TableMetadata {
        config_hash: spec.config_hash(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        failures,
    };
    ResultTable::new(spec.variable, rows, metadata)
}

/// Thresholds to evaluate at a point: the swept values for a θ sweep,
/// otherwise the scenario's θ.
fn point_thetas(spec: &SweepSpec, values: &[f64]) -> Vec<(f64, f64)> {
    match spec.variable {
        SweepVariable::Theta => values.iter().map(|&v| (v, v)).collect(),
        _ => values.iter().map(|&v| (v, params_at(&spec.base, spec.variable, v).snr_threshold)).collect(),
    }
}

fn run_mc(spec: &SweepSpec, values: &[f64]) -> PointOutput {
    let mut out = PointOutput {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    let seed = spec.seed;
    let n = spec.trials;
    // all values of one job share the θ-independent scenario
    let params = params_at(&spec.base, spec.variable, values[0]);
    let l = params.layer_count();
    let points = point_thetas(spec, values);
    let thetas: Vec<f64> = points.iter().map(|p| p.1).collect();

    let need_conn = spec.metrics.connection || spec.metrics.energy;
    let conn = need_conn.then(|| estimate_connection_probabilities(&params, n, seed));
    let wins: Option<Vec<_>> = spec.metrics.connection.then(|| {
        (1..=l)
            .map(|i| estimate_pairwise_layer_win(&params, i, n, seed).expect("layer index in range"))
            .collect()
    });
    let coverage = spec.metrics.coverage.then(|| {
        let overall = estimate_coverage_sweep(&params, &thetas, n, seed);
        let per_layer: Vec<_> = (1..=l)
            .map(|i| estimate_layer_coverage_pairwise(&params, i, &thetas, n, seed).expect("layer index in range"))
            .collect();
        (overall, per_layer)
    });

    for (j, &(x, _)) in points.iter().enumerate() {
        let mut sink = RowSink {
            sweep_value: x,
            engine: Engine::MonteCarlo,
            seed,
            out: &mut out,
        };
        if let (true, Some(c)) = (spec.metrics.connection, &conn) {
            sink.push(metric::P_MBS, c.p_mbs.value, c.p_mbs.std_error, n);
            sink.push(metric::P_SBS, c.p_sbs.value, c.p_sbs.std_error, n);
            sink.push(metric::P_MBS_JOINT, c.p_mbs.value, c.p_mbs.std_error, n);
            for (i, e) in c.per_layer.iter().enumerate() {
                sink.push(metric::layer_share(i + 1), e.value, e.std_error, n);
            }
        }
        if let Some(w) = &wins {
            for (i, e) in w.iter().enumerate() {
                sink.push(metric::layer_win(i + 1), e.value, e.std_error, n);
            }
        }
        if let Some((overall, per_layer)) = &coverage {
            let r = &overall[j];
            sink.push(metric::COVERAGE_TOTAL, r.total.value, r.total.std_error, n);
            sink.push_class(metric::COVERAGE_MBS.into(), &r.mbs_conditional);
            sink.push_class(metric::COVERAGE_SBS.into(), &r.sbs_conditional);
            for (i, layer) in per_layer.iter().enumerate() {
                sink.push_class(metric::coverage_layer(i + 1), &layer[j]);
            }
        }
        if let (true, Some(c)) = (spec.metrics.energy, &conn) {
            let shares = c.per_layer_values();
            push_energy(&mut sink, &params, c.p_mbs.value, c.p_mbs.std_error, &shares, &c.per_layer.iter().map(|e| e.std_error).collect::<Vec<_>>(), n);
        }
    }
    out
}

fn push_energy(sink: &mut RowSink<'_>, params: &SystemParams, p_mbs: f64, p_mbs_err: f64, shares: &[f64], share_err: &[f64], n: u64) {
    // MC shares sum to 1 - p_mbs up to rounding; renormalize the last bits
    let sum: f64 = shares.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 {
        shares.iter().map(|s| s * (1.0 - p_mbs) / sum).collect()
    } else {
        shares.to_vec()
    };
    match total_energy(&params.energy, params, p_mbs, &shares, SbsLoad::PerLayerShare) {
        Ok(b) => {
            let e = &params.energy;
            let mbs_slope = e.num_users as f64 * params.mbs_power_watts / e.mbs_capacity_users as f64;
            let sbs_slope = params.cluster_size as f64 * e.num_users as f64 * (e.sbs_static_watts + e.backhaul_watts);
            sink.push(metric::ENERGY_MBS, b.mbs_total_watts, mbs_slope * p_mbs_err, n);
            sink.push(metric::ENERGY_SBS, b.sbs_total_watts, sbs_slope * p_mbs_err, n);
            for (i, (w, se)) in b.per_layer_watts.iter().zip(share_err).enumerate() {
                sink.push(metric::energy_layer(i + 1), *w, sbs_slope * se, n);
            }
        }
        Err(e) => sink.fail(Some("energy".into()), e.to_string()),
    }
}

fn run_analytic(spec: &SweepSpec, values: &[f64]) -> PointOutput {
    let mut out = PointOutput {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    let opts = AnalyticOptions {
        samples: spec.analytic_samples,
        seed: derive_seed(spec.seed, ANALYTIC_SEED_TAG),
        ..AnalyticOptions::default()
    };
    let samples = spec.analytic_samples as u64;
    for (x, theta) in point_thetas(spec, values) {
        let params = params_at(&spec.base, spec.variable, x);
        let mut sink = RowSink {
            sweep_value: x,
            engine: Engine::Analytic,
            seed: spec.seed,
            out: &mut out,
        };
        let l = params.layer_count();
        let wins = match (1..=l)
            .map(|i| analytic::connection_prob_layer(&params, i, &opts))
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(w) => w,
            Err(e) => {
                sink.fail(None, e.to_string());
                continue;
            }
        };
        let product = analytic::product_of_complements(&wins);
        let (p_mbs, p_mbs_err) = (product.value, product.abs_error_bound);
        let win_values: Vec<f64> = wins.iter().map(|w| w.value).collect();
        let shares = analytic::layer_shares(p_mbs, &win_values);
        if spec.metrics.connection {
            sink.push(metric::P_MBS, p_mbs, p_mbs_err, samples);
            sink.push(metric::P_SBS, 1.0 - p_mbs, p_mbs_err, samples);
            match analytic::connection_prob_mbs_joint(&params, &opts) {
                Ok(j) => sink.push(metric::P_MBS_JOINT, j.value, j.abs_error_bound, samples),
                Err(e) => sink.fail(Some(metric::P_MBS_JOINT.into()), e.to_string()),
            }
            for (i, w) in wins.iter().enumerate() {
                sink.push(metric::layer_win(i + 1), w.value, w.abs_error_bound, samples);
                sink.push(metric::layer_share(i + 1), shares[i], w.abs_error_bound, samples);
            }
        }
        if spec.metrics.coverage {
            match analytic::total_coverage_with(&params, theta, params.mbs_interference, LayerCombination::ShareWeighted, &opts) {
                Ok(t) => {
                    sink.push(metric::COVERAGE_TOTAL, t.total.value, t.total.abs_error_bound, samples);
                    if p_mbs > 0.0 {
                        sink.push(metric::COVERAGE_MBS, t.mbs_conditional.value, t.mbs_conditional.abs_error_bound, samples);
                    }
                    sink.push(metric::COVERAGE_SBS, t.sbs_conditional.value, t.sbs_conditional.abs_error_bound, samples);
                    for (i, c) in t.per_layer_conditional.iter().enumerate() {
                        match c {
                            Some(c) => sink.push(metric::coverage_layer(i + 1), c.value, c.abs_error_bound, samples),
                            None => sink.fail(Some(metric::coverage_layer(i + 1)), "layer never wins association".into()),
                        }
                    }
                }
                Err(e) => sink.fail(Some("coverage".into()), e.to_string()),
            }
        }
        if spec.metrics.energy {
            let errs: Vec<f64> = wins.iter().map(|w| w.abs_error_bound).collect();
            push_energy(&mut sink, &params, p_mbs, p_mbs_err, &shares, &errs, samples);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_paper_scenario;

    fn small(variable: SweepVariable, values: Vec<f64>) -> SweepSpec {
        let mut base = default_paper_scenario();
        base.layers.truncate(2);
        SweepSpec {
            trials: 300,
            seed: 4,
            analytic_samples: 1000,
            ..SweepSpec::new(variable, values, base)
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = small(SweepVariable::Bias, vec![2.0, 1.0]);
        assert!(s.validate().is_err());
        s.values = vec![1.0, 2.0];
        s.trials = 99;
        assert!(s.validate().is_err());
        s.trials = 100;
        s.engines.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn cardinality_per_point_and_engine() {
        let mut s = small(SweepVariable::DensityRatio, vec![1.0, 25.0]);
        s.metrics = MetricGroups::CONNECTION;
        let t = run_sweep(&s).unwrap();
        // p_mbs, p_sbs, p_mbs_joint, 2 shares, 2 wins
        assert_eq!(t.rows.len(), 2 * 2 * 7);
        assert!(t.metadata.failures.is_empty());
    }

    #[test]
    fn reruns_are_identical() {
        let mut s = small(SweepVariable::Theta, vec![0.5, 5.0]);
        s.metrics = MetricGroups::COVERAGE;
        let a = run_sweep(&s).unwrap();
        let b = run_sweep(&s).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        assert_eq!(a.metadata.config_hash, b.metadata.config_hash);
    }

    #[test]
    fn config_hash_tracks_the_seed() {
        let a = small(SweepVariable::Bias, vec![1.0]);
        let b = SweepSpec { seed: 5, ..a.clone() };
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
