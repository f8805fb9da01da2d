//! The six standard result figures: sweep definition, CSV and SVG output.

use super::svg::{LinePlot, Series};
use super::sweep::{metric, run_sweep, MetricGroups, SweepSpec};
use super::table::{Engine, ResultTable, SweepVariable};
use super::HarnessError;
use crate::params::{SystemParams, DEFAULT_DENSITY_RATIO};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// `λ_s/λ_m ∈ {1, 5, 10, …, 100}`.
pub fn density_ratio_grid() -> Vec<f64> {
    std::iter::once(1.0).chain((1..=20).map(|i| 5.0 * i as f64)).collect()
}

pub const THETA_GRID: [f64; 8] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
pub const BIAS_GRID: [f64; 3] = [2.0, 4.0, 8.0];

/// Importance-sampling budget per analytic quantity in figure runs.
pub const FIGURE_ANALYTIC_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    ConnectionPerLayer,
    CoveragePerLayer,
    EnergyPerLayer,
    OverallConnection,
    OverallCoverage,
    OverallEnergy,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [
        FigureId::ConnectionPerLayer,
        FigureId::CoveragePerLayer,
        FigureId::EnergyPerLayer,
        FigureId::OverallConnection,
        FigureId::OverallCoverage,
        FigureId::OverallEnergy,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            FigureId::ConnectionPerLayer => "connection-per-layer",
            FigureId::CoveragePerLayer => "coverage-per-layer",
            FigureId::EnergyPerLayer => "energy-per-layer",
            FigureId::OverallConnection => "overall-connection",
            FigureId::OverallCoverage => "overall-coverage",
            FigureId::OverallEnergy => "overall-energy",
        }
    }

    /// Alias `result1` … `result6`.
    pub fn alias(self) -> String {
        let i = Self::ALL.iter().position(|&f| f == self).expect("listed");
        format!("result{}", i + 1)
    }

    fn title(self) -> &'static str {
        match self {
            FigureId::ConnectionPerLayer => "Connection probability of SBS layers",
            FigureId::CoveragePerLayer => "Coverage probability of SBS layers",
            FigureId::EnergyPerLayer => "Energy consumption of SBS layers",
            FigureId::OverallConnection => "Overall connection probability",
            FigureId::OverallCoverage => "Overall coverage probability",
            FigureId::OverallEnergy => "Overall energy consumption",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|f| f.slug() == s || f.alias() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|f| f.slug()).collect();
                format!("unknown figure `{s}`; expected one of {} or result1..result6", names.join(", "))
            })
    }
}

/// Sweep behind a figure. Coverage figures hold `λ_s = 50 λ_m`.
pub fn figure_spec(id: FigureId, base: &SystemParams, trials: u64, seed: u64) -> SweepSpec {
    let (variable, values, metrics, base) = match id {
        FigureId::ConnectionPerLayer | FigureId::OverallConnection => {
            (SweepVariable::DensityRatio, density_ratio_grid(), MetricGroups::CONNECTION, base.clone())
        }
        FigureId::EnergyPerLayer | FigureId::OverallEnergy => (
            SweepVariable::DensityRatio,
            density_ratio_grid(),
            MetricGroups {
                connection: true,
                coverage: false,
                energy: true,
            },
            base.clone(),
        ),
        FigureId::CoveragePerLayer | FigureId::OverallCoverage => (
            SweepVariable::Theta,
            THETA_GRID.to_vec(),
            MetricGroups::COVERAGE,
            base.with_density_ratio(DEFAULT_DENSITY_RATIO),
        ),
    };
    SweepSpec {
        variable,
        values,
        trials,
        seed,
        metrics,
        analytic_samples: FIGURE_ANALYTIC_SAMPLES,
        ..SweepSpec::new(variable, Vec::new(), base)
    }
}

fn plot_for(id: FigureId, table: &ResultTable, layers: usize) -> LinePlot {
    let mc = |name: String, label: String| Series {
        points: table.series(&name, Engine::MonteCarlo),
        name: label,
    };
    let both = |name: &str, label: &str| {
        vec![
            Series {
                name: format!("{label} (MC)"),
                points: table.series(name, Engine::MonteCarlo),
            },
            Series {
                name: format!("{label} (analytic)"),
                points: table.series(name, Engine::Analytic),
            },
        ]
    };
    let per_layer = |f: fn(usize) -> String| (1..=layers).map(|i| mc(f(i), format!("layer {i}"))).collect::<Vec<_>>();
    let ratio = "density ratio λs/λm";
    let (x_label, y_label, log_x, series) = match id {
        FigureId::ConnectionPerLayer => (ratio, "connection probability", false, per_layer(metric::layer_win)),
        FigureId::CoveragePerLayer => ("SINR threshold θ", "coverage probability", true, per_layer(metric::coverage_layer)),
        FigureId::EnergyPerLayer => (ratio, "power (W)", false, per_layer(metric::energy_layer)),
        FigureId::OverallConnection => {
            let mut s = both(metric::P_MBS, "P_MBS");
            s.extend(both(metric::P_SBS, "P_SBS"));
            (ratio, "connection probability", false, s)
        }
        FigureId::OverallCoverage => {
            let mut s = both(metric::COVERAGE_MBS, "MBS-served");
            s.extend(both(metric::COVERAGE_SBS, "SBS-served"));
            s.extend(both(metric::COVERAGE_TOTAL, "total"));
            ("SINR threshold θ", "coverage probability", true, s)
        }
        FigureId::OverallEnergy => {
            let mut s = both(metric::ENERGY_MBS, "MBS tier");
            s.extend(both(metric::ENERGY_SBS, "SBS tiers"));
            (ratio, "power (W)", false, s)
        }
    };
    LinePlot {
        title: id.title().into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        log_x,
        series,
    }
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub table: ResultTable,
}

/// Runs the figure's sweep and writes `<slug>.csv`, `<slug>.meta.toml` and
/// `<slug>.svg` into `out_dir`.
pub fn reproduce_figure(id: FigureId, base: &SystemParams, trials: u64, seed: u64, out_dir: &Path) -> Result<FigureOutput, HarnessError> {
    let spec = figure_spec(id, base, trials, seed);
    let table = run_sweep(&spec)?;
    fs::create_dir_all(out_dir)?;
    table.save(out_dir, id.slug())?;
    let svg = out_dir.join(format!("{}.svg", id.slug()));
    fs::write(&svg, plot_for(id, &table, base.layer_count()).render())?;
    Ok(FigureOutput {
        csv: out_dir.join(format!("{}.csv", id.slug())),
        svg,
        table,
    })
}
