//! Result rows, CSV persistence and run metadata.

use super::HarnessError;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

/// Column order of every results file.
pub const CSV_HEADER: [&str; 8] = [
    "sweep_variable",
    "sweep_value",
    "metric",
    "engine",
    "estimate",
    "error",
    "trials",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SweepVariable {
    DensityRatio,
    Bias,
    Theta,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::DensityRatio => "density_ratio",
            SweepVariable::Bias => "bias",
            SweepVariable::Theta => "theta",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "density_ratio" => Ok(SweepVariable::DensityRatio),
            "bias" => Ok(SweepVariable::Bias),
            "theta" => Ok(SweepVariable::Theta),
            _ => Err(format!("unknown sweep variable `{s}` (expected density_ratio, bias or theta)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Engine {
    MonteCarlo,
    Analytic,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::MonteCarlo => "mc",
            Engine::Analytic => "analytic",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mc" => Ok(Engine::MonteCarlo),
            "analytic" => Ok(Engine::Analytic),
            _ => Err(format!("unknown engine `{s}` (expected mc or analytic)")),
        }
    }
}

/// One estimate. For conditional metrics `trials` counts the trials that
/// fell in the conditioning class.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub metric: String,
    pub engine: Engine,
    pub estimate: f64,
    /// Standard error (Monte Carlo, importance sampling) or quadrature bound.
    pub error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl ResultRow {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.sweep_value
            .total_cmp(&other.sweep_value)
            .then_with(|| self.metric.cmp(&other.metric))
            .then_with(|| self.engine.cmp(&other.engine))
    }
}

/// A sweep point (or a single metric at it) that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub sweep_value: f64,
    pub engine: Engine,
    pub metric: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    /// SHA-256 of the canonical scenario and sweep description.
    pub config_hash: String,
    pub tool_version: String,
    /// RFC 3339 creation time; the only field that differs between reruns.
    pub timestamp: String,
    #[serde(default)]
    pub failures: Vec<PointFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub sweep_variable: SweepVariable,
    pub rows: Vec<ResultRow>,
    pub metadata: TableMetadata,
}

impl ResultTable {
    /// Sorts rows by (sweep_value, metric, engine) and rejects duplicates.
    pub fn new(sweep_variable: SweepVariable, mut rows: Vec<ResultRow>, metadata: TableMetadata) -> Result<Self, HarnessError> {
        rows.sort_by(ResultRow::key_cmp);
        if let Some(w) = rows.windows(2).find(|w| w[0].key_cmp(&w[1]) == Ordering::Equal) {
            return Err(HarnessError::Table(format!(
                "duplicate row for {} = {}, metric {}, engine {}",
                sweep_variable, w[0].sweep_value, w[0].metric, w[0].engine
            )));
        }
        Ok(Self {
            sweep_variable,
            rows,
            metadata,
        })
    }

    pub fn find(&self, sweep_value: f64, metric: &str, engine: Engine) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.metric == metric && r.engine == engine)
    }

    /// `(sweep_value, estimate)` pairs of one metric, in sweep order.
    pub fn series(&self, metric: &str, engine: Engine) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.engine == engine)
            .map(|r| (r.sweep_value, r.estimate))
            .collect()
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().map(|r| r.sweep_value).collect();
        v.dedup();
        v
    }

    pub fn metrics(&self) -> Vec<String> {
        let mut m: Vec<String> = self.rows.iter().map(|r| r.metric.clone()).collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                self.sweep_variable.as_str().to_string(),
                r.sweep_value.to_string(),
                r.metric.clone(),
                r.engine.as_str().to_string(),
                r.estimate.to_string(),
                r.error.to_string(),
                r.trials.to_string(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Parses rows written by [`ResultTable::write_csv`]. Metadata is not part
    /// of the CSV and must be supplied.
    pub fn read_csv<R: Read>(input: R, metadata: TableMetadata) -> Result<Self, HarnessError> {
        let mut rdr = csv::Reader::from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(HarnessError::Table(format!("unexpected header {header:?}")));
        }
        let mut variable = None;
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| HarnessError::Table(format!("row {}: bad {what}", i + 1));
            let v: SweepVariable = rec[0].parse().map_err(|_| bad("sweep_variable"))?;
            if *variable.get_or_insert(v) != v {
                return Err(bad("sweep_variable (mixed variables)"));
            }
            rows.push(ResultRow {
                sweep_value: rec[1].parse().map_err(|_| bad("sweep_value"))?,
                metric: rec[2].to_string(),
                engine: rec[3].parse().map_err(|_| bad("engine"))?,
                estimate: rec[4].parse().map_err(|_| bad("estimate"))?,
                error: rec[5].parse().map_err(|_| bad("error"))?,
                trials: rec[6].parse().map_err(|_| bad("trials"))?,
                seed: rec[7].parse().map_err(|_| bad("seed"))?,
            });
        }
        let variable = variable.ok_or_else(|| HarnessError::Table("no rows".into()))?;
        Self::new(variable, rows, metadata)
    }

    /// Writes `<stem>.csv` and `<stem>.meta.toml` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        self.write_csv(fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        let meta = toml::to_string(&self.metadata).map_err(|e| HarnessError::Table(e.to_string()))?;
        fs::write(dir.join(format!("{stem}.meta.toml")), meta)?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self, HarnessError> {
        let meta = fs::read_to_string(dir.join(format!("{stem}.meta.toml")))?;
        let metadata: TableMetadata = toml::from_str(&meta).map_err(|e| HarnessError::Table(e.to_string()))?;
        Self::read_csv(fs::File::open(dir.join(format!("{stem}.csv")))?, metadata)
    }
}
