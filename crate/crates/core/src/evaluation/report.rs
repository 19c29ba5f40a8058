use std::io::Write;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use super::Job;
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::probing::TrainConfig;

/// Percentages are kept at full precision in memory and rounded to one
/// decimal only when written out.
fn one_decimal<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64((v * 10.0).round() / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(serialize_with = "one_decimal")]
    pub retention: f64,
    #[serde(serialize_with = "one_decimal")]
    pub leakage: f64,
    #[serde(serialize_with = "one_decimal")]
    pub purity: f64,
    #[serde(serialize_with = "one_decimal")]
    pub interference: f64,
}

/// Best and worst attainable values of the four metrics.
///
/// Retention ranges from `majority_y` (worst) to `ambient_acc_y` (best),
/// leakage the other way round; purity ranges from `ambient_err_yother`
/// (worst) to `majority_err_yother` (best), interference the other way round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(serialize_with = "one_decimal")]
    pub ambient_acc_y: f64,
    #[serde(serialize_with = "one_decimal")]
    pub majority_y: f64,
    #[serde(serialize_with = "one_decimal")]
    pub ambient_err_yother: f64,
    #[serde(serialize_with = "one_decimal")]
    pub majority_err_yother: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: Option<u64>,
    pub rank: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub space_train: usize,
    pub probe_train: usize,
    pub test: usize,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub concept: String,
    pub other_concept: String,
    pub estimator: EstimatorKind,
    pub dim: Option<usize>,
    pub rank: usize,
    pub seeds: Vec<u64>,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub bounds: Bounds,
    /// Individual replicates when metrics are averaged over seeds.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_seed: Vec<SeedMetrics>,
    pub flags: Vec<String>,
    pub split: SplitSummary,
    pub probe: TrainConfig,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub run_config: Value,
    pub version: String,
}

impl MetricReport {
    pub fn retention(&self) -> f64 {
        self.metrics.retention
    }

    pub fn leakage(&self) -> f64 {
        self.metrics.leakage
    }

    pub fn purity(&self) -> f64 {
        self.metrics.purity
    }

    pub fn interference(&self) -> f64 {
        self.metrics.interference
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotError {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl From<Error> for SlotError {
    fn from(e: Error) -> Self {
        SlotError { kind: e.kind().to_string(), message: e.to_string(), exit_code: e.exit_code() }
    }
}

impl SlotError {
    /// Back to an [`Error`] of the same exit class.
    pub fn into_error(self) -> Error {
        let msg = format!("{}: {}", self.kind, self.message);
        match self.exit_code {
            3 => Error::Numerical(msg),
            4 => Error::Io(std::io::Error::other(msg)),
            _ => Error::Protocol(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedReport {
    pub concept: String,
    pub other_concept: String,
    pub estimator: EstimatorKind,
    pub dim: Option<usize>,
    pub error: SlotError,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub run_config: Value,
    pub version: String,
}

impl FailedReport {
    pub(super) fn new(job: &Job, error: SlotError) -> Self {
        FailedReport {
            concept: job.concept.clone(),
            other_concept: job.other_concept.clone(),
            estimator: job.estimator,
            dim: job.dim,
            error,
            run_config: Value::Null,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportEntry {
    Ok(MetricReport),
    Failed(FailedReport),
}

impl ReportEntry {
    pub fn report(&self) -> Option<&MetricReport> {
        match self {
            ReportEntry::Ok(r) => Some(r),
            ReportEntry::Failed(_) => None,
        }
    }

    pub fn error(&self) -> Option<&SlotError> {
        match self {
            ReportEntry::Ok(_) => None,
            ReportEntry::Failed(f) => Some(&f.error),
        }
    }

    pub fn estimator(&self) -> EstimatorKind {
        match self {
            ReportEntry::Ok(r) => r.estimator,
            ReportEntry::Failed(f) => f.estimator,
        }
    }

    pub fn set_run_config(&mut self, cfg: Value) {
        match self {
            ReportEntry::Ok(r) => r.run_config = cfg,
            ReportEntry::Failed(f) => f.run_config = cfg,
        }
    }
}

pub fn reports_to_json(entries: &[ReportEntry]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(entries)?;
    s.push('\n');
    Ok(s)
}

const CSV_HEADER: [&str; 17] = [
    "estimator",
    "concept",
    "other_concept",
    "dim",
    "rank",
    "seeds",
    "retention",
    "leakage",
    "purity",
    "interference",
    "ambient_acc_y",
    "majority_y",
    "ambient_err_yother",
    "majority_err_yother",
    "flags",
    "error",
    "version",
];

fn fmt1(v: f64) -> String {
    format!("{:.1}", v)
}

/// One row per report. The first line is a `#` comment holding the run
/// configuration so the file can be regenerated.
pub fn reports_to_csv<W: Write>(entries: &[ReportEntry], run_config: &Value, mut out: W) -> Result<()> {
    writeln!(out, "# {} {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"), serde_json::to_string(run_config)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for e in entries {
        let row: Vec<String> = match e {
            ReportEntry::Ok(r) => vec![
                r.estimator.to_string(),
                r.concept.clone(),
                r.other_concept.clone(),
                r.dim.map(|d| d.to_string()).unwrap_or_default(),
                r.rank.to_string(),
                r.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";"),
                fmt1(r.metrics.retention),
                fmt1(r.metrics.leakage),
                fmt1(r.metrics.purity),
                fmt1(r.metrics.interference),
                fmt1(r.bounds.ambient_acc_y),
                fmt1(r.bounds.majority_y),
                fmt1(r.bounds.ambient_err_yother),
                fmt1(r.bounds.majority_err_yother),
                r.flags.join(";"),
                String::new(),
                r.version.clone(),
            ],
            ReportEntry::Failed(f) => {
                let mut row = vec![
                    f.estimator.to_string(),
                    f.concept.clone(),
                    f.other_concept.clone(),
                    f.dim.map(|d| d.to_string()).unwrap_or_default(),
                ];
                row.extend(std::iter::repeat_n(String::new(), 11));
                row.push(format!("{}: {}", f.error.kind, f.error.message));
                row.push(f.version.clone());
                row
            }
        };
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
