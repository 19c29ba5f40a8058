//! The four-metric protocol.
//!
//! A subspace is fitted on *space-train*, probes are trained on projected
//! *probe-train* features and scored on projected *test* features:
//!
//! * retention: concept accuracy on `X·Pᵀ`
//! * leakage: concept accuracy on `X·(I−P)ᵀ`
//! * purity: other-concept error on `X·Pᵀ`
//! * interference: other-concept error on `X·(I−P)ᵀ`
//!
//! All values are percentages. Every report carries the ambient and
//! majority-class bounds computed with the same probe configuration.

mod plot;
mod report;

pub use plot::reports_to_svg;
pub use report::{reports_to_csv, reports_to_json, Bounds, FailedReport, MetricReport, Metrics, ReportEntry, SeedMetrics, SlotError, SplitSummary};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::estimators::{estimate, ConceptSubspace, EstimatorKind, EstimatorOptions};
use crate::linalg::Projector;
use crate::probing::{accuracy, majority_accuracy, project, train_probe, Side, StopReason, TrainConfig};
use crate::rng::DEFAULT_SEED;

/// Slack allowed above ambient accuracy before a report is flagged.
pub const AMBIENT_SLACK: f64 = 2.0;

/// The three data roles. They may alias (overfit setup).
#[derive(Debug, Clone, Copy)]
pub struct Splits<'a> {
    pub space_train: &'a LabeledDataset,
    pub probe_train: &'a LabeledDataset,
    pub test: &'a LabeledDataset,
}

impl<'a> Splits<'a> {
    pub fn new(space_train: &'a LabeledDataset, probe_train: &'a LabeledDataset, test: &'a LabeledDataset) -> Result<Self> {
        let d = space_train.d();
        if probe_train.d() != d || test.d() != d {
            return Err(Error::Protocol(format!(
                "splits disagree on feature dimension ({}, {}, {})",
                d,
                probe_train.d(),
                test.d()
            )));
        }
        Ok(Splits { space_train, probe_train, test })
    }

    /// Fit, probe and score on the same data.
    pub fn overfit(ds: &'a LabeledDataset) -> Self {
        Splits { space_train: ds, probe_train: ds, test: ds }
    }

    pub fn dim(&self) -> usize {
        self.space_train.d()
    }

    fn summary(&self) -> SplitSummary {
        SplitSummary {
            space_train: self.space_train.n(),
            probe_train: self.probe_train.n(),
            test: self.test.n(),
            provenance: self.test.provenance().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptPair {
    pub concept: String,
    pub other: String,
}

impl ConceptPair {
    pub fn new(concept: impl Into<String>, other: impl Into<String>) -> Self {
        ConceptPair { concept: concept.into(), other: other.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub estimators: Vec<EstimatorKind>,
    pub pairs: Vec<ConceptPair>,
    /// LEACE dimensions; empty means the full LEACE subspace. Other
    /// estimators ignore this.
    #[serde(default)]
    pub dims: Vec<usize>,
    /// RAND replicates; the reported RAND metrics are their mean.
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub probe: TrainConfig,
    /// Worker threads for independent reports.
    #[serde(default = "one")]
    pub jobs: usize,
}

fn one() -> usize {
    1
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            estimators: EstimatorKind::ALL.to_vec(),
            pairs: Vec::new(),
            dims: Vec::new(),
            seeds: (0..5).map(|i| DEFAULT_SEED + i).collect(),
            probe: TrainConfig::default(),
            jobs: 1,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self, splits: &Splits) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators requested".into()));
        }
        if self.pairs.is_empty() {
            return Err(Error::Config("no concept pairs requested".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if self.estimators.contains(&EstimatorKind::Rand) && self.seeds.is_empty() {
            return Err(Error::Config("RAND needs at least one seed".into()));
        }
        self.probe.validate()?;
        let d = splits.dim();
        if let Some(&m) = self.dims.iter().find(|&&m| m == 0 || m > d) {
            return Err(Error::Dimension(format!("requested dim {m} outside 1..={d}")));
        }
        for pair in &self.pairs {
            for name in [&pair.concept, &pair.other] {
                for ds in [splits.space_train, splits.probe_train, splits.test] {
                    ds.concept(name)?;
                }
            }
        }
        Ok(())
    }
}

/// One report slot of a protocol run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Job {
    pub estimator: EstimatorKind,
    pub concept: String,
    pub other_concept: String,
    pub dim: Option<usize>,
}

impl ProtocolConfig {
    /// Report slots in configuration order.
    pub fn jobs(&self) -> Vec<Job> {
        let mut out = Vec::new();
        for pair in &self.pairs {
            for &estimator in &self.estimators {
                let dims: Vec<Option<usize>> = if estimator == EstimatorKind::Leace && !self.dims.is_empty() {
                    self.dims.iter().map(|&m| Some(m)).collect()
                } else {
                    vec![None]
                };
                for dim in dims {
                    out.push(Job {
                        estimator,
                        concept: pair.concept.clone(),
                        other_concept: pair.other.clone(),
                        dim,
                    });
                }
            }
        }
        out
    }
}

fn pct(fraction: f64) -> f64 {
    100.0 * fraction
}

struct SideScore {
    accuracy: f64,
    stop: StopReason,
}

fn probe_score(p: Option<(&Projector, Side)>, train: &LabeledDataset, test: &LabeledDataset, concept: &str, cfg: &TrainConfig) -> Result<SideScore> {
    let (xtr, xte) = match p {
        Some((p, side)) => (project(p, train.features(), side)?, project(p, test.features(), side)?),
        None => (train.features().clone(), test.features().clone()),
    };
    let c = train.concept(concept)?.num_classes();
    let probe = train_probe(&xtr, train.labels(concept)?, c, cfg)?;
    Ok(SideScore { accuracy: accuracy(&probe, &xte, test.labels(concept)?)?, stop: probe.achieved().stop })
}

/// Checks that both splits use the same class inventory for `concept` and
/// returns flags for classes seen in only one of them.
fn check_classes(probe_train: &LabeledDataset, test: &LabeledDataset, concept: &str) -> Result<Vec<String>> {
    let a = probe_train.concept(concept)?;
    let b = test.concept(concept)?;
    if a.class_names() != b.class_names() {
        return Err(Error::Protocol(format!(
            "concept `{concept}` has different class sets in probe-train ({}) and test ({})",
            a.num_classes(),
            b.num_classes()
        )));
    }
    let (ca, cb) = (a.class_counts(), b.class_counts());
    let mut flags = Vec::new();
    let missing: Vec<&str> = (0..ca.len()).filter(|&k| ca[k] > 0 && cb[k] == 0).map(|k| a.class_names()[k].as_str()).collect();
    if !missing.is_empty() {
        flags.push(format!("absent_from_test:{concept}:{}", missing.join("|")));
    }
    let unseen: Vec<&str> = (0..ca.len()).filter(|&k| ca[k] == 0 && cb[k] > 0).map(|k| a.class_names()[k].as_str()).collect();
    if !unseen.is_empty() {
        flags.push(format!("absent_from_probe_train:{concept}:{}", unseen.join("|")));
    }
    Ok(flags)
}

/// `(retention, leakage)` of `p` for `concept`, in percent.
pub fn containment(p: &Projector, probe_train: &LabeledDataset, test: &LabeledDataset, concept: &str, cfg: &TrainConfig) -> Result<(f64, f64)> {
    check_classes(probe_train, test, concept)?;
    let ret = probe_score(Some((p, Side::Onto)), probe_train, test, concept, cfg)?;
    let leak = probe_score(Some((p, Side::Complement)), probe_train, test, concept, cfg)?;
    Ok((pct(ret.accuracy), pct(leak.accuracy)))
}

/// `(purity, interference)` of `p` with respect to `other`, in percent.
pub fn disentanglement(p: &Projector, probe_train: &LabeledDataset, test: &LabeledDataset, other: &str, cfg: &TrainConfig) -> Result<(f64, f64)> {
    check_classes(probe_train, test, other)?;
    let pur = probe_score(Some((p, Side::Onto)), probe_train, test, other, cfg)?;
    let int = probe_score(Some((p, Side::Complement)), probe_train, test, other, cfg)?;
    Ok((pct(1.0 - pur.accuracy), pct(1.0 - int.accuracy)))
}

/// Best/worst-case columns for a concept pair.
pub fn compute_bounds(probe_train: &LabeledDataset, test: &LabeledDataset, concept: &str, other: &str, cfg: &TrainConfig) -> Result<Bounds> {
    check_classes(probe_train, test, concept)?;
    check_classes(probe_train, test, other)?;
    let amb_y = probe_score(None, probe_train, test, concept, cfg)?;
    let amb_o = if other == concept { amb_y.accuracy } else { probe_score(None, probe_train, test, other, cfg)?.accuracy };
    Ok(Bounds {
        ambient_acc_y: pct(amb_y.accuracy),
        majority_y: pct(majority_accuracy(probe_train.labels(concept)?, test.labels(concept)?)?),
        ambient_err_yother: pct(1.0 - amb_o),
        majority_err_yother: pct(1.0 - majority_accuracy(probe_train.labels(other)?, test.labels(other)?)?),
    })
}

/// All four metrics for one projector, plus whether any probe hit its
/// iteration budget.
pub fn evaluate_projector(p: &Projector, probe_train: &LabeledDataset, test: &LabeledDataset, concept: &str, other: &str, cfg: &TrainConfig) -> Result<(Metrics, bool)> {
    check_classes(probe_train, test, concept)?;
    check_classes(probe_train, test, other)?;
    let mut capped = false;
    let mut score = |side, name: &str| -> Result<f64> {
        let s = probe_score(Some((p, side)), probe_train, test, name, cfg)?;
        capped |= s.stop == StopReason::MaxIter;
        Ok(s.accuracy)
    };
    let retention = pct(score(Side::Onto, concept)?);
    let leakage = pct(score(Side::Complement, concept)?);
    let purity = pct(1.0 - score(Side::Onto, other)?);
    let interference = pct(1.0 - score(Side::Complement, other)?);
    Ok((Metrics { retention, leakage, purity, interference }, capped))
}

fn mean_metrics(per_seed: &[SeedMetrics]) -> Metrics {
    let n = per_seed.len() as f64;
    let sum = |f: fn(&Metrics) -> f64| per_seed.iter().map(|s| f(&s.metrics)).sum::<f64>() / n;
    Metrics {
        retention: sum(|m| m.retention),
        leakage: sum(|m| m.leakage),
        purity: sum(|m| m.purity),
        interference: sum(|m| m.interference),
    }
}

fn run_job(splits: &Splits, job: &Job, bounds: &Bounds, base_flags: &[String], cfg: &ProtocolConfig) -> Result<MetricReport> {
    let seeds: Vec<Option<u64>> = if job.estimator == EstimatorKind::Rand {
        cfg.seeds.iter().map(|&s| Some(s)).collect()
    } else {
        vec![None]
    };
    let mut flags = base_flags.to_vec();
    let mut per_seed = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let opts = EstimatorOptions { dim: job.dim, seed, train: cfg.probe };
        let s = estimate(job.estimator, splits.space_train, &job.concept, &opts)?;
        let (metrics, capped) = evaluate_projector(s.projector(), splits.probe_train, splits.test, &job.concept, &job.other_concept, &cfg.probe)?;
        if capped && !flags.iter().any(|f| f == "probe_max_iter") {
            flags.push("probe_max_iter".into());
        }
        if s.rank() == 0 && !flags.iter().any(|f| f == "degenerate_subspace") {
            flags.push("degenerate_subspace".into());
        }
        per_seed.push(SeedMetrics { seed, rank: s.rank(), metrics });
    }
    let metrics = mean_metrics(&per_seed);
    if metrics.retention > bounds.ambient_acc_y + AMBIENT_SLACK {
        flags.push("retention_above_ambient".into());
    }
    if metrics.leakage > bounds.ambient_acc_y + AMBIENT_SLACK {
        flags.push("leakage_above_ambient".into());
    }
    Ok(MetricReport {
        concept: job.concept.clone(),
        other_concept: job.other_concept.clone(),
        estimator: job.estimator,
        dim: job.dim,
        rank: per_seed[0].rank,
        seeds: per_seed.iter().filter_map(|s| s.seed).collect(),
        metrics,
        bounds: bounds.clone(),
        per_seed: if per_seed.len() > 1 { per_seed } else { Vec::new() },
        flags,
        split: splits.summary(),
        probe: cfg.probe,
        run_config: serde_json::Value::Null,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Report for an already fitted subspace (e.g. loaded from a `.csub` file).
pub fn evaluate_subspace(s: &ConceptSubspace, probe_train: &LabeledDataset, test: &LabeledDataset, other: &str, probe: &TrainConfig) -> Result<MetricReport> {
    let splits = Splits::new(probe_train, probe_train, test)?;
    if s.dim() != splits.dim() {
        return Err(Error::Dimension(format!("subspace acts on {} dims, data has {}", s.dim(), splits.dim())));
    }
    let mut flags = check_classes(probe_train, test, &s.concept)?;
    if other != s.concept {
        flags.extend(check_classes(probe_train, test, other)?);
    }
    let bounds = compute_bounds(probe_train, test, &s.concept, other, probe)?;
    let (metrics, capped) = evaluate_projector(s.projector(), probe_train, test, &s.concept, other, probe)?;
    if capped {
        flags.push("probe_max_iter".into());
    }
    if s.rank() == 0 {
        flags.push("degenerate_subspace".into());
    }
    let mut split = splits.summary();
    split.space_train = 0;
    Ok(MetricReport {
        concept: s.concept.clone(),
        other_concept: other.to_string(),
        estimator: s.estimator,
        dim: s.requested_dim,
        rank: s.rank(),
        seeds: s.seed.into_iter().collect(),
        metrics,
        bounds,
        per_seed: Vec::new(),
        flags,
        split,
        probe: *probe,
        run_config: serde_json::Value::Null,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Fit every configured estimator on space-train and report all four
/// metrics. Failures are recorded in their slot; the batch continues.
/// Output order follows [`ProtocolConfig::jobs`] regardless of `jobs`.
pub fn run_protocol(splits: &Splits, cfg: &ProtocolConfig) -> Result<Vec<ReportEntry>> {
    cfg.validate(splits)?;
    let jobs = cfg.jobs();
    pool(cfg.jobs)?.install(|| {
        let bounds: Vec<std::result::Result<(Bounds, Vec<String>), SlotError>> = cfg
            .pairs
            .par_iter()
            .map(|pair| {
                let mut flags = check_classes(splits.probe_train, splits.test, &pair.concept)?;
                if pair.other != pair.concept {
                    flags.extend(check_classes(splits.probe_train, splits.test, &pair.other)?);
                }
                let b = compute_bounds(splits.probe_train, splits.test, &pair.concept, &pair.other, &cfg.probe)?;
                Ok((b, flags))
            })
            .map(|r: Result<_>| r.map_err(SlotError::from))
            .collect();
        let entries = jobs
            .par_iter()
            .map(|job| {
                let idx = cfg.pairs.iter().position(|p| p.concept == job.concept && p.other == job.other_concept).expect("job pair");
                let outcome = match &bounds[idx] {
                    Ok((b, flags)) => run_job(splits, job, b, flags, cfg).map_err(SlotError::from),
                    Err(e) => Err(e.clone()),
                };
                match outcome {
                    Ok(r) => ReportEntry::Ok(r),
                    Err(error) => ReportEntry::Failed(FailedReport::new(job, error)),
                }
            })
            .collect();
        Ok(entries)
    })
}

/// LEACE reports for increasing subspace dimension.
pub fn sweep_dimension(splits: &Splits, concept: &str, other: &str, dims: &[usize], probe: &TrainConfig, jobs: usize) -> Result<Vec<MetricReport>> {
    if dims.is_empty() {
        return Err(Error::Config("sweep needs at least one dimension".into()));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("sweep dims must be strictly ascending, got {dims:?}")));
    }
    let cfg = ProtocolConfig {
        estimators: vec![EstimatorKind::Leace],
        pairs: vec![ConceptPair::new(concept, other)],
        dims: dims.to_vec(),
        seeds: Vec::new(),
        probe: *probe,
        jobs,
    };
    run_protocol(splits, &cfg)?
        .into_iter()
        .map(|e| match e {
            ReportEntry::Ok(r) => Ok(r),
            ReportEntry::Failed(f) => Err(f.error.into_error()),
        })
        .collect()
}

#[cfg(test)]
mod tests;
