//! Concept-subspace estimators.
//!
//! Five estimators build a basis matrix `Y` and take the orthogonal projector
//! onto its column space (MLR, LDA, CPCA, COV, RAND). LEACE instead builds
//! the oblique projector `P = Σ^{1/2}·U·Uᵀ·Σ^{-1/2}`, where `U` are the left
//! singular vectors of the whitened cross-covariance `Σ^{-1/2}·Σ_xy`; erasing
//! the concept means applying `I − P`.

mod artifact;
mod moments;

pub use artifact::{read_subspace, subspace_from_bytes, subspace_to_bytes, write_subspace, SUBSPACE_MAGIC};
pub use moments::{accumulate_moments, MomentAccumulator};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{
    compact_svd, compact_svd_with_floor, oblique_projector, orthogonal_projector, orthogonal_projector_with_floor,
    psd_roots, sym_eig, CompactSvd, Matrix, Projector, REL_TOL,
};
use crate::probing::{train_probe, StopReason, TrainConfig};
use crate::rng::stream_rng;

const RAND_STREAM: u64 = 0x52414e44;

// Singular values of a whitened cross-covariance with one-hot labels never
// exceed sqrt(max_c π_c(1 − π_c)) ≤ 1/2.
const WHITENED_XCOV_SCALE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "MLR")]
    Mlr,
    #[serde(rename = "LDA")]
    Lda,
    #[serde(rename = "CPCA")]
    Cpca,
    #[serde(rename = "COV")]
    Cov,
    #[serde(rename = "LEACE")]
    Leace,
    #[serde(rename = "RAND")]
    Rand,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        EstimatorKind::Mlr,
        EstimatorKind::Lda,
        EstimatorKind::Cpca,
        EstimatorKind::Cov,
        EstimatorKind::Leace,
        EstimatorKind::Rand,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Mlr => "MLR",
            EstimatorKind::Lda => "LDA",
            EstimatorKind::Cpca => "CPCA",
            EstimatorKind::Cov => "COV",
            EstimatorKind::Leace => "LEACE",
            EstimatorKind::Rand => "RAND",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown estimator `{s}`")))
    }
}

/// An estimated concept subspace and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptSubspace {
    pub projector: Projector,
    pub estimator: EstimatorKind,
    pub concept: String,
    pub requested_dim: Option<usize>,
    pub seed: Option<u64>,
    pub fit_stats: BTreeMap<String, Value>,
}

impl ConceptSubspace {
    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    pub fn rank(&self) -> usize {
        self.projector.rank()
    }

    fn new(projector: Projector, estimator: EstimatorKind, concept: &str) -> Self {
        ConceptSubspace {
            projector,
            estimator,
            concept: concept.to_string(),
            requested_dim: None,
            seed: None,
            fit_stats: BTreeMap::new(),
        }
    }

    fn stat(mut self, key: &str, value: Value) -> Self {
        self.fit_stats.insert(key.to_string(), value);
        self
    }
}

/// Per-estimator knobs; fields an estimator does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// LEACE subspace dimension `M`.
    pub dim: Option<usize>,
    /// RAND seed.
    pub seed: Option<u64>,
    /// MLR training config.
    pub train: TrainConfig,
}

/// Fit `kind` for `concept` on `ds`.
pub fn estimate(kind: EstimatorKind, ds: &LabeledDataset, concept: &str, opts: &EstimatorOptions) -> Result<ConceptSubspace> {
    match kind {
        EstimatorKind::Mlr => estimate_mlr(ds, concept, &opts.train),
        EstimatorKind::Lda => estimate_lda(ds, concept),
        EstimatorKind::Cpca => estimate_cpca(ds, concept),
        EstimatorKind::Cov => estimate_cov(ds, concept),
        EstimatorKind::Leace => estimate_leace(ds, concept, opts.dim),
        EstimatorKind::Rand => {
            let c = ds.concept(concept)?.num_classes();
            estimate_rand(ds.d(), c, opts.seed.unwrap_or(0), concept)
        }
    }
}

fn require_two_present(ds: &LabeledDataset, concept: &str) -> Result<Vec<u32>> {
    let present = ds.concept(concept)?.present_classes();
    if present.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "concept `{concept}` needs at least two classes present, found {}",
            present.len()
        )));
    }
    Ok(present)
}

fn svals(svd: &CompactSvd) -> Value {
    json!(svd.s)
}

/// Multinomial logistic regression; the subspace is the row space of `W`.
pub fn estimate_mlr(ds: &LabeledDataset, concept: &str, cfg: &TrainConfig) -> Result<ConceptSubspace> {
    let present = require_two_present(ds, concept)?;
    // Train on present classes only so absent ones add no spurious directions.
    let mut remap = vec![u32::MAX; ds.concept(concept)?.num_classes()];
    for (i, &c) in present.iter().enumerate() {
        remap[c as usize] = i as u32;
    }
    let labels: Vec<u32> = ds.labels(concept)?.iter().map(|&l| remap[l as usize]).collect();
    let probe = train_probe(ds.features(), &labels, present.len(), cfg)?;
    let fit = *probe.achieved();
    if fit.stop == StopReason::MaxIter {
        return Err(Error::Fit {
            message: format!("MLR did not converge in {} iterations", cfg.max_iter),
            grad_norm: fit.grad_norm,
        });
    }
    let y = probe.weights().transpose();
    let svd = compact_svd(&y, REL_TOL)?;
    let projector = orthogonal_projector(&y, REL_TOL)?;
    Ok(ConceptSubspace::new(projector, EstimatorKind::Mlr, concept)
        .stat("singular_values", svals(&svd))
        .stat("effective_rank", json!(svd.rank()))
        .stat("classes", json!(present.len()))
        .stat("train_loss", json!(fit.loss))
        .stat("grad_norm", json!(fit.grad_norm))
        .stat("iterations", json!(fit.iterations))
        .stat("stop", json!(fit.stop)))
}

/// Fisher discriminant directions: eigenvectors of `Σ_w^{-1} Σ_b` computed
/// through the symmetric form `S Σ_b S` with `S = Σ_w^{-1/2}`.
pub fn estimate_lda(ds: &LabeledDataset, concept: &str) -> Result<ConceptSubspace> {
    let present = require_two_present(ds, concept)?;
    let m = accumulate_moments(ds, concept)?;
    let roots = psd_roots(&m.cov_within(), REL_TOL)?;
    if roots.rank == 0 {
        return Err(Error::DegenerateCovariance("within-class covariance is zero".into()));
    }
    let s = &roots.inv_sqrt;
    let eig = sym_eig(&crate::linalg::symmetrize(&(s * m.cov_between() * s)))?;
    // Eigenvalues are between/within variance ratios; ratios below rel_tol
    // carry no discriminative signal.
    let lambda_max = eig.values.first().copied().unwrap_or(0.0);
    let cutoff = REL_TOL * lambda_max.max(1.0);
    let keep = eig.values.iter().take_while(|&&v| v > cutoff).count().min(present.len());
    let dirs = s * eig.vectors.columns(0, keep);
    let projector = orthogonal_projector(&dirs, REL_TOL)?;
    Ok(ConceptSubspace::new(projector, EstimatorKind::Lda, concept)
        .stat("eigenvalues", json!(eig.values[..keep]))
        .stat("effective_rank", json!(keep))
        .stat("within_rank", json!(roots.rank)))
}

/// Span of the raw (uncentred) class centroids.
pub fn estimate_cpca(ds: &LabeledDataset, concept: &str) -> Result<ConceptSubspace> {
    let c = ds.concept(concept)?;
    let counts = c.class_counts();
    let present: Vec<usize> = (0..counts.len()).filter(|&k| counts[k] > 0).collect();
    let mut centroids = Matrix::zeros(ds.d(), present.len());
    for (i, row) in ds.features().row_iter().enumerate() {
        let l = c.labels()[i] as usize;
        let col = present.binary_search(&l).expect("label is present");
        let mut dst = centroids.column_mut(col);
        dst += row.transpose() / counts[l] as f64;
    }
    let svd = compact_svd(&centroids, REL_TOL)?;
    let projector = orthogonal_projector(&centroids, REL_TOL)?;
    Ok(ConceptSubspace::new(projector, EstimatorKind::Cpca, concept)
        .stat("singular_values", svals(&svd))
        .stat("classes", json!(present.len()))
        .stat("absent_classes", json!(counts.len() - present.len())))
}

/// Span of the feature/one-hot cross-covariance.
pub fn estimate_cov(ds: &LabeledDataset, concept: &str) -> Result<ConceptSubspace> {
    require_two_present(ds, concept)?;
    let m = accumulate_moments(ds, concept)?;
    let cov_xy = m.cov_xy();
    let scale = WHITENED_XCOV_SCALE * m.cov_xx().trace().max(0.0).sqrt();
    let svd = compact_svd_with_floor(&cov_xy, REL_TOL, scale)?;
    let projector = orthogonal_projector_with_floor(&cov_xy, REL_TOL, scale)?;
    let ratio = if scale > 0.0 { svd.s.first().copied().unwrap_or(0.0) / scale } else { 0.0 };
    Ok(ConceptSubspace::new(projector, EstimatorKind::Cov, concept)
        .stat("singular_values", svals(&svd))
        .stat("effective_rank", json!(svd.rank()))
        .stat("signal_ratio", json!(ratio)))
}

/// LEACE projector, optionally truncated (or extended) to `dim` directions.
///
/// When `dim` exceeds the number of whitened cross-covariance directions the
/// basis is completed with whitened directions orthogonal to them, so that
/// `dim = D` on full-rank data yields `P = I`.
pub fn estimate_leace(ds: &LabeledDataset, concept: &str, dim: Option<usize>) -> Result<ConceptSubspace> {
    require_two_present(ds, concept)?;
    if let Some(m) = dim {
        if m == 0 || m > ds.d() {
            return Err(Error::Dimension(format!("LEACE dim must be in 1..={}, got {m}", ds.d())));
        }
    }
    let m = accumulate_moments(ds, concept)?;
    leace_from_moments(&m, concept, dim)
}

pub fn leace_from_moments(m: &MomentAccumulator, concept: &str, dim: Option<usize>) -> Result<ConceptSubspace> {
    let roots = psd_roots(&m.cov_xx(), REL_TOL)?;
    if roots.rank == 0 {
        return Err(Error::DegenerateCovariance("feature covariance is numerically zero".into()));
    }
    let whitened = &roots.inv_sqrt * m.cov_xy();
    let mut svd = compact_svd_with_floor(&whitened, REL_TOL, WHITENED_XCOV_SCALE)?;
    let signal_rank = svd.rank();
    let mut u = svd.u.clone();
    if let Some(k) = dim {
        if k <= signal_rank {
            svd.truncate(k);
            u = svd.u.clone();
        } else {
            u = extend_in_range(&u, &roots.inv_sqrt, &roots.sqrt, k)?;
        }
    }
    let p = &roots.sqrt * &u * (u.transpose() * &roots.inv_sqrt);
    let projector = oblique_projector(&p)?;
    let mut out = ConceptSubspace::new(projector, EstimatorKind::Leace, concept)
        .stat("singular_values", svals(&svd))
        .stat("signal_rank", json!(signal_rank))
        .stat("covariance_rank", json!(roots.rank));
    out.requested_dim = dim;
    Ok(out)
}

/// Append orthonormal directions from the whitened range (`range(W·Σ^{1/2})`)
/// that are orthogonal to `u`, until there are `k` columns or the range is
/// exhausted.
fn extend_in_range(u: &Matrix, inv_sqrt: &Matrix, sqrt: &Matrix, k: usize) -> Result<Matrix> {
    let range = inv_sqrt * sqrt;
    let resid = &range - u * (u.transpose() * &range);
    let extra = compact_svd(&resid, REL_TOL)?.u;
    let take = (k - u.ncols()).min(extra.ncols());
    let mut out = Matrix::zeros(u.nrows(), u.ncols() + take);
    out.columns_mut(0, u.ncols()).copy_from(u);
    out.columns_mut(u.ncols(), take).copy_from(&extra.columns(0, take));
    Ok(out)
}

/// Span of `C` Gaussian vectors drawn from `N(0, I/C)`.
pub fn estimate_rand(dim: usize, num_classes: usize, seed: u64, concept: &str) -> Result<ConceptSubspace> {
    if num_classes == 0 || num_classes > dim {
        return Err(Error::Dimension(format!(
            "RAND needs 1 <= classes <= D, got {num_classes} classes in D={dim}"
        )));
    }
    let normal = Normal::new(0.0, (1.0 / num_classes as f64).sqrt()).expect("valid std");
    let mut rng = stream_rng(seed, RAND_STREAM);
    let y = Matrix::from_fn(dim, num_classes, |_, _| normal.sample(&mut rng));
    let projector = orthogonal_projector(&y, REL_TOL)?;
    let mut out = ConceptSubspace::new(projector, EstimatorKind::Rand, concept);
    out.seed = Some(seed);
    Ok(out)
}

#[cfg(test)]
mod tests;
