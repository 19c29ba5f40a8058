//! Synthetic datasets with known concept subspaces.
//!
//! Each concept gets a `signal_dim`-dimensional orthonormal basis `B` and
//! `C` class means `m_c ~ N(0, mean_scale² I)` (centred under the class
//! prior). A row with label `y` receives `B·m_y`, optionally a second copy
//! `B'·(m_y + copy_noise·ε)` in a disjoint basis, and isotropic noise whose
//! variance is the sum of the per-concept `noise_scale²`.
//!
//! The per-coordinate signal-to-noise ratio of a concept is therefore
//! `mean_scale² / Σ noise_scale²`.

use nalgebra::QR;
use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Concept, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream_rng, StreamRng};

const BASIS_STREAM: u64 = 1;
const MEANS_STREAM: u64 = 2;
const COPY_STREAM: u64 = 3;
const ROWS_STREAM: u64 = 0x7000_0000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Overlap {
    /// Mutually orthogonal bases.
    Orthogonal,
    /// Each concept reuses `dims` basis vectors of the previous one.
    Shared { dims: usize },
    /// Independent random bases.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundantCopy {
    /// Extra noise added to the class mean inside the copy basis only.
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConcept {
    pub name: String,
    pub num_classes: usize,
    pub basis_seed: u64,
    pub mean_scale: f64,
    pub noise_scale: f64,
    /// Class prior; uniform when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub class_weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redundant_copy: Option<RedundantCopy>,
}

impl PlantedConcept {
    pub fn new(name: impl Into<String>, num_classes: usize, basis_seed: u64, mean_scale: f64, noise_scale: f64) -> Self {
        PlantedConcept {
            name: name.into(),
            num_classes,
            basis_seed,
            mean_scale,
            noise_scale,
            class_weights: Vec::new(),
            redundant_copy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub dim: usize,
    pub signal_dim: usize,
    pub concepts: Vec<PlantedConcept>,
    pub overlap: Overlap,
}

impl PlantedSpec {
    fn planted_dims(&self) -> usize {
        let copies = self.concepts.iter().filter(|c| c.redundant_copy.is_some()).count();
        let k = self.signal_dim;
        let base = match self.overlap {
            Overlap::Orthogonal => k * self.concepts.len(),
            Overlap::Shared { dims } => {
                k * self.concepts.len() - dims * self.concepts.len().saturating_sub(1)
            }
            Overlap::Random => k,
        };
        base + k * copies
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dim == 0 || self.signal_dim == 0 || self.concepts.is_empty() {
            return bad("planted spec needs dim, signal_dim and at least one concept".into());
        }
        if let Overlap::Shared { dims } = self.overlap {
            if dims > self.signal_dim {
                return bad(format!("shared dims {dims} exceed signal_dim {}", self.signal_dim));
            }
        }
        if self.planted_dims() > self.dim {
            return bad(format!("planted dims {} exceed ambient dim {}", self.planted_dims(), self.dim));
        }
        for c in &self.concepts {
            if c.num_classes == 0 {
                return bad(format!("concept `{}` has no classes", c.name));
            }
            if !(c.mean_scale > 0.0) || c.noise_scale < 0.0 || !c.noise_scale.is_finite() || !c.mean_scale.is_finite() {
                return bad(format!("concept `{}`: mean scale must be positive and noise scale non-negative", c.name));
            }
            if !c.class_weights.is_empty()
                && (c.class_weights.len() != c.num_classes || c.class_weights.iter().any(|w| !(*w > 0.0)))
            {
                return bad(format!("concept `{}`: need {} positive class weights", c.name, c.num_classes));
            }
            if let Some(copy) = &c.redundant_copy {
                if copy.noise_scale < 0.0 || !copy.noise_scale.is_finite() {
                    return bad(format!("concept `{}`: copy noise must be non-negative", c.name));
                }
            }
        }
        Ok(())
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut StreamRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Orthonormal columns spanning `g` after removing `against`.
fn orthonormalize(mut g: Matrix, against: &Matrix) -> Matrix {
    if against.ncols() > 0 {
        // Two passes of classical Gram-Schmidt are enough in double precision.
        for _ in 0..2 {
            let proj = against * (against.transpose() * &g);
            g -= proj;
        }
    }
    QR::new(g).q()
}

fn hstack(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

fn class_prior(c: &PlantedConcept) -> Vec<f64> {
    if c.class_weights.is_empty() {
        vec![1.0 / c.num_classes as f64; c.num_classes]
    } else {
        let s: f64 = c.class_weights.iter().sum();
        c.class_weights.iter().map(|w| w / s).collect()
    }
}

/// Generate `n` rows. Returns the dataset and, per concept, its planted
/// basis (D×K, or D×2K with the redundant copy appended).
pub fn generate_planted(spec: &PlantedSpec, n: usize, seed: u64) -> Result<(LabeledDataset, Vec<Matrix>)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Config("planted dataset needs at least one row".into()));
    }
    let (d, k) = (spec.dim, spec.signal_dim);

    let mut used = Matrix::zeros(d, 0);
    let mut bases = Vec::with_capacity(spec.concepts.len());
    let mut copies = Vec::with_capacity(spec.concepts.len());
    let mut prev: Option<Matrix> = None;
    for c in &spec.concepts {
        let mut rng = stream_rng(c.basis_seed, BASIS_STREAM);
        let g = gaussian(d, k, &mut rng);
        let basis = match (spec.overlap, &prev) {
            (Overlap::Random, _) => orthonormalize(g, &Matrix::zeros(d, 0)),
            (Overlap::Orthogonal, _) | (Overlap::Shared { .. }, None) => orthonormalize(g, &used),
            (Overlap::Shared { dims }, Some(p)) => {
                let shared = p.columns(k - dims, dims).into_owned();
                let fresh = orthonormalize(g.columns(0, k - dims).into_owned(), &used);
                hstack(&shared, &fresh)
            }
        };
        used = hstack(&used, &basis);
        let copy = c.redundant_copy.as_ref().map(|_| {
            let mut rng = stream_rng(c.basis_seed, COPY_STREAM);
            let b = orthonormalize(gaussian(d, k, &mut rng), &used);
            used = hstack(&used, &b);
            b
        });
        prev = Some(basis.clone());
        bases.push(basis);
        copies.push(copy);
    }

    // Class means embedded in the ambient space, centred under the prior.
    let mut means = Vec::with_capacity(spec.concepts.len());
    let mut priors = Vec::with_capacity(spec.concepts.len());
    for c in &spec.concepts {
        let mut rng = stream_rng(c.basis_seed, MEANS_STREAM);
        let mut m = gaussian(k, c.num_classes, &mut rng) * c.mean_scale;
        let prior = class_prior(c);
        let centre = &m * nalgebra::DVector::from_vec(prior.clone());
        for mut col in m.column_iter_mut() {
            col -= &centre;
        }
        means.push(m);
        priors.push(prior);
    }

    let noise = spec.concepts.iter().map(|c| c.noise_scale * c.noise_scale).sum::<f64>().sqrt();
    let samplers = priors
        .iter()
        .map(|p| WeightedIndex::new(p).map_err(|e| Error::Config(e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let mut rng = stream_rng(seed, ROWS_STREAM);
    let mut x = Matrix::zeros(n, d);
    let mut labels: Vec<Vec<u32>> = vec![Vec::with_capacity(n); spec.concepts.len()];
    let mut row = nalgebra::DVector::<f64>::zeros(d);
    for i in 0..n {
        row.fill(0.0);
        for (ci, c) in spec.concepts.iter().enumerate() {
            let y = samplers[ci].sample(&mut rng);
            labels[ci].push(y as u32);
            let m = means[ci].column(y);
            row.gemv(1.0, &bases[ci], &m, 1.0);
            if let (Some(copy), Some(b)) = (&c.redundant_copy, &copies[ci]) {
                let jitter = nalgebra::DVector::<f64>::from_fn(k, |_, _| {
                    copy.noise_scale * rng.sample::<f64, _>(StandardNormal)
                });
                row.gemv(1.0, b, &(m + jitter), 1.0);
            }
        }
        if noise > 0.0 {
            for v in row.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                *v += noise * e;
            }
        }
        x.row_mut(i).copy_from(&row.transpose());
    }

    let concepts = spec
        .concepts
        .iter()
        .zip(labels)
        .map(|(c, l)| Concept::with_numbered_classes(c.name.clone(), l, c.num_classes))
        .collect::<Result<Vec<_>>>()?;
    let provenance = serde_json::json!({ "generator": "planted", "seed": seed, "n": n, "spec": spec }).to_string();
    let ds = LabeledDataset::new(x, concepts, provenance)?;
    let truth = bases
        .into_iter()
        .zip(copies)
        .map(|(b, c)| match c {
            Some(c) => hstack(&b, &c),
            None => b,
        })
        .collect();
    Ok((ds, truth))
}
