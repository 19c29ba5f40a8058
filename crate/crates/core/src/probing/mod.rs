//! Multinomial logistic probes, majority baselines and feature projection.

mod lbfgs;

pub use lbfgs::StopReason;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ConceptSubspace;
use crate::linalg::{Matrix, Projector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 penalty `λ` on the weights (the bias is not penalised).
    pub ridge: f64,
    pub max_iter: usize,
    /// Stop once `‖∇‖_max ≤ grad_tol`.
    pub grad_tol: f64,
    /// Recorded for provenance; training itself is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { ridge: 1e-4, max_iter: 1000, grad_tol: 1e-6, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) || !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Error::Config(format!(
                "train config needs grad_tol > 0 and ridge >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

/// A trained linear classifier `argmax_c (W·x + b)_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    weights: Matrix,
    bias: Vec<f64>,
    train_cfg: TrainConfig,
    achieved: FitSummary,
}

impl Probe {
    /// C×D weight matrix.
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn train_cfg(&self) -> &TrainConfig {
        &self.train_cfg
    }

    pub fn achieved(&self) -> &FitSummary {
        &self.achieved
    }

    fn check_width(&self, x: &Matrix) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::InvalidInput(format!(
                "probe expects {} features, got {}",
                self.input_dim(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Class scores, N×C.
    pub fn scores(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width(x)?;
        let mut z = x * self.weights.transpose();
        for mut row in z.row_iter_mut() {
            for (v, b) in row.iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(z)
    }

    /// Argmax class per row; ties go to the lowest class index.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<u32>> {
        let z = self.scores(x)?;
        Ok(z.row_iter()
            .map(|row| {
                let mut best = 0;
                for c in 1..row.len() {
                    if row[c] > row[best] {
                        best = c;
                    }
                }
                best as u32
            })
            .collect())
    }
}

/// Mean cross-entropy plus `(λ/2)‖W‖²` over parameters packed as
/// `[W row-major (C×D), b (C)]`.
pub struct SoftmaxObjective<'a> {
    x: &'a Matrix,
    labels: &'a [u32],
    num_classes: usize,
    ridge: f64,
}

impl<'a> SoftmaxObjective<'a> {
    pub fn new(x: &'a Matrix, labels: &'a [u32], num_classes: usize, ridge: f64) -> Self {
        SoftmaxObjective { x, labels, num_classes, ridge }
    }

    pub fn num_params(&self) -> usize {
        self.num_classes * (self.x.ncols() + 1)
    }

    fn unpack(&self, theta: &DVector<f64>) -> (Matrix, Vec<f64>) {
        let (c, d) = (self.num_classes, self.x.ncols());
        let w = Matrix::from_row_slice(c, d, &theta.as_slice()[..c * d]);
        (w, theta.as_slice()[c * d..].to_vec())
    }

    pub fn value_and_gradient(&self, theta: &DVector<f64>) -> (f64, DVector<f64>) {
        let (c, d) = (self.num_classes, self.x.ncols());
        let n = self.x.nrows() as f64;
        let (w, b) = self.unpack(theta);
        let mut z = self.x * w.transpose();
        let mut loss = 0.0;
        for (i, mut row) in z.row_iter_mut().enumerate() {
            let mut max = f64::NEG_INFINITY;
            for (v, bc) in row.iter_mut().zip(&b) {
                *v += bc;
                max = max.max(*v);
            }
            let y = self.labels[i] as usize;
            let z_y = row[y];
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            loss += max + sum.ln() - z_y;
            // row now holds softmax - onehot, the per-row logit gradient
            for v in row.iter_mut() {
                *v /= sum;
            }
            row[y] -= 1.0;
        }
        loss /= n;
        loss += 0.5 * self.ridge * w.norm_squared();

        let mut gw = z.tr_mul(self.x) / n;
        gw += &w * self.ridge;
        let mut grad = DVector::zeros(c * (d + 1));
        for k in 0..c {
            for j in 0..d {
                grad[k * d + j] = gw[(k, j)];
            }
            grad[c * d + k] = z.column(k).sum() / n;
        }
        (loss, grad)
    }
}

/// Fit a multinomial logistic probe on `x` (N×D) for labels in `0..num_classes`.
///
/// Classes absent from `labels` are allowed; their scores are driven down by
/// the bias.
pub fn train_probe(x: &Matrix, labels: &[u32], num_classes: usize, cfg: &TrainConfig) -> Result<Probe> {
    cfg.validate()?;
    if labels.len() != x.nrows() {
        return Err(Error::InvalidInput(format!("{} rows but {} labels", x.nrows(), labels.len())));
    }
    if x.nrows() == 0 || num_classes == 0 {
        return Err(Error::InvalidInput("probe needs at least one row and one class".into()));
    }
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= num_classes) {
        return Err(Error::InvalidInput(format!("label {l} out of range for {num_classes} classes")));
    }
    crate::linalg::ensure_finite(x, "probe features")?;

    let obj = SoftmaxObjective::new(x, labels, num_classes, cfg.ridge);
    let out = lbfgs::minimize(
        |t| obj.value_and_gradient(t),
        DVector::zeros(obj.num_params()),
        cfg.max_iter,
        cfg.grad_tol,
    )
    .map_err(|last| Error::Fit {
        message: format!("non-finite loss during probe training (last finite loss {last})"),
        grad_norm: f64::NAN,
    })?;
    let (weights, bias) = obj.unpack(&out.x);
    Ok(Probe {
        weights,
        bias,
        train_cfg: *cfg,
        achieved: FitSummary { loss: out.value, grad_norm: out.grad_max, iterations: out.iterations, stop: out.stop },
    })
}

/// Fraction of rows whose predicted class equals the label.
pub fn accuracy(probe: &Probe, x: &Matrix, labels: &[u32]) -> Result<f64> {
    if x.nrows() == 0 {
        return Err(Error::InvalidInput("accuracy on an empty evaluation set".into()));
    }
    if labels.len() != x.nrows() {
        return Err(Error::InvalidInput(format!("{} rows but {} labels", x.nrows(), labels.len())));
    }
    let pred = probe.predict(x)?;
    let hits = pred.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Most common label; the smallest one on ties.
pub fn majority_class(labels: &[u32]) -> Result<u32> {
    if labels.is_empty() {
        return Err(Error::InvalidInput("majority class of no labels".into()));
    }
    let mut counts = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    Ok(counts.into_iter().find(|&(_, c)| c == best).map(|(l, _)| l).unwrap_or(0))
}

/// Frequency of the most common label.
pub fn majority_baseline(labels: &[u32]) -> Result<f64> {
    majority_accuracy(labels, labels)
}

/// Accuracy on `test` of always predicting the majority class of `train`.
///
/// This is what a probe without usable features achieves, so it is the
/// bound reached by a rank-0 subspace or an empty complement.
pub fn majority_accuracy(train: &[u32], test: &[u32]) -> Result<f64> {
    let class = majority_class(train)?;
    if test.is_empty() {
        return Err(Error::InvalidInput("majority accuracy on no labels".into()));
    }
    Ok(test.iter().filter(|&&l| l == class).count() as f64 / test.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Onto,
    Complement,
}

/// `X·Pᵀ` or `X·(I−P)ᵀ`, staying in the ambient dimension.
pub fn project(p: &Projector, x: &Matrix, side: Side) -> Result<Matrix> {
    if x.ncols() != p.dim() {
        return Err(Error::InvalidInput(format!(
            "features have {} columns, projector acts on {}",
            x.ncols(),
            p.dim()
        )));
    }
    let m = match side {
        Side::Onto => p.onto(),
        Side::Complement => p.complement(),
    };
    Ok(x * m.transpose())
}

pub fn project_features(s: &ConceptSubspace, x: &Matrix, side: Side) -> Result<Matrix> {
    project(s.projector(), x, side)
}
