//! Single-pass first and second moments of `(x, one-hot(y))`.

use nalgebra::DVector;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

const CHUNK_ROWS: usize = 512;

/// Streaming moments with `1/n` normalisation.
///
/// Rows are consumed in fixed-size chunks; each chunk's centred scatter is
/// merged pairwise (Chan et al.) in row order, so the result is independent
/// of how the data was loaded.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    n: usize,
    mean_x: Vector,
    scatter_xx: Matrix,
    class_counts: Vec<usize>,
    /// D×C, column c is the running mean of rows labelled c.
    class_means: Matrix,
}

impl MomentAccumulator {
    pub fn new(d: usize, num_classes: usize) -> Self {
        MomentAccumulator {
            n: 0,
            mean_x: Vector::zeros(d),
            scatter_xx: Matrix::zeros(d, d),
            class_counts: vec![0; num_classes],
            class_means: Matrix::zeros(d, num_classes),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean_x.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_counts.len()
    }

    /// Add a block of rows.
    pub fn push(&mut self, x: &Matrix, labels: &[u32]) -> Result<()> {
        if x.ncols() != self.dim() || labels.len() != x.nrows() {
            return Err(Error::InvalidInput(format!(
                "moment chunk shape {}x{} with {} labels, expected width {}",
                x.nrows(),
                x.ncols(),
                labels.len(),
                self.dim()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l as usize >= self.num_classes()) {
            return Err(Error::InvalidInput(format!("label {l} out of range")));
        }
        let mut start = 0;
        while start < x.nrows() {
            let len = CHUNK_ROWS.min(x.nrows() - start);
            let chunk = x.rows(start, len);
            self.merge(&Self::from_chunk(&chunk.into_owned(), &labels[start..start + len], self.num_classes()));
            start += len;
        }
        Ok(())
    }

    fn from_chunk(x: &Matrix, labels: &[u32], num_classes: usize) -> Self {
        let d = x.ncols();
        let mut mean = Vector::zeros(d);
        let mut class_counts = vec![0usize; num_classes];
        let mut class_means = Matrix::zeros(d, num_classes);
        for (i, row) in x.row_iter().enumerate() {
            let k = (i + 1) as f64;
            let c = labels[i] as usize;
            class_counts[c] += 1;
            let kc = class_counts[c] as f64;
            for j in 0..d {
                mean[j] += (row[j] - mean[j]) / k;
                class_means[(j, c)] += (row[j] - class_means[(j, c)]) / kc;
            }
        }
        let mut centred = x.clone();
        for mut row in centred.row_iter_mut() {
            row -= mean.transpose();
        }
        MomentAccumulator {
            n: x.nrows(),
            mean_x: mean,
            scatter_xx: centred.tr_mul(&centred),
            class_counts,
            class_means,
        }
    }

    /// Combine with moments of a disjoint set of rows.
    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = &other.mean_x - &self.mean_x;
        self.scatter_xx += &other.scatter_xx;
        self.scatter_xx.ger(na * nb / n, &delta, &delta, 1.0);
        self.mean_x.axpy(nb / n, &delta, 1.0);
        for c in 0..self.num_classes() {
            let (ca, cb) = (self.class_counts[c], other.class_counts[c]);
            if cb == 0 {
                continue;
            }
            let w = cb as f64 / (ca + cb) as f64;
            let dc = other.class_means.column(c) - self.class_means.column(c);
            let mut col = self.class_means.column_mut(c);
            col.axpy(w, &dc, 1.0);
            self.class_counts[c] = ca + cb;
        }
        self.n += other.n;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean_x(&self) -> &Vector {
        &self.mean_x
    }

    /// Class frequencies, i.e. the mean of the one-hot labels.
    pub fn mean_y(&self) -> Vector {
        DVector::from_iterator(
            self.num_classes(),
            self.class_counts.iter().map(|&c| c as f64 / self.n as f64),
        )
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn class_means(&self) -> &Matrix {
        &self.class_means
    }

    pub fn cov_xx(&self) -> Matrix {
        crate::linalg::symmetrize(&(&self.scatter_xx / self.n as f64))
    }

    /// D×C cross-covariance with the one-hot labels: column c is `π_c (μ_c − μ)`.
    pub fn cov_xy(&self) -> Matrix {
        let mut out = Matrix::zeros(self.dim(), self.num_classes());
        let pi = self.mean_y();
        for c in 0..self.num_classes() {
            if self.class_counts[c] > 0 {
                let col = (self.class_means.column(c) - &self.mean_x) * pi[c];
                out.column_mut(c).copy_from(&col);
            }
        }
        out
    }

    /// Between-class covariance `Σ_c π_c (μ_c − μ)(μ_c − μ)ᵀ`.
    pub fn cov_between(&self) -> Matrix {
        let mut out = Matrix::zeros(self.dim(), self.dim());
        let pi = self.mean_y();
        for c in 0..self.num_classes() {
            if self.class_counts[c] > 0 {
                let diff = self.class_means.column(c) - &self.mean_x;
                out.ger(pi[c], &diff, &diff, 1.0);
            }
        }
        crate::linalg::symmetrize(&out)
    }

    /// Pooled within-class covariance, `Σ_xx − Σ_b`.
    pub fn cov_within(&self) -> Matrix {
        self.cov_xx() - self.cov_between()
    }
}

/// Moments of `ds` features against the labels of `concept`.
pub fn accumulate_moments(ds: &LabeledDataset, concept: &str) -> Result<MomentAccumulator> {
    let c = ds.concept(concept)?;
    if ds.n() < 2 {
        return Err(Error::InvalidInput("moments need at least two rows".into()));
    }
    let mut acc = MomentAccumulator::new(ds.d(), c.num_classes());
    acc.push(ds.features(), c.labels())?;
    Ok(acc)
}
