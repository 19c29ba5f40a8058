//! Labelled representation datasets, the `CSLD` container, CSV import,
//! three-way splitting and synthetic planted-subspace generation.

mod container;
mod csv_io;
mod planted;
mod split;

pub use container::{load, read_from, save, to_bytes, write_to, MAGIC, VERSION};
pub use csv_io::{export_csv, import_csv, CsvSchema};
pub use planted::{generate_planted, Overlap, PlantedConcept, PlantedSpec, RedundantCopy};
pub use split::{split, split_indices, SplitIndices, SplitMode, SplitSpec};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, Matrix};

/// One discrete labelling of the rows of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    name: String,
    labels: Vec<u32>,
    class_names: Vec<String>,
}

impl Concept {
    pub fn new(name: impl Into<String>, labels: Vec<u32>, class_names: Vec<String>) -> Result<Self> {
        let name = name.into();
        if class_names.is_empty() {
            return Err(Error::InvalidInput(format!("concept `{name}` has no classes")));
        }
        let c = class_names.len() as u32;
        if let Some((i, l)) = labels.iter().enumerate().find(|(_, &l)| l >= c) {
            return Err(Error::InvalidInput(format!(
                "concept `{name}`: label {l} at row {i} is out of range for {c} classes"
            )));
        }
        Ok(Concept { name, labels, class_names })
    }

    /// Concept with classes named `"0"`, `"1"`, ...
    pub fn with_numbered_classes(name: impl Into<String>, labels: Vec<u32>, num_classes: usize) -> Result<Self> {
        Self::new(name, labels, (0..num_classes).map(|c| c.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Row count per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Sorted list of classes that occur at least once.
    pub fn present_classes(&self) -> Vec<u32> {
        self.class_counts()
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(c, _)| c as u32)
            .collect()
    }

    fn select(&self, rows: &[usize]) -> Concept {
        Concept {
            name: self.name.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            class_names: self.class_names.clone(),
        }
    }
}

/// An N×D feature matrix with one or more named concept labellings.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    concepts: Vec<Concept>,
    provenance: String,
}

impl LabeledDataset {
    pub fn new(features: Matrix, concepts: Vec<Concept>, provenance: impl Into<String>) -> Result<Self> {
        let (n, d) = features.shape();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!("dataset must be non-empty, got {n}x{d}")));
        }
        ensure_finite(&features, "features")?;
        for (i, c) in concepts.iter().enumerate() {
            if c.labels.len() != n {
                return Err(Error::InvalidInput(format!(
                    "concept `{}` has {} labels for {n} rows",
                    c.name,
                    c.labels.len()
                )));
            }
            if concepts[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::InvalidInput(format!("duplicate concept `{}`", c.name)));
            }
        }
        Ok(LabeledDataset { features, concepts, provenance: provenance.into() })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, name: &str) -> Result<&Concept> {
        self.concepts
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownConcept(name.to_string()))
    }

    pub fn labels(&self, name: &str) -> Result<&[u32]> {
        self.concept(name).map(Concept::labels)
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn set_provenance(&mut self, provenance: impl Into<String>) {
        self.provenance = provenance.into();
    }

    /// Rows `rows` (in the given order) as a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("subset would be empty".into()));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::InvalidInput(format!("row {r} out of range for {} rows", self.n())));
        }
        Ok(LabeledDataset {
            features: self.features.select_rows(rows),
            concepts: self.concepts.iter().map(|c| c.select(rows)).collect(),
            provenance: self.provenance.clone(),
        })
    }
}

/// N×C indicator matrix with a single 1 per row.
pub fn one_hot(labels: &[u32], num_classes: usize) -> Result<Matrix> {
    let mut m = Matrix::zeros(labels.len(), num_classes);
    for (i, &l) in labels.iter().enumerate() {
        if l as usize >= num_classes {
            return Err(Error::InvalidInput(format!(
                "label {l} at row {i} is out of range for {num_classes} classes"
            )));
        }
        m[(i, l as usize)] = 1.0;
    }
    Ok(m)
}
