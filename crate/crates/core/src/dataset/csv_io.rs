use std::collections::BTreeSet;
use std::io::{Read, Write};

use super::{Concept, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Column selection for CSV import.
#[derive(Debug, Clone, Default)]
pub struct CsvSchema {
    /// Feature columns; when empty, every non-label column is a feature.
    pub features: Vec<String>,
    pub labels: Vec<String>,
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("missing column `{name}`")))
}

/// Classes are the integer values when every entry is a non-negative
/// integer, otherwise the sorted distinct strings.
fn encode_labels(name: &str, raw: Vec<String>) -> Result<Concept> {
    let ints: Option<Vec<u32>> = raw.iter().map(|s| s.trim().parse::<u32>().ok()).collect();
    if let Some(ints) = ints {
        let max = ints.iter().copied().max().unwrap_or(0) as usize;
        return Concept::with_numbered_classes(name, ints, max + 1);
    }
    let classes: Vec<String> = raw.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let labels = raw
        .iter()
        .map(|s| classes.binary_search(s).unwrap() as u32)
        .collect();
    Concept::new(name, labels, classes)
}

pub fn import_csv<R: Read>(reader: R, schema: &CsvSchema, provenance: &str) -> Result<LabeledDataset> {
    if schema.labels.is_empty() {
        return Err(Error::Config("at least one label column is required".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx: Vec<usize> = schema.labels.iter().map(|n| column_index(&headers, n)).collect::<Result<_>>()?;
    let feature_idx: Vec<usize> = if schema.features.is_empty() {
        (0..headers.len()).filter(|i| !label_idx.contains(i)).collect()
    } else {
        schema.features.iter().map(|n| column_index(&headers, n)).collect::<Result<_>>()?
    };
    if feature_idx.is_empty() {
        return Err(Error::Config("no feature columns selected".into()));
    }

    let mut values = Vec::new();
    let mut raw_labels: Vec<Vec<String>> = vec![Vec::new(); label_idx.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for &j in &feature_idx {
            let cell = rec.get(j).unwrap_or("");
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Config(format!("row {row}, column `{}`: `{cell}` is not a number", &headers[j]))
            })?;
            values.push(v);
        }
        for (k, &j) in label_idx.iter().enumerate() {
            raw_labels[k].push(rec.get(j).unwrap_or("").to_string());
        }
    }
    let n = raw_labels[0].len();
    if n == 0 {
        return Err(Error::Config("CSV has no data rows".into()));
    }
    let features = Matrix::from_row_slice(n, feature_idx.len(), &values);
    let concepts = schema
        .labels
        .iter()
        .zip(raw_labels)
        .map(|(name, raw)| encode_labels(name, raw))
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(features, concepts, provenance)
}

/// Writes features as `f0..f{D-1}` followed by one column per concept
/// holding class names.
pub fn export_csv<W: Write>(ds: &LabeledDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..ds.d()).map(|j| format!("f{j}")).collect();
    header.extend(ds.concepts().iter().map(|c| c.name().to_string()));
    w.write_record(&header)?;
    let x = ds.features();
    for i in 0..ds.n() {
        let mut rec: Vec<String> = (0..ds.d()).map(|j| format_value(x[(i, j)])).collect();
        rec.extend(
            ds.concepts()
                .iter()
                .map(|c| c.class_names()[c.labels()[i] as usize].clone()),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

// Container values are widened f32; print those in their short f32 form.
fn format_value(v: f64) -> String {
    let narrow = v as f32;
    if f64::from(narrow) == v {
        format!("{narrow}")
    } else {
        format!("{v}")
    }
}
