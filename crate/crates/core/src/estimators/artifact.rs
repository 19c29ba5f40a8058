//! `.csub` subspace artifacts.
//!
//! ```text
//! "CSUB" | version: u16 | header_len: u32 | header: JSON | P: D*D f64, row-major
//! ```
//!
//! The header carries `estimator`, `concept`, `dim`, `rank`, `oblique`,
//! `seed`, `provenance`, plus `requested_dim` and `fit_stats`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ConceptSubspace, EstimatorKind};
use crate::error::{Error, Result};
use crate::linalg::{projector_from_matrix, Matrix};

pub const SUBSPACE_MAGIC: &[u8; 4] = b"CSUB";
const VERSION: u16 = 1;
const PREAMBLE_LEN: usize = 10;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    estimator: EstimatorKind,
    concept: String,
    dim: usize,
    rank: usize,
    oblique: bool,
    seed: Option<u64>,
    provenance: String,
    #[serde(default)]
    requested_dim: Option<usize>,
    #[serde(default)]
    fit_stats: BTreeMap<String, Value>,
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format { offset: offset as u64, message: message.into() }
}

pub fn subspace_to_bytes(s: &ConceptSubspace, provenance: &str) -> Result<Vec<u8>> {
    let header = Header {
        estimator: s.estimator,
        concept: s.concept.clone(),
        dim: s.dim(),
        rank: s.rank(),
        oblique: s.projector.is_oblique(),
        seed: s.seed,
        provenance: provenance.to_string(),
        requested_dim: s.requested_dim,
        fit_stats: s.fit_stats.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    let d = s.dim();
    let mut out = Vec::with_capacity(PREAMBLE_LEN + json.len() + 8 * d * d);
    out.extend_from_slice(SUBSPACE_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    let p = s.projector.onto();
    for i in 0..d {
        for j in 0..d {
            out.extend_from_slice(&p[(i, j)].to_le_bytes());
        }
    }
    Ok(out)
}

/// Returns the subspace and the stored provenance string.
pub fn subspace_from_bytes(bytes: &[u8]) -> Result<(ConceptSubspace, String)> {
    if bytes.len() < PREAMBLE_LEN {
        return Err(format_err(bytes.len(), "truncated preamble"));
    }
    if &bytes[..4] != SUBSPACE_MAGIC {
        return Err(format_err(0, "bad magic, expected \"CSUB\""));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let end = PREAMBLE_LEN + len;
    if bytes.len() < end {
        return Err(format_err(bytes.len(), "truncated header"));
    }
    let header: Header = serde_json::from_slice(&bytes[PREAMBLE_LEN..end])
        .map_err(|e| format_err(PREAMBLE_LEN, format!("invalid header: {e}")))?;
    let d = header.dim;
    let expected = end + 8 * d * d;
    if bytes.len() != expected {
        return Err(format_err(bytes.len().min(expected), format!("payload should end at byte {expected}")));
    }
    let p = Matrix::from_row_iterator(
        d,
        d,
        bytes[end..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())),
    );
    let projector = projector_from_matrix(&p, header.oblique)?;
    if projector.rank() != header.rank {
        return Err(format_err(
            PREAMBLE_LEN,
            format!("header rank {} but stored matrix has rank {}", header.rank, projector.rank()),
        ));
    }
    let s = ConceptSubspace {
        projector,
        estimator: header.estimator,
        concept: header.concept,
        requested_dim: header.requested_dim,
        seed: header.seed,
        fit_stats: header.fit_stats,
    };
    Ok((s, header.provenance))
}

pub fn write_subspace(s: &ConceptSubspace, provenance: &str, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, subspace_to_bytes(s, provenance)?)?;
    Ok(())
}

pub fn read_subspace(path: impl AsRef<Path>) -> Result<(ConceptSubspace, String)> {
    subspace_from_bytes(&fs::read(path)?)
}
