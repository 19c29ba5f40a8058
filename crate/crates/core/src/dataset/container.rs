//! The `CSLD` binary container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "CSLD" | version: u16 | header_len: u32 | header: JSON (header_len bytes)
//! features: n*d f32, row-major
//! labels: for each concept in header order, n u32
//! ```
//!
//! The header is `{"n":..,"d":..,"concepts":[{"name":..,"num_classes":..,
//! "class_names":[..]}],"provenance":..}` serialised compactly in that key
//! order, which makes `save(load(f))` reproduce `f` byte for byte.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Concept, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAGIC: &[u8; 4] = b"CSLD";
pub const VERSION: u16 = 1;

const PREAMBLE_LEN: usize = 4 + 2 + 4;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    n: u64,
    d: u64,
    concepts: Vec<ConceptHeader>,
    provenance: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConceptHeader {
    name: String,
    num_classes: u64,
    class_names: Vec<String>,
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format { offset: offset as u64, message: message.into() }
}

pub fn to_bytes(ds: &LabeledDataset) -> Result<Vec<u8>> {
    let header = Header {
        n: ds.n() as u64,
        d: ds.d() as u64,
        concepts: ds
            .concepts()
            .iter()
            .map(|c| ConceptHeader {
                name: c.name().to_string(),
                num_classes: c.num_classes() as u64,
                class_names: c.class_names().to_vec(),
            })
            .collect(),
        provenance: ds.provenance().to_string(),
    };
    let json = serde_json::to_vec(&header)?;
    let header_len = u32::try_from(json.len())
        .map_err(|_| Error::InvalidInput("container header exceeds 4 GiB".into()))?;

    let (n, d) = (ds.n(), ds.d());
    let mut out = Vec::with_capacity(PREAMBLE_LEN + json.len() + 4 * n * (d + ds.concepts().len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&json);
    let x = ds.features();
    for i in 0..n {
        for j in 0..d {
            out.extend_from_slice(&(x[(i, j)] as f32).to_le_bytes());
        }
    }
    for c in ds.concepts() {
        for &l in c.labels() {
            out.extend_from_slice(&l.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<LabeledDataset> {
    if bytes.len() < PREAMBLE_LEN {
        return Err(format_err(bytes.len(), "truncated preamble"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(format_err(0, "bad magic, expected \"CSLD\""));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}, expected {VERSION}")));
    }
    let header_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let header_end = PREAMBLE_LEN
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| format_err(bytes.len(), "truncated header"))?;
    let header: Header = serde_json::from_slice(&bytes[PREAMBLE_LEN..header_end])
        .map_err(|e| format_err(PREAMBLE_LEN, format!("invalid header: {e}")))?;

    let n = usize::try_from(header.n).map_err(|_| format_err(PREAMBLE_LEN, "n too large"))?;
    let d = usize::try_from(header.d).map_err(|_| format_err(PREAMBLE_LEN, "d too large"))?;
    if n == 0 || d == 0 {
        return Err(format_err(PREAMBLE_LEN, format!("empty dataset ({n}x{d})")));
    }
    for c in &header.concepts {
        if c.class_names.len() as u64 != c.num_classes || c.num_classes == 0 {
            return Err(format_err(
                PREAMBLE_LEN,
                format!("concept `{}`: num_classes {} with {} class names", c.name, c.num_classes, c.class_names.len()),
            ));
        }
    }

    let feature_bytes = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| format_err(PREAMBLE_LEN, "dimensions overflow"))?;
    let label_bytes = n * 4 * header.concepts.len();
    let expected = header_end + feature_bytes + label_bytes;
    if bytes.len() < expected {
        return Err(format_err(bytes.len(), format!("truncated payload, expected {expected} bytes")));
    }
    if bytes.len() > expected {
        return Err(format_err(expected, "trailing bytes after payload"));
    }

    let mut features = Matrix::zeros(n, d);
    let mut pos = header_end;
    for i in 0..n {
        for j in 0..d {
            let v = f32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(format_err(pos, format!("non-finite feature at ({i}, {j})")));
            }
            features[(i, j)] = v as f64;
            pos += 4;
        }
    }
    let mut concepts = Vec::with_capacity(header.concepts.len());
    for c in header.concepts {
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let l = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
            if l as u64 >= c.num_classes {
                return Err(format_err(
                    pos,
                    format!("label {l} out of range for concept `{}` with {} classes", c.name, c.num_classes),
                ));
            }
            labels.push(l);
            pos += 4;
        }
        concepts.push(Concept::new(c.name, labels, c.class_names)?);
    }
    LabeledDataset::new(features, concepts, header.provenance)
        .map_err(|e| format_err(PREAMBLE_LEN, e.to_string()))
}

pub fn read_from<R: Read>(mut reader: R) -> Result<LabeledDataset> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

pub fn write_to<W: Write>(ds: &LabeledDataset, mut writer: W) -> Result<()> {
    writer.write_all(&to_bytes(ds)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    from_bytes(&fs::read(path)?)
}

pub fn save(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_bytes(ds)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn minimal() -> LabeledDataset {
        let c = Concept::new("y", vec![0], vec!["only".into()]).unwrap();
        LabeledDataset::new(dmatrix![1.5], vec![c], "unit").unwrap()
    }

    #[test]
    fn minimal_file_loads() {
        let bytes = to_bytes(&minimal()).unwrap();
        assert_eq!(&bytes[..4], b"CSLD");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        let ds = from_bytes(&bytes).unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.d(), 1);
        assert_eq!(ds.features()[(0, 0)], 1.5);
        assert_eq!(to_bytes(&ds).unwrap(), bytes);
    }

    #[test]
    fn header_is_compact_json_in_key_order() {
        let bytes = to_bytes(&minimal()).unwrap();
        let len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let header = std::str::from_utf8(&bytes[10..10 + len]).unwrap();
        assert_eq!(
            header,
            r#"{"n":1,"d":1,"concepts":[{"name":"y","num_classes":1,"class_names":["only"]}],"provenance":"unit"}"#
        );
    }

    #[test]
    fn rejects_corruption_with_offsets() {
        let bytes = to_bytes(&minimal()).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(from_bytes(&bad), Err(Error::Format { offset: 0, .. })));

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(from_bytes(&bad), Err(Error::Format { offset: 4, .. })));

        let short = &bytes[..bytes.len() - 2];
        assert!(matches!(from_bytes(short), Err(Error::Format { .. })));

        let mut bad = bytes.clone();
        let last = bad.len() - 4;
        bad[last..].copy_from_slice(&7u32.to_le_bytes());
        match from_bytes(&bad) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset as usize, last),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_byte_exact(
            n in 1usize..6,
            d in 1usize..5,
            seed in any::<u64>(),
            prov in "[a-z ]{0,12}",
        ) {
            use rand::Rng;
            let mut rng = crate::rng::stream_rng(seed, 0);
            let x = Matrix::from_fn(n, d, |_, _| rng.random::<f32>() as f64 * 8.0 - 4.0);
            let labels = (0..n).map(|_| rng.random_range(0..3u32)).collect();
            let c = Concept::with_numbered_classes("c", labels, 3).unwrap();
            let ds = LabeledDataset::new(x, vec![c], prov).unwrap();
            let bytes = to_bytes(&ds).unwrap();
            let back = from_bytes(&bytes).unwrap();
            prop_assert_eq!(&back, &ds);
            prop_assert_eq!(to_bytes(&back).unwrap(), bytes);
        }
    }
}
