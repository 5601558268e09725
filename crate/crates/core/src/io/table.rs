//! Comma-separated feature tables and JSON documents.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every value bit for bit.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::volume::Label;

pub const ID_COLUMNS: [&str; 3] = ["patient_id", "lesion_id", "label"];

pub fn write_feature_table(path: impl AsRef<Path>, m: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e| Error::Csv {
        path: path.into(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let header = ID_COLUMNS.iter().copied().chain(m.names.iter().map(String::as_str));
    w.write_record(header).map_err(csv_err)?;
    let mut record = Vec::with_capacity(m.n_cols() + 3);
    for i in 0..m.n_rows() {
        record.clear();
        record.push(m.patient_ids[i].clone());
        record.push(m.lesion_ids[i].clone());
        record.push(m.labels[i].to_string());
        record.extend(m.row(i).iter().map(|v| v.to_string()));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a table; with `expected` the feature columns must match it exactly.
pub fn read_feature_table(path: impl AsRef<Path>, expected: Option<&[String]>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let csv_err = |e| Error::Csv {
        path: path.into(),
        source: e,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(csv_err)?;
    let mut records = r.records();
    let header = match records.next() {
        Some(h) => h.map_err(csv_err)?,
        None => {
            return Err(Error::HeaderMismatch {
                path: path.into(),
                reason: "file is empty".into(),
            })
        }
    };
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 3 || cols[..3] != ID_COLUMNS {
        return Err(Error::HeaderMismatch {
            path: path.into(),
            reason: format!("first columns must be {}", ID_COLUMNS.join(",")),
        });
    }
    let names: Vec<String> = cols[3..].iter().map(|s| s.to_string()).collect();
    if let Some(exp) = expected {
        if names != exp {
            let at = names.iter().zip(exp).position(|(a, b)| a != b).unwrap_or(names.len().min(exp.len()));
            return Err(Error::HeaderMismatch {
                path: path.into(),
                reason: format!(
                    "{} feature columns, expected {}; first difference at feature column {at}",
                    names.len(),
                    exp.len()
                ),
            });
        }
    }
    let mut m = FeatureMatrix::empty(names);
    let mut row = Vec::with_capacity(m.n_cols());
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != m.n_cols() + 3 {
            return Err(Error::ParseError {
                path: path.into(),
                line,
                message: format!("expected {} fields, found {}", m.n_cols() + 3, rec.len()),
            });
        }
        let label = Label::parse(&rec[2]).ok_or_else(|| Error::UnknownLabel {
            path: path.into(),
            line,
            label: rec[2].to_string(),
        })?;
        row.clear();
        for (j, f) in rec.iter().skip(3).enumerate() {
            let v: f64 = f.parse().map_err(|_| Error::ParseError {
                path: path.into(),
                line,
                message: format!("column {:?}: not a number: {f:?}", m.names[j]),
            })?;
            row.push(v);
        }
        m.push_row(&rec[0], &rec[1], label, &row)?;
    }
    Ok(m)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&text).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(seed: u64, rows: usize) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = vec!["dynamic_ftv".into(), "original_glcm_Contrast".into(), "x".into()];
        let mut m = FeatureMatrix::empty(names);
        for i in 0..rows {
            let row: Vec<f64> = (0..3)
                .map(|_| {
                    let bits: u64 = rng.random();
                    let v = f64::from_bits(bits);
                    if v.is_finite() { v } else { rng.random::<f64>() * 1e-310 }
                })
                .collect();
            let label = if i % 2 == 0 { Label::Benign } else { Label::Malignant };
            m.push_row(format!("p{i}"), "l,1", label, &row).unwrap();
        }
        m
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let m = random_matrix(1, 50);
        write_feature_table(&p, &m).unwrap();
        let r = read_feature_table(&p, Some(&m.names)).unwrap();
        assert_eq!(r.patient_ids, m.patient_ids);
        assert_eq!(r.lesion_ids, m.lesion_ids);
        assert_eq!(r.labels, m.labels);
        assert!(r.values.iter().zip(&m.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn header_checks() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let m = random_matrix(2, 0);
        write_feature_table(&p, &m).unwrap();
        let r = read_feature_table(&p, Some(&m.names)).unwrap();
        assert_eq!(r.n_rows(), 0);
        let reordered: Vec<String> = vec!["x".into(), "dynamic_ftv".into(), "original_glcm_Contrast".into()];
        assert!(matches!(read_feature_table(&p, Some(&reordered)), Err(Error::HeaderMismatch { .. })));
        std::fs::write(&p, "a,b,c\n").unwrap();
        assert!(matches!(read_feature_table(&p, None), Err(Error::HeaderMismatch { .. })));
        std::fs::write(&p, "patient_id,lesion_id,label,x\np,l,benign,zz\n").unwrap();
        assert!(matches!(read_feature_table(&p, None), Err(Error::ParseError { line: 2, .. })));
    }

    #[test]
    fn json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.json");
        let v = vec![0.1f64, 1.0 / 3.0, 2.0f64.sqrt(), 5e-324];
        write_json(&p, &v).unwrap();
        let r: Vec<f64> = read_json(&p).unwrap();
        assert!(r.iter().zip(&v).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
