//! Tab-separated lesion manifest.
//!
//! The first non-comment line is the header
//! `patient_id  lesion_id  label  c0  c1  c2  c3  c4  c5  mask`; every
//! following line describes one lesion. Blank lines and lines starting with
//! `#` are skipped. Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::volume::{Label, PHASE_COUNT};

pub const MANIFEST_COLUMNS: [&str; 10] = [
    "patient_id",
    "lesion_id",
    "label",
    "c0",
    "c1",
    "c2",
    "c3",
    "c4",
    "c5",
    "mask",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub patient_id: String,
    pub lesion_id: String,
    pub label: Label,
    pub phases: [PathBuf; PHASE_COUNT],
    pub mask: PathBuf,
    /// 1-based line in the manifest file (0 for records built in memory).
    pub line: usize,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(path, &text, base, true)
}

/// Parses manifest text; `check_files` verifies every referenced path exists.
pub fn parse_manifest(path: &Path, text: &str, base: &Path, check_files: bool) -> Result<Vec<ManifestRecord>> {
    let parse_err = |line: usize, message: String| Error::ParseError {
        path: path.into(),
        line,
        message,
    };
    let mut header_seen = false;
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim_end_matches('\r');
        if content.trim().is_empty() || content.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split('\t').map(str::trim).collect();
        if !header_seen {
            if fields != MANIFEST_COLUMNS {
                return Err(parse_err(
                    line,
                    format!("expected header {:?}, found {:?}", MANIFEST_COLUMNS.join("\\t"), content),
                ));
            }
            header_seen = true;
            continue;
        }
        if fields.len() != MANIFEST_COLUMNS.len() {
            return Err(parse_err(
                line,
                format!("expected {} tab-separated fields, found {}", MANIFEST_COLUMNS.len(), fields.len()),
            ));
        }
        if let Some(j) = fields.iter().position(|f| f.is_empty()) {
            return Err(parse_err(line, format!("empty {} field", MANIFEST_COLUMNS[j])));
        }
        let label = Label::parse(fields[2]).ok_or_else(|| Error::UnknownLabel {
            path: path.into(),
            line,
            label: fields[2].to_string(),
        })?;
        let key = (fields[0].to_string(), fields[1].to_string());
        if !seen.insert(key.clone()) {
            return Err(Error::DuplicateLesion {
                path: path.into(),
                line,
                patient_id: key.0,
                lesion_id: key.1,
            });
        }
        let resolve = |f: &str| {
            let p = Path::new(f);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let phases: [PathBuf; PHASE_COUNT] = std::array::from_fn(|k| resolve(fields[3 + k]));
        let mask = resolve(fields[9]);
        if check_files {
            if let Some(missing) = phases.iter().chain(std::iter::once(&mask)).find(|p| !p.is_file()) {
                return Err(Error::MissingFile {
                    path: path.into(),
                    line,
                    missing: missing.clone(),
                });
            }
        }
        records.push(ManifestRecord {
            patient_id: key.0,
            lesion_id: key.1,
            label,
            phases,
            mask,
            line,
        });
    }
    if !header_seen {
        return Err(parse_err(0, "missing header line".into()));
    }
    Ok(records)
}

/// Renders records, writing paths relative to `base` where possible.
pub fn render_manifest(records: &[ManifestRecord], base: &Path) -> String {
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).to_string_lossy().into_owned();
    let mut out = MANIFEST_COLUMNS.join("\t");
    out.push('\n');
    for r in records {
        let _ = write!(out, "{}\t{}\t{}", r.patient_id, r.lesion_id, r.label);
        for p in r.phases.iter().chain(std::iter::once(&r.mask)) {
            out.push('\t');
            out.push_str(&rel(p));
        }
        out.push('\n');
    }
    out
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[ManifestRecord]) -> Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    std::fs::write(path, render_manifest(records, base)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "patient_id\tlesion_id\tlabel\tc0\tc1\tc2\tc3\tc4\tc5\tmask\n";

    fn row(p: &str, l: &str, label: &str) -> String {
        format!("{p}\t{l}\t{label}\ta0\ta1\ta2\ta3\ta4\ta5\tm\n")
    }

    fn parse(text: &str) -> Result<Vec<ManifestRecord>> {
        parse_manifest(Path::new("m.tsv"), text, Path::new("/data"), false)
    }

    #[test]
    fn two_lesions() {
        let text = format!("# corpus\n{HEADER}{}\n{}", row("p1", "l1", "benign"), row("p1", "l2", "malignant"));
        let r = parse(&text).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].label, Label::Malignant);
        assert_eq!(r[0].phases[2], PathBuf::from("/data/a2"));
        assert_eq!(r[1].line, 5);
    }

    #[test]
    fn unknown_label_names_line() {
        let text = format!("{HEADER}{}{}", row("p1", "l1", "benign"), row("p2", "l1", "suspicious"));
        match parse(&text) {
            Err(Error::UnknownLabel { line, label, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(label, "suspicious");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_malformed_lines() {
        let text = format!("{HEADER}{}{}", row("p1", "l1", "benign"), row("p1", "l1", "malignant"));
        assert!(matches!(parse(&text), Err(Error::DuplicateLesion { line: 3, .. })));
        let text = format!("{HEADER}p1\tl1\tbenign\ta\n");
        assert!(matches!(parse(&text), Err(Error::ParseError { line: 2, .. })));
        assert!(matches!(parse("a\tb\n"), Err(Error::ParseError { line: 1, .. })));
        assert!(parse(HEADER).unwrap().is_empty());
    }

    #[test]
    fn missing_file_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["a0", "a1", "a2", "a3", "a4", "a5", "m"] {
            std::fs::write(dir.path().join(f), b"").unwrap();
        }
        let mpath = dir.path().join("manifest.tsv");
        std::fs::write(&mpath, format!("{HEADER}{}", row("p1", "l1", "benign"))).unwrap();
        let recs = load_manifest(&mpath).unwrap();
        let out = dir.path().join("copy.tsv");
        write_manifest(&out, &recs).unwrap();
        assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(&mpath).unwrap());
        std::fs::remove_file(dir.path().join("a3")).unwrap();
        match load_manifest(&mpath) {
            Err(Error::MissingFile { missing, .. }) => assert!(missing.ends_with("a3")),
            other => panic!("{other:?}"),
        }
    }
}
