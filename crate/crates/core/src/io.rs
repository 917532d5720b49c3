//! Feature, score and label files.
//!
//! Binary feature layout (all little-endian):
//!
//! | offset | size      | field                        |
//! |--------|-----------|------------------------------|
//! | 0      | 4         | magic `FEAT`                 |
//! | 4      | 4         | version, `u32` = 1           |
//! | 8      | 4         | rows `n`, `u32`              |
//! | 12     | 4         | dimension `d`, `u32`         |
//! | 16     | `4 n d`   | `f32` payload, row-major     |
//!
//! A path ending in `.csv` is read as one comma-separated row per line
//! instead, without a header.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{OtError, Result};
use crate::eval::Label;
use crate::measure::FeatureMatrix;
use crate::scoring::ScoredBatch;

pub const MAGIC: &[u8; 4] = b"FEAT";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

/// Parses a binary feature file already in memory.
pub fn decode_features(bytes: &[u8], normalize: bool) -> Result<FeatureMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(OtError::Format(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(OtError::Format(format!(
            "bad magic {:?}, expected \"FEAT\"",
            String::from_utf8_lossy(&bytes[0..4])
        )));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != VERSION {
        return Err(OtError::Format(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let (n, d) = (word(8) as usize, word(12) as usize);
    let expected = n
        .checked_mul(d)
        .and_then(|x| x.checked_mul(4))
        .ok_or_else(|| OtError::Format(format!("header {n}x{d} overflows")))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(OtError::Format(format!(
            "payload is {} bytes, header {n}x{d} requires {expected}",
            payload.len()
        )));
    }
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    into_matrix(data, n, d, normalize)
}

/// Serializes to the binary layout. Values are stored as `f32`.
pub fn encode_features(m: &FeatureMatrix) -> Result<Vec<u8>> {
    let as_u32 = |x: usize, what: &str| {
        u32::try_from(x).map_err(|_| OtError::Format(format!("{what} {x} exceeds u32")))
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * m.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&as_u32(m.n_rows(), "row count")?.to_le_bytes());
    out.extend_from_slice(&as_u32(m.dim(), "dimension")?.to_le_bytes());
    for &x in m.as_slice() {
        out.extend_from_slice(&(x as f32).to_le_bytes());
    }
    Ok(out)
}

/// Parses CSV feature rows.
pub fn parse_features_csv(text: &str, normalize: bool) -> Result<FeatureMatrix> {
    let mut data = Vec::new();
    let mut dim = None;
    let mut n = 0;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let start = data.len();
        for field in line.split(',') {
            let x: f64 = field.trim().parse().map_err(|_| {
                OtError::Format(format!("line {}: cannot parse '{}'", line_no + 1, field.trim()))
            })?;
            data.push(x);
        }
        let width = data.len() - start;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(OtError::Format(format!(
                    "line {}: {width} columns, expected {d}",
                    line_no + 1
                )))
            }
            _ => {}
        }
        n += 1;
    }
    let d = dim.ok_or_else(|| OtError::Data("CSV contains no rows".into()))?;
    into_matrix(data, n, d, normalize)
}

fn into_matrix(data: Vec<f64>, n: usize, d: usize, normalize: bool) -> Result<FeatureMatrix> {
    if normalize {
        FeatureMatrix::normalized(data, n, d)
    } else {
        FeatureMatrix::new(data, n, d)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a binary or (by `.csv` extension) text feature file.
pub fn read_features(path: impl AsRef<Path>, normalize: bool) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let with_path = |e: OtError| match e {
        OtError::Format(m) => OtError::Format(format!("{}: {m}", path.display())),
        OtError::Data(m) => OtError::Data(format!("{}: {m}", path.display())),
        other => other,
    };
    if is_csv(path) {
        let text = fs::read_to_string(path).map_err(|e| OtError::io(path, e))?;
        parse_features_csv(&text, normalize).map_err(with_path)
    } else {
        let bytes = fs::read(path).map_err(|e| OtError::io(path, e))?;
        decode_features(&bytes, normalize).map_err(with_path)
    }
}

pub fn write_features(path: impl AsRef<Path>, m: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_csv(path) {
        let mut s = String::new();
        for row in m.rows() {
            let fields: Vec<String> = row.iter().map(|x| (*x as f32).to_string()).collect();
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s.into_bytes()
    } else {
        encode_features(m)?
    };
    fs::write(path, bytes).map_err(|e| OtError::io(path, e))
}

/// One line of a score file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRow {
    pub index: usize,
    pub score: f64,
    pub converged: bool,
}

pub const SCORES_HEADER: &str = "index,score,converged";

/// Renders `index,score,converged` rows; scores keep six decimals.
pub fn format_scores(rows: &[ScoreRow]) -> String {
    let mut s = String::with_capacity(32 * (rows.len() + 1));
    s.push_str(SCORES_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{:.6},{}\n", r.index, r.score, r.converged));
    }
    s
}

pub fn write_score_rows(path: impl AsRef<Path>, rows: &[ScoreRow]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| OtError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(format_scores(rows).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| OtError::io(path, e))
}

/// Writes a single batch in input order.
pub fn write_scores(path: impl AsRef<Path>, batch: &ScoredBatch) -> Result<()> {
    let rows: Vec<ScoreRow> = batch
        .scores
        .iter()
        .enumerate()
        .map(|(index, &score)| ScoreRow {
            index,
            score,
            converged: batch.converged(),
        })
        .collect();
    write_score_rows(path, &rows)
}

pub fn parse_scores(text: &str) -> Result<Vec<ScoreRow>> {
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some(SCORES_HEADER) => {}
        other => {
            return Err(OtError::Format(format!(
                "expected header '{SCORES_HEADER}', found {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || OtError::Format(format!("line {}: malformed score row '{line}'", k + 2));
        let mut fields = line.split(',');
        let (Some(i), Some(s), Some(c), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad());
        };
        rows.push(ScoreRow {
            index: i.parse().map_err(|_| bad())?,
            score: s.parse().map_err(|_| bad())?,
            converged: c.parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| OtError::io(path, e))?;
    parse_scores(&text).map_err(|e| match e {
        OtError::Format(m) => OtError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// One `0` (ID) or `1` (OOD) per non-empty line.
pub fn parse_labels(text: &str) -> Result<Vec<Label>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| match l.trim() {
            "0" => Ok(Label::Id),
            "1" => Ok(Label::Ood),
            other => Err(OtError::Format(format!(
                "line {}: label must be 0 or 1, found '{other}'",
                k + 1
            ))),
        })
        .collect()
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<Label>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| OtError::io(path, e))?;
    parse_labels(&text).map_err(|e| match e {
        OtError::Format(m) => OtError::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[Label]) -> Result<()> {
    let path = path.as_ref();
    let text: String = labels
        .iter()
        .map(|l| if l.is_ood() { "1\n" } else { "0\n" })
        .collect();
    fs::write(path, text).map_err(|e| OtError::io(path, e))
}
