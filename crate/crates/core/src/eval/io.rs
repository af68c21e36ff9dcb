//! Embedding files.
//!
//! Vectors: little-endian binary, magic `EMB1`, `u32 N`, `u32 D`, then
//! `N*D` `f32` values row-major.
//! Labels: CSV with header `name,pid,camid,junk`, one row per vector in file
//! order; `junk` is `0`/`1` (or `false`/`true`).

use std::path::Path;

use super::{EmbeddingSet, EvalError, SampleMeta};

const MAGIC: &[u8; 4] = b"EMB1";

fn format_err(path: &Path, message: impl Into<String>) -> EvalError {
    EvalError::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> EvalError {
    EvalError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a vector file, returning `(dim, values)`.
pub fn read_vectors(path: impl AsRef<Path>) -> Result<(usize, Vec<f32>), EvalError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 12 {
        return Err(format_err(path, "file shorter than the 12-byte header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(format_err(path, "missing EMB1 magic"));
    }
    let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (n, d) = (word(4), word(8));
    if n == 0 || d == 0 {
        return Err(format_err(
            path,
            format!("need N >= 1 and D >= 1, got N={n} D={d}"),
        ));
    }
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| format_err(path, "header size overflows"))?;
    let body = &bytes[12..];
    if body.len() != expected {
        return Err(format_err(
            path,
            format!(
                "expected {expected} bytes of data for {n}x{d}, found {}",
                body.len()
            ),
        ));
    }
    let values: Vec<f32> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(format_err(
            path,
            format!("non-finite value at row {} column {}", i / d, i % d),
        ));
    }
    Ok((d, values))
}

fn parse_junk(s: &str) -> Option<bool> {
    match s {
        "0" | "false" => Some(false),
        "1" | "true" => Some(true),
        _ => None,
    }
}

/// Reads a labels CSV into `(names, meta)`.
pub fn read_labels(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<SampleMeta>), EvalError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| format_err(path, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["name", "pid", "camid", "junk"] {
        return Err(format_err(path, "header must be name,pid,camid,junk"));
    }
    let mut names = Vec::new();
    let mut meta = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let line = row + 2;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let pid = field(1)
            .parse::<i64>()
            .map_err(|_| format_err(path, format!("line {line}: bad pid {:?}", field(1))))?;
        let camid = field(2)
            .parse::<u32>()
            .map_err(|_| format_err(path, format!("line {line}: bad camid {:?}", field(2))))?;
        let junk = parse_junk(field(3)).ok_or_else(|| {
            format_err(path, format!("line {line}: bad junk flag {:?}", field(3)))
        })?;
        names.push(field(0).to_string());
        meta.push(SampleMeta { pid, camid, junk });
    }
    Ok((names, meta))
}

/// Loads a vector file and its labels, checking that the counts agree.
pub fn load_embeddings(
    vectors_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<EmbeddingSet, EvalError> {
    let (dim, values) = read_vectors(vectors_path)?;
    let (names, meta) = read_labels(labels_path)?;
    let n = values.len() / dim;
    if n != meta.len() {
        return Err(EvalError::CountMismatch {
            vectors: n,
            labels: meta.len(),
        });
    }
    EmbeddingSet::new(dim, values, meta, names)
}

pub fn write_vectors(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(12 + set.vectors().len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(set.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(set.dim() as u32).to_le_bytes());
    for v in set.vectors() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| io_err(path, e))
}

pub fn write_labels(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let err = |e: csv::Error| format_err(path, e.to_string());
    w.write_record(["name", "pid", "camid", "junk"])
        .map_err(err)?;
    for (name, m) in set.names().iter().zip(set.meta()) {
        w.write_record([
            name.as_str(),
            &m.pid.to_string(),
            &m.camid.to_string(),
            if m.junk { "1" } else { "0" },
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
