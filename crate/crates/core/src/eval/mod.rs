//! Rank-k / CMC and mAP under the Market-1501 matching protocol.
//!
//! For each query the gallery is sorted by ascending distance (ties broken by
//! gallery index). Gallery entries that share both identity and camera with
//! the query are removed, as are junk entries. A query whose filtered list
//! contains no entry of its identity is skipped and does not count towards
//! either metric.

mod io;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_embeddings, read_labels, read_vectors, write_labels, write_vectors};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dimension mismatch: query vectors have D={query}, gallery vectors have D={gallery}")]
    DimensionMismatch { query: usize, gallery: usize },
    #[error("cosine distance undefined for zero vector at row {row} of the {set} set")]
    ZeroVector { set: &'static str, row: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no query has a valid gallery match")]
    NoValidQuery,
    #[error("rank must be at least 1, got {0}")]
    InvalidRank(usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad format in {path}: {message}")]
    Format { path: String, message: String },
    #[error("{vectors} vectors but {labels} label rows")]
    CountMismatch { vectors: usize, labels: usize },
}

/// Identity, camera and junk flag of one query or gallery item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleMeta {
    pub pid: i64,
    pub camid: u32,
    pub junk: bool,
}

impl SampleMeta {
    pub fn new(pid: i64, camid: u32) -> Self {
        SampleMeta {
            pid,
            camid,
            junk: false,
        }
    }

    pub fn junk(pid: i64, camid: u32) -> Self {
        SampleMeta {
            pid,
            camid,
            junk: true,
        }
    }
}

/// `N` feature vectors of dimension `D` with per-row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    vectors: Vec<f32>,
    meta: Vec<SampleMeta>,
    names: Vec<String>,
}

impl EmbeddingSet {
    /// Checks `N >= 1`, `D >= 1`, matching lengths and finite values.
    pub fn new(
        dim: usize,
        vectors: Vec<f32>,
        meta: Vec<SampleMeta>,
        names: Vec<String>,
    ) -> Result<Self, EvalError> {
        if dim == 0 || meta.is_empty() {
            return Err(EvalError::ShapeMismatch(format!(
                "need N >= 1 and D >= 1, got N={} D={dim}",
                meta.len()
            )));
        }
        if vectors.len() != dim * meta.len() {
            return Err(EvalError::CountMismatch {
                vectors: vectors.len() / dim,
                labels: meta.len(),
            });
        }
        if names.len() != meta.len() {
            return Err(EvalError::ShapeMismatch(format!(
                "{} names for {} rows",
                names.len(),
                meta.len()
            )));
        }
        if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::ShapeMismatch(format!(
                "non-finite value at row {} column {}",
                i / dim,
                i % dim
            )));
        }
        Ok(EmbeddingSet {
            dim,
            vectors,
            meta,
            names,
        })
    }

    /// Unnamed set; rows are named by index.
    pub fn from_rows(rows: &[Vec<f32>], meta: Vec<SampleMeta>) -> Result<Self, EvalError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(EvalError::ShapeMismatch("ragged rows".into()));
        }
        let names = (0..rows.len()).map(|i| i.to_string()).collect();
        EmbeddingSet::new(dim, rows.concat(), meta, names)
    }

    pub fn len(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn meta(&self) -> &[SampleMeta] {
        &self.meta
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> EmbeddingSet {
        EmbeddingSet {
            vectors: self.vectors.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(format!(
                "unknown metric {other:?} (expected euclidean or cosine)"
            )),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        })
    }
}

/// Dense row-major `rows`x`cols` matrix of distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, EvalError> {
        if data.len() != rows * cols {
            return Err(EvalError::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DistanceMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DistanceMatrix {
        DistanceMatrix {
            data: self.data.iter().map(|&d| f(d)).collect(),
            ..self.clone()
        }
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt()
}

/// Query-by-gallery distances. Euclidean is the L2 norm of the difference;
/// cosine is `1 - u.v / (|u| |v|)`. Smaller is more similar for both.
pub fn pairwise_distances(
    q: &EmbeddingSet,
    g: &EmbeddingSet,
    metric: Metric,
) -> Result<DistanceMatrix, EvalError> {
    if q.dim != g.dim {
        return Err(EvalError::DimensionMismatch {
            query: q.dim,
            gallery: g.dim,
        });
    }
    let norms = |set: &EmbeddingSet, name: &'static str| -> Result<Vec<f64>, EvalError> {
        (0..set.len())
            .map(|i| {
                let n = norm(set.row(i));
                if metric == Metric::Cosine && n == 0.0 {
                    Err(EvalError::ZeroVector { set: name, row: i })
                } else {
                    Ok(n)
                }
            })
            .collect()
    };
    let q_norms = norms(q, "query")?;
    let g_norms = norms(g, "gallery")?;

    let data: Vec<f64> = (0..q.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = q.row(i);
            let qn = q_norms[i];
            let g_norms = &g_norms;
            (0..g.len()).map(move |j| {
                let v = g.row(j);
                match metric {
                    Metric::Euclidean => u
                        .iter()
                        .zip(v)
                        .map(|(&a, &b)| {
                            let d = f64::from(a) - f64::from(b);
                            d * d
                        })
                        .sum::<f64>()
                        .sqrt(),
                    Metric::Cosine => {
                        let dot: f64 = u
                            .iter()
                            .zip(v)
                            .map(|(&a, &b)| f64::from(a) * f64::from(b))
                            .sum();
                        1.0 - dot / (qn * g_norms[j])
                    }
                }
            })
        })
        .collect();
    DistanceMatrix::from_vec(q.len(), g.len(), data)
}

/// CMC curve and mAP.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// `cmc[k-1]` is the fraction of valid queries matched within the top `k`.
    pub cmc: Vec<f64>,
    pub map: f64,
    /// `None` for queries without a valid gallery match.
    pub per_query_ap: Vec<Option<f64>>,
    pub valid_queries: usize,
}

/// JSON report: `{"cmc": [...], "map": x, "ranks": [...]}` where `cmc[i]`
/// is the score at `ranks[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cmc: Vec<f64>,
    pub map: f64,
    pub ranks: Vec<usize>,
}

impl EvalResult {
    /// Rank-`k` accuracy (1-based).
    pub fn rank(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.cmc.get(i).copied())
    }

    pub fn report(&self, ranks: &[usize]) -> Result<EvalReport, EvalError> {
        let cmc = ranks
            .iter()
            .map(|&k| {
                if k == 0 {
                    Err(EvalError::InvalidRank(k))
                } else {
                    self.rank(k).ok_or_else(|| {
                        EvalError::ShapeMismatch(format!(
                            "rank {k} exceeds the evaluated maximum {}",
                            self.cmc.len()
                        ))
                    })
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(EvalReport {
            cmc,
            map: self.map,
            ranks: ranks.to_vec(),
        })
    }
}

/// Per-query outcome: 0-based position of the first match in the filtered
/// list, and average precision.
fn score_query(dist: &[f64], q: SampleMeta, gallery: &[SampleMeta]) -> Option<(usize, f64)> {
    let mut order: Vec<usize> = (0..gallery.len()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));

    let mut first = None;
    let mut hits = 0usize;
    let mut precision_sum = 0.0;
    let filtered = order.into_iter().filter(|&j| {
        let g = gallery[j];
        !g.junk && !(g.pid == q.pid && g.camid == q.camid)
    });
    for (pos, j) in filtered.enumerate() {
        if gallery[j].pid == q.pid {
            hits += 1;
            precision_sum += hits as f64 / (pos + 1) as f64;
            first.get_or_insert(pos);
        }
    }
    first.map(|f| (f, precision_sum / hits as f64))
}

/// Scores every query against the gallery. `max_rank` sets the CMC length.
pub fn evaluate(
    dist: &DistanceMatrix,
    q_meta: &[SampleMeta],
    g_meta: &[SampleMeta],
    max_rank: usize,
) -> Result<EvalResult, EvalError> {
    if dist.rows != q_meta.len() || dist.cols != g_meta.len() {
        return Err(EvalError::ShapeMismatch(format!(
            "distance matrix is {}x{} but there are {} queries and {} gallery items",
            dist.rows,
            dist.cols,
            q_meta.len(),
            g_meta.len()
        )));
    }
    if max_rank == 0 {
        return Err(EvalError::InvalidRank(0));
    }

    let outcomes: Vec<Option<(usize, f64)>> = (0..dist.rows)
        .into_par_iter()
        .map(|i| score_query(dist.row(i), q_meta[i], g_meta))
        .collect();

    let valid = outcomes.iter().flatten().count();
    if valid == 0 {
        return Err(EvalError::NoValidQuery);
    }
    let mut hits_at = vec![0usize; max_rank];
    for &(first, _) in outcomes.iter().flatten() {
        if first < max_rank {
            hits_at[first] += 1;
        }
    }
    let mut cumulative = 0;
    let cmc = hits_at
        .iter()
        .map(|&h| {
            cumulative += h;
            cumulative as f64 / valid as f64
        })
        .collect();
    let per_query_ap: Vec<Option<f64>> = outcomes.iter().map(|o| o.map(|(_, ap)| ap)).collect();
    let map = per_query_ap.iter().flatten().sum::<f64>() / valid as f64;

    Ok(EvalResult {
        cmc,
        map,
        per_query_ap,
        valid_queries: valid,
    })
}
