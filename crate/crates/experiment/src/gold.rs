//! Exact answers and their on-disk cache.
//!
//! The cache is a pair of files: `<prefix>_gs.txt` holds `key=value` lines describing the
//! run, `<prefix>_gs.bin` holds, for every split, query type and query in order, a `u32`
//! entry count followed by `(id: u32, dist: f64, label: i32)` little-endian triples.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use simsearch_core::query::QueryKind;
use simsearch_core::{DataSet, IdType, LabelType, ObjectRecord, Space};

use crate::error::{Error, Result};

/// A search request type, as given by `--knn` or `--range`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QueryType {
    Knn(usize),
    Range(f64),
}

impl From<QueryType> for QueryKind {
    fn from(q: QueryType) -> Self {
        match q {
            QueryType::Knn(k) => QueryKind::Knn(k),
            QueryType::Range(r) => QueryKind::Range(r),
        }
    }
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryType::Knn(k) => write!(f, "K={k}"),
            QueryType::Range(r) => write!(f, "R={r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldEntry {
    pub id: IdType,
    pub dist: f64,
    pub label: LabelType,
}

/// Exact neighbours of one query, ascending by `(dist, id)`, possibly deeper than the answer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GoldList {
    pub entries: Vec<GoldEntry>,
}

impl GoldList {
    /// Number of leading entries that are true answers for `qt`.
    pub fn answer_count(&self, qt: QueryType, data_len: usize) -> usize {
        match qt {
            QueryType::Knn(k) => k.min(data_len).min(self.entries.len()),
            QueryType::Range(r) => self.entries.partition_point(|e| e.dist <= r),
        }
    }
}

/// Brute-force ranking of `data` against `query` (distances `d(data, query)`).
pub fn exact_ranking(space: &dyn Space, data: &DataSet, query: &ObjectRecord, keep: impl Fn(&[GoldEntry]) -> usize) -> GoldList {
    let mut all: Vec<GoldEntry> = data
        .iter()
        .map(|r| GoldEntry {
            id: r.id(),
            dist: space.distance(r.view(), query.view()),
            label: r.label(),
        })
        .collect();
    all.sort_unstable_by(|a, b| a.dist.total_cmp(&b.dist).then(a.id.cmp(&b.id)));
    let n = keep(&all).min(all.len());
    all.truncate(n);
    GoldList { entries: all }
}

/// Exact answers for every query: `k·coef` entries for k-NN and `|answer|·coef` for range search.
pub fn compute_gold(
    space: &dyn Space,
    data: &DataSet,
    queries: &[ObjectRecord],
    qt: QueryType,
    coef: usize,
    pool: &rayon::ThreadPool,
) -> Vec<GoldList> {
    let coef = coef.max(1);
    pool.install(|| {
        queries
            .par_iter()
            .map(|q| {
                exact_ranking(space, data, q, |sorted| match qt {
                    QueryType::Knn(k) => k.saturating_mul(coef),
                    QueryType::Range(r) => sorted.partition_point(|e| e.dist <= r).saturating_mul(coef),
                })
            })
            .collect()
    })
}

/// Gold data for one split: the query positions (bootstrap only) and one list set per query type.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitGold {
    pub query_ids: Vec<usize>,
    pub per_type: Vec<Vec<GoldList>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldCache {
    pub meta: BTreeMap<String, String>,
    pub splits: Vec<SplitGold>,
}

fn cache_paths(prefix: &str) -> (PathBuf, PathBuf) {
    (PathBuf::from(format!("{prefix}_gs.txt")), PathBuf::from(format!("{prefix}_gs.bin")))
}

const QUERIES_KEY: &str = "queryIds";

impl GoldCache {
    pub fn exists(prefix: &str) -> bool {
        let (m, b) = cache_paths(prefix);
        m.exists() && b.exists()
    }

    pub fn save(&self, prefix: &str) -> Result<()> {
        let (meta_path, bin_path) = cache_paths(prefix);
        let mut text = String::new();
        for (k, v) in &self.meta {
            text.push_str(&format!("{k}={v}\n"));
        }
        text.push_str(&format!("splits={}\n", self.splits.len()));
        for (i, s) in self.splits.iter().enumerate() {
            let ids: Vec<String> = s.query_ids.iter().map(|x| x.to_string()).collect();
            text.push_str(&format!("{QUERIES_KEY}.{i}={}\n", ids.join(",")));
            let sizes: Vec<String> = s.per_type.iter().map(|t| t.len().to_string()).collect();
            text.push_str(&format!("queryQty.{i}={}\n", sizes.join(",")));
        }
        fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))?;
        let mut bin = Vec::new();
        for l in self.splits.iter().flat_map(|s| &s.per_type).flatten() {
            bin.extend_from_slice(&(l.entries.len() as u32).to_le_bytes());
            for e in &l.entries {
                bin.extend_from_slice(&e.id.to_le_bytes());
                bin.extend_from_slice(&e.dist.to_le_bytes());
                bin.extend_from_slice(&e.label.to_le_bytes());
            }
        }
        fs::write(&bin_path, bin).map_err(|e| Error::io(&bin_path, e))
    }

    /// Loads the cache and checks every key of `expected` against the stored meta.
    pub fn load(prefix: &str, expected: &BTreeMap<String, String>) -> Result<Self> {
        let (meta_path, bin_path) = cache_paths(prefix);
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let mut all = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Cache(format!("malformed meta line '{line}'")))?;
            all.insert(k.to_string(), v.to_string());
        }
        for (k, want) in expected {
            match all.get(k) {
                Some(have) if have == want => {}
                have => {
                    return Err(Error::Cache(format!(
                        "'{k}' is '{}' in the cache but '{want}' in this run",
                        have.map_or("<absent>", String::as_str)
                    )))
                }
            }
        }
        let num: usize = field(&all, "splits")?;
        let bytes = fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
        let mut cur = Cursor { buf: &bytes, pos: 0 };
        let mut splits = Vec::with_capacity(num);
        for i in 0..num {
            let ids_text: String = field(&all, &format!("{QUERIES_KEY}.{i}"))?;
            let query_ids = list(&ids_text)?;
            let sizes = list(&field::<String>(&all, &format!("queryQty.{i}"))?)?;
            let per_type = sizes
                .iter()
                .map(|&n| (0..n).map(|_| cur.list()).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            splits.push(SplitGold { query_ids, per_type });
        }
        if cur.pos != bytes.len() {
            return Err(Error::Cache("trailing bytes in the entries file".into()));
        }
        let meta = all
            .into_iter()
            .filter(|(k, _)| k != "splits" && !k.starts_with(QUERIES_KEY) && !k.starts_with("queryQty."))
            .collect();
        Ok(GoldCache { meta, splits })
    }
}

fn field<T: std::str::FromStr>(m: &BTreeMap<String, String>, k: &str) -> Result<T> {
    m.get(k)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Cache(format!("missing or malformed '{k}'")))
}

fn list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Cache(format!("bad number '{t}'"))))
        .collect()
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let s = self
            .buf
            .get(self.pos..self.pos + N)
            .ok_or_else(|| Error::Cache("entries file is truncated".into()))?;
        self.pos += N;
        Ok(s.try_into().unwrap())
    }

    fn list(&mut self) -> Result<GoldList> {
        let n = u32::from_le_bytes(self.take()?) as usize;
        let entries = (0..n)
            .map(|_| {
                Ok(GoldEntry {
                    id: u32::from_le_bytes(self.take()?),
                    dist: f64::from_le_bytes(self.take()?),
                    label: i32::from_le_bytes(self.take()?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GoldList { entries })
    }
}
