//! A small stateful facade for embedding: add points, build, query, save and load.

use std::path::Path;
use std::sync::Arc;

use simsearch_core::index::{self, IndexBox, IndexContext};
use simsearch_core::query::Query;
use simsearch_core::{create_space, DataSet, DistType, ObjectRecord, ParamMap, SpaceRef};

use crate::error::{Error, Result};

pub struct IndexSession {
    space: SpaceRef,
    method: String,
    points: Vec<ObjectRecord>,
    data: Option<Arc<DataSet>>,
    index: Option<IndexBox>,
    seed: u64,
}

impl IndexSession {
    /// `space_params` is a comma-separated list such as `p=0.5`, or empty.
    pub fn init(space_type: &str, space_params: &str, method: &str, dist_type: DistType) -> Result<Self> {
        let mnemonic = if space_params.trim().is_empty() {
            space_type.to_string()
        } else {
            format!("{space_type}:{space_params}")
        };
        if !index::METHODS.contains(&method) {
            return Err(simsearch_core::Error::UnknownMethod(method.into()).into());
        }
        Ok(IndexSession {
            space: create_space(&mnemonic, dist_type)?,
            method: method.to_string(),
            points: Vec::new(),
            data: None,
            index: None,
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Adds an object in the data-file text format; returns its internal id.
    pub fn add_point(&mut self, extern_id: Option<&str>, payload_text: &str) -> Result<u32> {
        if self.index.is_some() {
            return Err(Error::Config("points cannot be added after the index is built".into()));
        }
        let id = self.points.len() as u32;
        let rec = self.space.parse_line(id, payload_text)?;
        self.points.push(rec.with_extern_id(extern_id.map(String::from)));
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn extern_id(&self, id: u32) -> Option<&str> {
        self.points.get(id as usize).and_then(|r| r.extern_id())
    }

    fn context(&mut self) -> IndexContext {
        let data = self
            .data
            .get_or_insert_with(|| Arc::new(DataSet::from_records(self.space.name(), self.points.iter().cloned())))
            .clone();
        IndexContext::new(self.space.clone(), data, self.seed)
    }

    /// Builds the index from comma-separated `name=value` parameters.
    pub fn create_index(&mut self, params: &str) -> Result<()> {
        let ctx = self.context();
        let mut p = ParamMap::parse(params)?;
        self.index = Some(index::create_index(&self.method, &ctx, &mut p)?);
        Ok(())
    }

    pub fn set_query_time_params(&mut self, params: &str) -> Result<()> {
        let index = self.index.as_deref_mut().ok_or_else(not_built)?;
        index::apply_query_time_params(index, &ParamMap::parse(params)?)?;
        Ok(())
    }

    /// `(internal id, distance)` pairs, nearest first.
    pub fn knn_query(&self, payload_text: &str, k: usize) -> Result<Vec<(u32, f64)>> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let index = self.index.as_deref().ok_or_else(not_built)?;
        let q = self.space.parse_line(0, payload_text)?;
        let mut query = Query::knn(&*self.space, q.view(), k);
        index.search(&mut query)?;
        Ok(query.results().into_iter().map(|n| (n.id, n.dist.0)).collect())
    }

    /// Writes the built index; the points themselves are not stored.
    pub fn save(&self, path: &Path) -> Result<()> {
        let index = self.index.as_deref().ok_or_else(not_built)?;
        let bytes = index.save()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Restores an index saved for the same points, which must already be added.
    pub fn load(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let ctx = self.context();
        self.index = Some(index::load_index(&ctx, &bytes)?);
        Ok(())
    }
}

fn not_built() -> Error {
    Error::Config("the index has not been built".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifecycle() {
        let mut s = IndexSession::init("l2", "", "hnsw", DistType::Float).unwrap();
        for i in 0..200 {
            let x = i as f64 * 0.1;
            s.add_point(Some(&format!("p{i}")), &format!("{x} {}", x * x)).unwrap();
        }
        assert!(s.knn_query("1 1", 3).is_err());
        s.create_index("M=8,efConstruction=50").unwrap();
        assert!(s.add_point(None, "0 0").is_err());
        s.set_query_time_params("efSearch=50").unwrap();
        let r = s.knn_query("1 1", 3).unwrap();
        assert_eq!(r[0].0, 10);
        assert_eq!(s.extern_id(r[0].0), Some("p10"));
        assert!(s.knn_query("1 1", 0).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.bin");
        s.save(&path).unwrap();
        let mut t = IndexSession::init("l2", "", "hnsw", DistType::Float).unwrap();
        for i in 0..200 {
            let x = i as f64 * 0.1;
            t.add_point(None, &format!("{x} {}", x * x)).unwrap();
        }
        t.load(&path).unwrap();
        t.set_query_time_params("efSearch=50").unwrap();
        assert_eq!(t.knn_query("1 1", 3).unwrap(), r);
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(IndexSession::init("l2", "", "nope", DistType::Float).is_err());
        assert!(IndexSession::init("nope", "", "hnsw", DistType::Float).is_err());
        assert!(IndexSession::init("lp", "p=0.5", "vptree", DistType::Float).is_ok());
    }
}
