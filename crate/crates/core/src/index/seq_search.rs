//! Exhaustive scan; the exact baseline.

use alloc::sync::Arc;

use crate::error::Result;
use crate::index::bucket::Bucket;
use crate::index::{Index, IndexContext};
use crate::object::DataSet;
use crate::params::ParamMap;
use crate::query::Query;

pub struct SeqSearch {
    data: Arc<DataSet>,
    all: Bucket,
}

impl SeqSearch {
    /// `chunkBucket=1` (default 0) stores a contiguous copy of the data.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let chunk: bool = p.optional("chunkBucket", false)?;
        let ids = (0..ctx.data.len() as u32).collect();
        Ok(SeqSearch {
            data: ctx.data.clone(),
            all: Bucket::new(ids, &ctx.data, chunk),
        })
    }
}

impl Index for SeqSearch {
    fn method(&self) -> &'static str {
        "seq_search"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        self.all.scan(&self.data, q);
        Ok(())
    }

    fn set_query_time_params(&mut self, _p: &mut ParamMap) -> Result<()> {
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.all.size_bytes()
    }
}
