//! Sequential scan over binarized permutations ranked by Hamming distance.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::bucket::refine;
use crate::index::perm::{binarize_packed, permutation, pivot_distances, query_pivot_distances, select_pivots};
use crate::index::{parallel_map, thread_qty, Index, IndexContext};
use crate::math::scan_count;
use crate::object::{DataSet, IdType, ObjectRecord};
use crate::params::ParamMap;
use crate::query::Query;
use crate::space::bits::hamming_words;

pub struct PermIncSortBin {
    data: Arc<DataSet>,
    pivots: Vec<ObjectRecord>,
    threshold: u32,
    words: usize,
    codes: Vec<u64>,
    db_scan_frac: f64,
}

impl PermIncSortBin {
    /// Index-time: `numPivot` (32), `binThreshold` (numPivot/2), `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let num_pivot: usize = p.optional("numPivot", 32usize)?;
        let threshold: u32 = p.optional("binThreshold", (num_pivot / 2) as u32)?;
        let threads = thread_qty(p)?;
        if threshold as usize > num_pivot {
            return Err(Error::InvalidArgument("binThreshold exceeds numPivot".into()));
        }
        let mut rng = ctx.rng();
        let pivots = select_pivots(ctx, num_pivot, &mut rng)?;
        let space = &*ctx.space;
        let per: Vec<Vec<u64>> = parallel_map(ctx.data.len(), threads, |i| {
            binarize_packed(&permutation(&pivot_distances(space, &pivots, ctx.data.view(i))), threshold)
        });
        let words = num_pivot.div_ceil(64);
        Ok(PermIncSortBin {
            data: ctx.data.clone(),
            pivots,
            threshold,
            words,
            codes: per.concat(),
            db_scan_frac: 0.05,
        })
    }

    /// The `⌈dbScanFrac·N⌉` ids closest in Hamming distance, ties to smaller ids, unordered.
    pub fn candidates(&self, q: &mut Query<'_>) -> Vec<IdType> {
        let code = binarize_packed(&permutation(&query_pivot_distances(q, &self.pivots)), self.threshold);
        let mut ranked: Vec<(u64, IdType)> = self
            .codes
            .chunks_exact(self.words)
            .enumerate()
            .map(|(i, c)| (hamming_words(&code, c), i as IdType))
            .collect();
        let m = scan_count(self.db_scan_frac, ranked.len());
        if m < ranked.len() {
            ranked.select_nth_unstable(m);
            ranked.truncate(m);
        }
        ranked.into_iter().map(|e| e.1).collect()
    }
}

impl Index for PermIncSortBin {
    fn method(&self) -> &'static str {
        "perm_incsort_bin"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let c = self.candidates(q);
        refine(&self.data, c, q);
        Ok(())
    }

    /// Query-time: `dbScanFrac` (0.05).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.db_scan_frac = p.optional("dbScanFrac", 0.05)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.codes.len() * 8 + self.pivots.iter().map(ObjectRecord::byte_len).sum::<usize>()
    }
}
