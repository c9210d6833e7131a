//! Neighborhood approximation index: inverted lists over each object's closest pivots.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::bucket::refine;
use crate::index::perm::{closest_pivots, pivot_distances, query_pivot_distances, select_pivots};
use crate::index::{check_data_stamp, parallel_map, thread_qty, write_data_stamp, Index, IndexContext};
use crate::math::scan_count;
use crate::object::{DataSet, IdType, ObjectRecord};
use crate::params::ParamMap;
use crate::persist::{Reader, Writer};
use crate::query::Query;

const VERSION: u32 = 1;

struct Chunk {
    start: IdType,
    len: usize,
    /// Per pivot, ascending ids of chunk members that have the pivot among their closest.
    lists: Vec<Vec<IdType>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SearchParams {
    num_pivot_search: usize,
    use_sort: bool,
    db_scan_frac: f64,
}

pub struct Napp {
    data: Arc<DataSet>,
    pivots: Vec<ObjectRecord>,
    num_pivot_index: usize,
    chunk_size: usize,
    chunks: Vec<Chunk>,
    sp: SearchParams,
}

impl Napp {
    /// Index-time: `numPivot` (512), `numPivotIndex` (32), `chunkIndexSize` (65536),
    /// `indexThreadQty`, `invProcAlg` (only `scan`), `pivotFile` (pivots supplied through the context).
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let num_pivot: usize = p.optional("numPivot", 512usize)?;
        let num_pivot_index: usize = p.optional("numPivotIndex", 32usize.min(num_pivot))?;
        let chunk_size: usize = p.optional("chunkIndexSize", 65536usize)?;
        let threads = thread_qty(p)?;
        let alg: String = p.optional("invProcAlg", String::from("scan"))?;
        if alg != "scan" {
            return Err(Error::InvalidArgument(alloc::format!("unsupported invProcAlg '{alg}'")));
        }
        if p.peek("pivotFile").is_some() {
            p.claim("pivotFile");
            if ctx.pivots.is_none() {
                return Err(Error::InvalidArgument("pivotFile given but no pivots were loaded".into()));
            }
        }
        if num_pivot_index == 0 || num_pivot_index > num_pivot {
            return Err(Error::InvalidArgument("need 1 <= numPivotIndex <= numPivot".into()));
        }
        if chunk_size == 0 {
            return Err(Error::InvalidArgument("chunkIndexSize must be positive".into()));
        }
        let mut rng = ctx.rng();
        let pivots = select_pivots(ctx, num_pivot, &mut rng)?;
        let space = &*ctx.space;
        let closest: Vec<Vec<u32>> = parallel_map(ctx.data.len(), threads, |i| {
            closest_pivots(&pivot_distances(space, &pivots, ctx.data.view(i)), num_pivot_index)
        });
        let n = ctx.data.len();
        let mut chunks = Vec::with_capacity(n.div_ceil(chunk_size));
        for start in (0..n).step_by(chunk_size) {
            let end = (start + chunk_size).min(n);
            let mut lists = alloc::vec![Vec::new(); num_pivot];
            for (i, cl) in closest.iter().enumerate().take(end).skip(start) {
                for &pv in cl {
                    lists[pv as usize].push(i as IdType);
                }
            }
            chunks.push(Chunk {
                start: start as IdType,
                len: end - start,
                lists,
            });
        }
        Ok(Napp {
            data: ctx.data.clone(),
            pivots,
            num_pivot_index,
            chunk_size,
            chunks,
            sp: SearchParams {
                num_pivot_search: 1,
                use_sort: false,
                db_scan_frac: 0.05,
            },
        })
    }

    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }

    pub fn total_postings(&self) -> usize {
        self.chunks.iter().flat_map(|c| &c.lists).map(Vec::len).sum()
    }

    pub fn pivots(&self) -> &[ObjectRecord] {
        &self.pivots
    }

    /// Filter step: ids sharing at least `numPivotSearch` indexed pivots with the query,
    /// with their shared-pivot counts, in increasing id order.
    pub fn candidates(&self, q: &mut Query<'_>) -> Vec<(IdType, u32)> {
        let qd = query_pivot_distances(q, &self.pivots);
        let qp = closest_pivots(&qd, self.num_pivot_index);
        let need = self.sp.num_pivot_search as u32;
        let mut out = Vec::new();
        let mut counters: Vec<u32> = Vec::new();
        for c in &self.chunks {
            counters.clear();
            counters.resize(c.len, 0);
            for &pv in &qp {
                for &id in &c.lists[pv as usize] {
                    counters[(id - c.start) as usize] += 1;
                }
            }
            for (k, &cnt) in counters.iter().enumerate() {
                if cnt >= need {
                    out.push((c.start + k as IdType, cnt));
                }
            }
        }
        out
    }

    fn write_payload(&self, w: &mut Writer) {
        w.usize(self.num_pivot_index);
        w.usize(self.chunk_size);
        w.usize(self.pivots.len());
        for p in &self.pivots {
            w.record(p);
        }
        w.usize(self.chunks.len());
        for c in &self.chunks {
            w.u32(c.start);
            w.usize(c.len);
            for l in &c.lists {
                w.u32s(l);
            }
        }
    }

    pub fn load(ctx: &IndexContext, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, "napp", VERSION)?;
        check_data_stamp(&mut r, ctx)?;
        let num_pivot_index = r.usize()?;
        let chunk_size = r.usize()?;
        let np = r.usize()?;
        if np == 0 || num_pivot_index > np || chunk_size == 0 {
            return Err(Error::Format("inconsistent napp header".into()));
        }
        let pivots = (0..np).map(|_| r.record()).collect::<Result<Vec<_>>>()?;
        let nc = r.usize()?;
        let mut chunks = Vec::new();
        for _ in 0..nc {
            let start = r.u32()?;
            let len = r.usize()?;
            let lists = (0..np).map(|_| r.u32s()).collect::<Result<Vec<_>>>()?;
            let bad = lists
                .iter()
                .flatten()
                .any(|&id| id < start || (id - start) as usize >= len || id as usize >= ctx.data.len());
            if bad {
                return Err(Error::Format("posting outside its chunk".into()));
            }
            chunks.push(Chunk { start, len, lists });
        }
        r.finish()?;
        Ok(Napp {
            data: ctx.data.clone(),
            pivots,
            num_pivot_index,
            chunk_size,
            chunks,
            sp: SearchParams {
                num_pivot_search: 1,
                use_sort: false,
                db_scan_frac: 0.05,
            },
        })
    }
}

impl Index for Napp {
    fn method(&self) -> &'static str {
        "napp"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let mut cands = self.candidates(q);
        if self.sp.use_sort {
            let keep = scan_count(self.sp.db_scan_frac, self.data.len());
            cands.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            cands.truncate(keep);
        }
        refine(&self.data, cands.into_iter().map(|c| c.0), q);
        Ok(())
    }

    /// Query-time: `numPivotSearch` (1), `useSort` (0), `dbScanFrac` (0.05, with `useSort=1`).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        let sp = SearchParams {
            num_pivot_search: p.optional("numPivotSearch", 1usize)?,
            use_sort: p.optional("useSort", false)?,
            db_scan_frac: p.optional("dbScanFrac", 0.05)?,
        };
        if sp.num_pivot_search == 0 || sp.num_pivot_search > self.num_pivot_index {
            return Err(Error::InvalidArgument("need 1 <= numPivotSearch <= numPivotIndex".into()));
        }
        if !(0.0..=1.0).contains(&sp.db_scan_frac) {
            return Err(Error::InvalidArgument("dbScanFrac must be in [0, 1]".into()));
        }
        self.sp = sp;
        Ok(())
    }

    fn save(&self) -> Result<Vec<u8>> {
        let mut w = Writer::new("napp", VERSION);
        write_data_stamp(&mut w, &self.data);
        self.write_payload(&mut w);
        Ok(w.finish())
    }

    fn size_bytes(&self) -> usize {
        self.total_postings() * 4 + self.pivots.iter().map(|p| p.byte_len() + 16).sum::<usize>()
    }
}
