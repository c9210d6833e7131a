//! Brute-force filtering in a projected space.

use alloc::collections::BinaryHeap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::Result;
use crate::index::bucket::refine;
use crate::index::{parallel_map, thread_qty, Index, IndexContext};
use crate::math::{scan_count, sqrt, OrdF64};
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::projection::{ProjKind, Projection};
use crate::query::Query;

/// Reads `projType`, `intermDim` and the dimension parameter `dim_name`, then draws the projection.
pub(crate) fn read_projection(ctx: &IndexContext, p: &mut ParamMap, dim_name: &str) -> Result<Projection> {
    let kind: ProjKind = p.required::<alloc::string::String>("projType")?.parse()?;
    let dim: usize = p.required(dim_name)?;
    let interm: usize = p.optional("intermDim", 0usize)?;
    let mut rng = ctx.rng();
    Projection::new(kind, &*ctx.space, &ctx.data, dim, interm, &mut rng)
}

/// Projects every data object.
pub(crate) fn project_all(ctx: &IndexContext, proj: &Projection, threads: usize) -> Result<Vec<Vec<f64>>> {
    parallel_map(ctx.data.len(), threads, |i| proj.project(&*ctx.space, ctx.data.view(i)))
        .into_iter()
        .collect()
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `1 - cos`, with zero vectors treated as orthogonal to everything.
fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - (dot / sqrt(na * nb)).clamp(-1.0, 1.0)
}

/// The `m` smallest `(dist, id)` pairs by partial selection, unordered.
pub fn select_smallest(mut v: Vec<(OrdF64, IdType)>, m: usize) -> Vec<(OrdF64, IdType)> {
    if m < v.len() {
        v.select_nth_unstable(m);
        v.truncate(m);
    }
    v
}

/// The same selection through a bounded max-heap.
pub fn select_smallest_queue(v: impl IntoIterator<Item = (OrdF64, IdType)>, m: usize) -> Vec<(OrdF64, IdType)> {
    if m == 0 {
        return Vec::new();
    }
    let mut heap = BinaryHeap::with_capacity(m + 1);
    for e in v {
        if heap.len() < m {
            heap.push(e);
        } else if e < *heap.peek().unwrap() {
            heap.pop();
            heap.push(e);
        }
    }
    heap.into_vec()
}

pub struct ProjIncSort {
    data: Arc<DataSet>,
    proj: Projection,
    coords: Vec<f64>,
    db_scan_frac: f64,
    use_cosine: bool,
    use_queue: bool,
}

impl ProjIncSort {
    /// Index-time: `projType`, `projDim`, `intermDim` (0), `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let proj = read_projection(ctx, p, "projDim")?;
        let threads = thread_qty(p)?;
        let coords = project_all(ctx, &proj, threads)?.concat();
        Ok(ProjIncSort {
            data: ctx.data.clone(),
            proj,
            coords,
            db_scan_frac: 0.05,
            use_cosine: false,
            use_queue: false,
        })
    }

    pub fn projection(&self) -> &Projection {
        &self.proj
    }

    /// Ids of the `⌈dbScanFrac·N⌉` nearest projections, unordered.
    pub fn candidates(&self, q: &mut Query<'_>) -> Result<Vec<IdType>> {
        let pq = self.proj.project_query(q)?;
        let dist = if self.use_cosine { cosine } else { l2 };
        let ranked = self
            .coords
            .chunks_exact(self.proj.dim())
            .enumerate()
            .map(|(i, c)| (OrdF64(dist(&pq, c)), i as IdType));
        let m = scan_count(self.db_scan_frac, self.data.len());
        let sel = if self.use_queue {
            select_smallest_queue(ranked, m)
        } else {
            select_smallest(ranked.collect(), m)
        };
        Ok(sel.into_iter().map(|e| e.1).collect())
    }
}

impl Index for ProjIncSort {
    fn method(&self) -> &'static str {
        "proj_incsort"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let c = self.candidates(q)?;
        refine(&self.data, c, q);
        Ok(())
    }

    /// Query-time: `dbScanFrac` (0.05), `useCosine` (0), `useQueue` (0).
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.db_scan_frac = p.optional("dbScanFrac", 0.05)?;
        self.use_cosine = p.optional("useCosine", false)?;
        self.use_queue = p.optional("useQueue", false)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.coords.len() * 8 + self.proj.size_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selections_agree() {
        let v: Vec<(OrdF64, IdType)> = [3.0, 1.0, 2.0, 1.0, 5.0, 2.0]
            .iter()
            .enumerate()
            .map(|(i, &d)| (OrdF64(d), i as IdType))
            .collect();
        for m in 0..=7 {
            let mut a = select_smallest(v.clone(), m);
            let mut b = select_smallest_queue(v.clone(), m);
            let mut c = v.clone();
            a.sort();
            b.sort();
            c.sort();
            c.truncate(m);
            assert_eq!(a, b);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn projected_distances() {
        assert_eq!(l2(&[0.0, 3.0], &[4.0, 0.0]), 5.0);
        assert!(cosine(&[1.0, 0.0], &[2.0, 0.0]).abs() < 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 1.0);
    }
}
