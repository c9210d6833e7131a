//! VP-tree over projected objects, with refinement in the original space.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::index::bucket::refine;
use crate::index::perm::{binarize, permutation, pivot_distances, query_pivot_distances, select_pivots};
use crate::index::proj_incsort::{project_all, read_projection};
use crate::index::vptree::{read_build_params, read_search_params, VpSearchParams, VpTree};
use crate::index::{parallel_map, thread_qty, Index, IndexContext};
use crate::math::scan_count;
use crate::object::{DataSet, ObjectRecord, NO_LABEL};
use crate::params::ParamMap;
use crate::projection::Projection;
use crate::query::Query;
use crate::space::{create_space, BitHammingSpace, DistType, SpaceRef};

enum Mapper {
    Dense(Projection),
    PermBin {
        pivots: Vec<ObjectRecord>,
        threshold: u32,
        space: Arc<BitHammingSpace>,
    },
}

pub struct ProjVpTree {
    method: &'static str,
    data: Arc<DataSet>,
    mapper: Mapper,
    proj_space: SpaceRef,
    tree: VpTree,
    sp: VpSearchParams,
    db_scan_frac: f64,
}

impl ProjVpTree {
    /// `proj_vptree`. Index-time: `projType`, `projDim`, `intermDim` (0), `projSpaceType` (l2),
    /// `bucketSize`, `chunkBucket`, `indexThreadQty`.
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let proj = read_projection(ctx, p, "projDim")?;
        let space_name: alloc::string::String = p.optional("projSpaceType", "l2".into())?;
        let proj_space = create_space(&space_name, DistType::Double)?;
        let bp = read_build_params(p)?;
        let threads = thread_qty(p)?;
        let coords = project_all(ctx, &proj, threads)?;
        let recs = coords
            .iter()
            .enumerate()
            .map(|(i, c)| proj_space.from_dense(i as u32, NO_LABEL, c))
            .collect::<Result<Vec<_>>>()?;
        let projected = Arc::new(DataSet::from_records(proj_space.name(), recs));
        let inner = IndexContext::new(proj_space.clone(), projected, ctx.seed);
        Ok(ProjVpTree {
            method: "proj_vptree",
            data: ctx.data.clone(),
            tree: VpTree::build(&inner, bp)?,
            mapper: Mapper::Dense(proj),
            proj_space,
            sp: VpSearchParams::default(),
            db_scan_frac: 0.05,
        })
    }

    /// `perm_bin_vptree`: binarized permutations in Hamming space.
    /// Index-time: `numPivot` (32), `binThreshold` (numPivot/2), `bucketSize`, `chunkBucket`, `indexThreadQty`.
    pub fn build_perm_bin(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let num_pivot: usize = p.optional("numPivot", 32usize)?;
        let threshold: u32 = p.optional("binThreshold", (num_pivot / 2) as u32)?;
        if threshold as usize > num_pivot {
            return Err(Error::InvalidArgument("binThreshold exceeds numPivot".into()));
        }
        let bp = read_build_params(p)?;
        let threads = thread_qty(p)?;
        let mut rng = ctx.rng();
        let pivots = select_pivots(ctx, num_pivot, &mut rng)?;
        let space = Arc::new(BitHammingSpace::new("bit_hamming", DistType::Int));
        let s = &*ctx.space;
        let recs = parallel_map(ctx.data.len(), threads, |i| {
            let bits = binarize(&permutation(&pivot_distances(s, &pivots, ctx.data.view(i))), threshold);
            space.from_bits(i as u32, NO_LABEL, &bits)
        });
        let proj_space: SpaceRef = space.clone();
        let projected = Arc::new(DataSet::from_records(proj_space.name(), recs));
        let inner = IndexContext::new(proj_space.clone(), projected, ctx.seed);
        Ok(ProjVpTree {
            method: "perm_bin_vptree",
            data: ctx.data.clone(),
            tree: VpTree::build(&inner, bp)?,
            mapper: Mapper::PermBin {
                pivots,
                threshold,
                space,
            },
            proj_space,
            sp: VpSearchParams::default(),
            db_scan_frac: 0.05,
        })
    }

    fn project_query(&self, q: &mut Query<'_>) -> Result<ObjectRecord> {
        match &self.mapper {
            Mapper::Dense(proj) => {
                let v = proj.project_query(q)?;
                self.proj_space.from_dense(0, NO_LABEL, &v)
            }
            Mapper::PermBin {
                pivots,
                threshold,
                space,
            } => {
                let perm = permutation(&query_pivot_distances(q, pivots));
                Ok(space.from_bits(0, NO_LABEL, &binarize(&perm, *threshold)))
            }
        }
    }

    /// Ids found by the k-NN search in the projected space, `k = ⌈dbScanFrac·N⌉`.
    pub fn candidates(&self, q: &mut Query<'_>) -> Result<Vec<u32>> {
        let pq = self.project_query(q)?;
        let k = scan_count(self.db_scan_frac, self.data.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut iq = Query::knn(&*self.proj_space, pq.view(), k);
        self.tree.search(&mut iq, &self.sp);
        Ok(iq.result_ids())
    }
}

impl Index for ProjVpTree {
    fn method(&self) -> &'static str {
        self.method
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        let c = self.candidates(q)?;
        refine(&self.data, c, q);
        Ok(())
    }

    /// Query-time: `dbScanFrac` (0.05) and the VP-tree oracle parameters.
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.sp = read_search_params(p, Default::default())?;
        self.db_scan_frac = p.optional("dbScanFrac", 0.05)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        let mapper = match &self.mapper {
            Mapper::Dense(p) => p.size_bytes(),
            Mapper::PermBin { pivots, .. } => pivots.iter().map(ObjectRecord::byte_len).sum(),
        };
        mapper + self.tree.size_bytes() + self.tree.data().size_bytes()
    }
}
