//! List of clusters: sequential peeling of compact clusters.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::index::bucket::Bucket;
use crate::index::vptree::UNLIMITED_LEAVES;
use crate::index::{Index, IndexContext};
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::query::Query;

/// Rule for picking the next cluster center among the remaining points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Random,
    ClosestPrevCenter,
    FarthestPrevCenter,
    MinSumDistPrevCenters,
    MaxSumDistPrevCenters,
}

impl core::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => Strategy::Random,
            "closestPrevCenter" => Strategy::ClosestPrevCenter,
            "farthestPrevCenter" => Strategy::FarthestPrevCenter,
            "minSumDistPrevCenters" => Strategy::MinSumDistPrevCenters,
            "maxSumDistPrevCenters" => Strategy::MaxSumDistPrevCenters,
            _ => return Err(Error::InvalidArgument(alloc::format!("unknown strategy '{s}'"))),
        })
    }
}

/// One cluster: its center, covering radius and members (center excluded).
pub struct Cluster {
    pub center: IdType,
    pub covering_radius: f64,
    pub members: Bucket,
}

pub struct ListClusters {
    data: Arc<DataSet>,
    clusters: Vec<Cluster>,
    max_leaves: usize,
}

/// Remaining point with distances to the previous centers.
struct Pending {
    id: IdType,
    last: f64,
    sum: f64,
}

impl ListClusters {
    /// Index-time: `bucketSize` (50), `useBucketSize` (1), `radius`, `strategy` (random), `chunkBucket` (1).
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let bucket_size: usize = p.optional("bucketSize", 50usize)?;
        let use_bucket: bool = p.optional("useBucketSize", true)?;
        let radius: Option<f64> = p.maybe("radius")?;
        let strategy: Strategy = p.optional("strategy", String::from("random"))?.parse()?;
        let chunk: bool = p.optional("chunkBucket", true)?;
        let limit = if use_bucket {
            if bucket_size == 0 {
                return Err(Error::InvalidArgument("bucketSize must be at least 1".into()));
            }
            Limit::Count(bucket_size)
        } else {
            let r = radius.ok_or_else(|| Error::MissingParam("radius".into()))?;
            if r.is_nan() || r < 0.0 {
                return Err(Error::InvalidArgument("radius must be non-negative".into()));
            }
            Limit::Radius(r)
        };
        let clusters = build_clusters(ctx, limit, strategy, chunk);
        Ok(ListClusters {
            data: ctx.data.clone(),
            clusters,
            max_leaves: UNLIMITED_LEAVES,
        })
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Runs a search and returns the number of clusters scanned.
    pub fn search_counting(&self, q: &mut Query<'_>) -> usize {
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(self.clusters.len());
        for (i, c) in self.clusters.iter().enumerate() {
            let d = q.distance_to(self.data.view(c.center as usize));
            q.check_and_add(c.center, d);
            order.push((d, i));
        }
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut scanned = 0;
        for (d, i) in order {
            if scanned >= self.max_leaves {
                break;
            }
            let c = &self.clusters[i];
            if d <= c.covering_radius + q.radius() {
                c.members.scan(&self.data, q);
                scanned += 1;
            }
        }
        scanned
    }
}

#[derive(Clone, Copy)]
enum Limit {
    Count(usize),
    Radius(f64),
}

fn pick_center(pending: &[Pending], strategy: Strategy, first: bool, rng: &mut impl Rng) -> usize {
    let by = |key: &dyn Fn(&Pending) -> f64, max: bool| -> usize {
        let mut best = 0;
        for (i, p) in pending.iter().enumerate().skip(1) {
            let (k, b) = (key(p), key(&pending[best]));
            let better = if max { k > b } else { k < b };
            if better || (k == b && p.id < pending[best].id) {
                best = i;
            }
        }
        best
    };
    if first {
        return rng.random_range(0..pending.len());
    }
    match strategy {
        Strategy::Random => rng.random_range(0..pending.len()),
        Strategy::ClosestPrevCenter => by(&|p| p.last, false),
        Strategy::FarthestPrevCenter => by(&|p| p.last, true),
        Strategy::MinSumDistPrevCenters => by(&|p| p.sum, false),
        Strategy::MaxSumDistPrevCenters => by(&|p| p.sum, true),
    }
}

fn build_clusters(ctx: &IndexContext, limit: Limit, strategy: Strategy, chunk: bool) -> Vec<Cluster> {
    let mut rng = ctx.rng();
    let mut pending: Vec<Pending> = (0..ctx.data.len() as IdType)
        .map(|id| Pending { id, last: 0.0, sum: 0.0 })
        .collect();
    let mut clusters = Vec::new();
    while !pending.is_empty() {
        let ci = pick_center(&pending, strategy, clusters.is_empty(), &mut rng);
        let center = pending.swap_remove(ci).id;
        let cv = ctx.data.view(center as usize);
        let mut scored: Vec<(f64, usize)> = pending
            .iter()
            .enumerate()
            .map(|(i, p)| (ctx.space.distance(cv, ctx.data.view(p.id as usize)), i))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(pending[a.1].id.cmp(&pending[b.1].id)));
        let take = match limit {
            Limit::Count(n) => n.min(scored.len()),
            Limit::Radius(r) => scored.partition_point(|s| s.0 <= r),
        };
        let covering_radius = if take > 0 { scored[take - 1].0 } else { 0.0 };
        let mut absorbed = alloc::vec![false; pending.len()];
        let mut members = Vec::with_capacity(take);
        for &(_, i) in &scored[..take] {
            absorbed[i] = true;
            members.push(pending[i].id);
        }
        for &(d, i) in &scored[take..] {
            pending[i].last = d;
            pending[i].sum += d;
        }
        let mut k = 0;
        pending.retain(|_| {
            let keep = !absorbed[k];
            k += 1;
            keep
        });
        clusters.push(Cluster {
            center,
            covering_radius,
            members: Bucket::new(members, &ctx.data, chunk),
        });
    }
    clusters
}

impl Index for ListClusters {
    fn method(&self) -> &'static str {
        "list_clusters"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        self.search_counting(q);
        Ok(())
    }

    /// Query-time: `maxLeavesToVisit` caps the number of clusters scanned.
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.max_leaves = p.optional("maxLeavesToVisit", UNLIMITED_LEAVES)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.clusters
            .iter()
            .map(|c| c.members.size_bytes() + core::mem::size_of::<Cluster>())
            .sum()
    }
}
