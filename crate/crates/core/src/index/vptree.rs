//! Vantage-point tree with a parametric pruning oracle.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::index::bucket::Bucket;
use crate::index::tuner::{self, TuneTarget, TunerConfig};
use crate::index::{Index, IndexContext};
use crate::math;
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::query::Query;

/// Decision function `D(x)`: the far subtree is skipped when `radius <= D(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VpOracle {
    pub alpha_left: f64,
    pub alpha_right: f64,
    pub exp_left: f64,
    pub exp_right: f64,
}

impl Default for VpOracle {
    fn default() -> Self {
        VpOracle {
            alpha_left: 1.0,
            alpha_right: 1.0,
            exp_left: 1.0,
            exp_right: 1.0,
        }
    }
}

impl VpOracle {
    /// `x` is the query-pivot distance, `median` the node radius.
    #[inline]
    pub fn decision(&self, x: f64, median: f64) -> f64 {
        let gap = math::abs(x - median);
        if x <= median {
            self.alpha_left * pow_exp(gap, self.exp_left)
        } else {
            self.alpha_right * pow_exp(gap, self.exp_right)
        }
    }

    /// Whether the subtree across the median has to be visited.
    #[inline]
    pub fn visit_far(&self, radius: f64, x: f64, median: f64) -> bool {
        radius > self.decision(x, median)
    }

    pub fn read(p: &mut ParamMap, defaults: VpOracle) -> Result<Self> {
        let o = VpOracle {
            alpha_left: p.optional("alphaLeft", defaults.alpha_left)?,
            alpha_right: p.optional("alphaRight", defaults.alpha_right)?,
            exp_left: p.optional("expLeft", defaults.exp_left)?,
            exp_right: p.optional("expRight", defaults.exp_right)?,
        };
        if !(o.alpha_left > 0.0 && o.alpha_right > 0.0) {
            return Err(Error::InvalidArgument("alphaLeft/alphaRight must be positive".into()));
        }
        if !(o.exp_left >= 0.0 && o.exp_right >= 0.0) {
            return Err(Error::InvalidArgument("expLeft/expRight must be non-negative".into()));
        }
        Ok(o)
    }

    pub fn to_params(&self) -> ParamMap {
        let mut p = ParamMap::new();
        p.set("alphaLeft", self.alpha_left);
        p.set("alphaRight", self.alpha_right);
        p.set("expLeft", self.exp_left);
        p.set("expRight", self.exp_right);
        p
    }
}

#[inline]
fn pow_exp(v: f64, e: f64) -> f64 {
    if e == 1.0 {
        v
    } else {
        math::pow(v, e)
    }
}

/// Leaf budget used when `maxLeavesToVisit` is not given.
pub const UNLIMITED_LEAVES: usize = i32::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VpSearchParams {
    pub oracle: VpOracle,
    pub max_leaves: usize,
}

impl Default for VpSearchParams {
    fn default() -> Self {
        VpSearchParams {
            oracle: VpOracle::default(),
            max_leaves: UNLIMITED_LEAVES,
        }
    }
}

enum Node {
    Leaf(Bucket),
    Inner {
        pivot: IdType,
        median: f64,
        inner: Box<Node>,
        outer: Box<Node>,
    },
}

/// Build-time knobs of a VP-tree.
#[derive(Debug, Clone, Copy)]
pub struct VpBuildParams {
    pub bucket_size: usize,
    pub chunk_bucket: bool,
}

const MAX_DEPTH: usize = 512;

/// The tree structure, reusable over any (space, data) pair.
pub struct VpTree {
    data: Arc<DataSet>,
    root: Node,
    nodes: usize,
}

impl VpTree {
    pub fn build(ctx: &IndexContext, bp: VpBuildParams) -> Result<Self> {
        if bp.bucket_size == 0 {
            return Err(Error::InvalidArgument("bucketSize must be at least 1".into()));
        }
        let mut rng = ctx.rng();
        let ids: Vec<IdType> = (0..ctx.data.len() as IdType).collect();
        let mut nodes = 0;
        let root = build_node(ctx, &bp, ids, &mut rng, 0, &mut nodes);
        Ok(VpTree {
            data: ctx.data.clone(),
            root,
            nodes,
        })
    }

    /// Runs the search; returns the number of leaves scanned.
    pub fn search(&self, q: &mut Query<'_>, sp: &VpSearchParams) -> usize {
        let mut budget = sp.max_leaves;
        self.visit(&self.root, q, &sp.oracle, &mut budget);
        sp.max_leaves - budget
    }

    fn visit(&self, node: &Node, q: &mut Query<'_>, oracle: &VpOracle, budget: &mut usize) {
        if *budget == 0 {
            return;
        }
        match node {
            Node::Leaf(b) => {
                *budget -= 1;
                b.scan(&self.data, q);
            }
            Node::Inner {
                pivot,
                median,
                inner,
                outer,
            } => {
                let x = q.distance_to(self.data.view(*pivot as usize));
                q.check_and_add(*pivot, x);
                let (near, far) = if x <= *median { (inner, outer) } else { (outer, inner) };
                self.visit(near, q, oracle, budget);
                if oracle.visit_far(q.radius(), x, *median) {
                    self.visit(far, q, oracle, budget);
                }
            }
        }
    }

    /// Leaf sizes in depth-first order (for structural checks).
    /// The objects the tree was built over.
    pub fn data(&self) -> &DataSet {
        &self.data
    }

    pub fn leaf_sizes(&self) -> Vec<usize> {
        fn walk(n: &Node, out: &mut Vec<usize>) {
            match n {
                Node::Leaf(b) => out.push(b.len()),
                Node::Inner { inner, outer, .. } => {
                    walk(inner, out);
                    walk(outer, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 1,
                Node::Inner { inner, outer, .. } => 1 + walk(inner).max(walk(outer)),
            }
        }
        walk(&self.root)
    }

    pub fn size_bytes(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf(b) => b.size_bytes() + core::mem::size_of::<Node>(),
                Node::Inner { inner, outer, .. } => core::mem::size_of::<Node>() + walk(inner) + walk(outer),
            }
        }
        walk(&self.root)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }
}

fn build_node(
    ctx: &IndexContext,
    bp: &VpBuildParams,
    mut ids: Vec<IdType>,
    rng: &mut impl Rng,
    depth: usize,
    nodes: &mut usize,
) -> Node {
    *nodes += 1;
    if ids.len() <= bp.bucket_size || depth >= MAX_DEPTH {
        return Node::Leaf(Bucket::new(ids, &ctx.data, bp.chunk_bucket));
    }
    let pi = rng.random_range(0..ids.len());
    let pivot = ids.swap_remove(pi);
    let pv = ctx.data.view(pivot as usize);
    let mut dists: Vec<(f64, IdType)> = ids
        .iter()
        .map(|&i| (ctx.space.distance(pv, ctx.data.view(i as usize)), i))
        .collect();
    let mid = (dists.len() - 1) / 2;
    dists.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0));
    let median = dists[mid].0;
    let (inner, outer): (Vec<(f64, IdType)>, Vec<_>) = dists.iter().partition(|(d, _)| *d <= median);
    if outer.is_empty() {
        // all distances tie at the median: no useful split
        ids.push(pivot);
        return Node::Leaf(Bucket::new(ids, &ctx.data, bp.chunk_bucket));
    }
    let inner_ids = inner.into_iter().map(|p| p.1).collect();
    let outer_ids = outer.into_iter().map(|p| p.1).collect();
    Node::Inner {
        pivot,
        median,
        inner: Box::new(build_node(ctx, bp, inner_ids, rng, depth + 1, nodes)),
        outer: Box::new(build_node(ctx, bp, outer_ids, rng, depth + 1, nodes)),
    }
}

/// Reads `bucketSize` (default 50) and `chunkBucket` (default 1).
pub(crate) fn read_build_params(p: &mut ParamMap) -> Result<VpBuildParams> {
    Ok(VpBuildParams {
        bucket_size: p.optional("bucketSize", 50usize)?,
        chunk_bucket: p.optional("chunkBucket", true)?,
    })
}

pub(crate) fn read_search_params(p: &mut ParamMap, defaults: VpOracle) -> Result<VpSearchParams> {
    let oracle = VpOracle::read(p, defaults)?;
    let max_leaves: usize = p.optional("maxLeavesToVisit", UNLIMITED_LEAVES)?;
    Ok(VpSearchParams { oracle, max_leaves })
}

/// `vptree` method: the tree plus optional construction-time auto-tuning.
pub struct VpTreeIndex {
    tree: VpTree,
    defaults: VpOracle,
    tuned: bool,
    sp: VpSearchParams,
}

impl VpTreeIndex {
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let bp = read_build_params(p)?;
        let tune_k: Option<usize> = p.maybe("tuneK")?;
        let tune_r: Option<f64> = p.maybe("tuneR")?;
        let target = match (tune_k, tune_r) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument("specify only one of tuneK and tuneR".into()))
            }
            (Some(k), None) => Some(TuneTarget::Knn(k)),
            (None, Some(r)) => Some(TuneTarget::Range(r)),
            (None, None) => None,
        };
        let (defaults, tuned) = match target {
            Some(target) => {
                let cfg = TunerConfig::read(p, target, bp)?;
                (tuner::tune(ctx, &cfg)?.oracle, true)
            }
            None => {
                for name in ["desiredRecall", "tuneQty", "minExp", "maxExp"] {
                    if p.contains(name) {
                        return Err(Error::InvalidArgument(alloc::format!(
                            "'{name}' requires tuneK or tuneR"
                        )));
                    }
                }
                (VpOracle::default(), false)
            }
        };
        Ok(VpTreeIndex {
            tree: VpTree::build(ctx, bp)?,
            defaults,
            tuned,
            sp: VpSearchParams {
                oracle: defaults,
                max_leaves: UNLIMITED_LEAVES,
            },
        })
    }

    pub fn tree(&self) -> &VpTree {
        &self.tree
    }

    pub fn search_params(&self) -> VpSearchParams {
        self.sp
    }
}

impl Index for VpTreeIndex {
    fn method(&self) -> &'static str {
        "vptree"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        self.tree.search(q, &self.sp);
        Ok(())
    }

    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.sp = read_search_params(p, self.defaults)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.tree.size_bytes()
    }

    fn tuned_params(&self) -> Option<ParamMap> {
        self.tuned.then(|| self.defaults.to_params())
    }
}
