//! Generalized-hyperplane tree.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::index::bucket::Bucket;
use crate::index::vptree::UNLIMITED_LEAVES;
use crate::index::{Index, IndexContext};
use crate::math;
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::query::Query;

enum Node {
    Leaf(Bucket),
    Inner {
        p1: IdType,
        p2: IdType,
        left: Box<Node>,
        right: Box<Node>,
    },
}

const MAX_DEPTH: usize = 512;
const PIVOT_DRAWS: usize = 16;

pub struct GhTree {
    data: Arc<DataSet>,
    root: Node,
    max_leaves: usize,
}

impl GhTree {
    /// Index-time: `bucketSize` (default 50), `chunkBucket` (default 1).
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let bucket_size: usize = p.optional("bucketSize", 50usize)?;
        let chunk: bool = p.optional("chunkBucket", true)?;
        if bucket_size == 0 {
            return Err(Error::InvalidArgument("bucketSize must be at least 1".into()));
        }
        let mut rng = ctx.rng();
        let ids = (0..ctx.data.len() as IdType).collect();
        let root = build_node(ctx, bucket_size, chunk, ids, &mut rng, 0);
        Ok(GhTree {
            data: ctx.data.clone(),
            root,
            max_leaves: UNLIMITED_LEAVES,
        })
    }

    fn visit(&self, node: &Node, q: &mut Query<'_>, budget: &mut usize) {
        if *budget == 0 {
            return;
        }
        match node {
            Node::Leaf(b) => {
                *budget -= 1;
                b.scan(&self.data, q);
            }
            Node::Inner { p1, p2, left, right } => {
                let d1 = q.distance_to(self.data.view(*p1 as usize));
                q.check_and_add(*p1, d1);
                let d2 = q.distance_to(self.data.view(*p2 as usize));
                q.check_and_add(*p2, d2);
                let (near, far) = if d1 <= d2 { (left, right) } else { (right, left) };
                self.visit(near, q, budget);
                // points across the hyperplane are at least |d1 - d2| / 2 away
                if math::abs(d1 - d2) / 2.0 <= q.radius() {
                    self.visit(far, q, budget);
                }
            }
        }
    }

    /// Runs a search and returns the number of leaves scanned.
    pub fn search_counting(&self, q: &mut Query<'_>) -> usize {
        let mut budget = self.max_leaves;
        self.visit(&self.root, q, &mut budget);
        self.max_leaves - budget
    }
}

fn build_node(
    ctx: &IndexContext,
    bucket: usize,
    chunk: bool,
    mut ids: Vec<IdType>,
    rng: &mut impl Rng,
    depth: usize,
) -> Node {
    if ids.len() <= bucket.max(2) || depth >= MAX_DEPTH {
        return Node::Leaf(Bucket::new(ids, &ctx.data, chunk));
    }
    let view = |i: IdType| ctx.data.view(i as usize);
    // redraw until the pivots are at a positive distance
    let mut pair = None;
    for _ in 0..PIVOT_DRAWS {
        let a = rng.random_range(0..ids.len());
        let mut b = rng.random_range(0..ids.len() - 1);
        if b >= a {
            b += 1;
        }
        if ctx.space.distance(view(ids[a]), view(ids[b])) > 0.0 {
            pair = Some((a, b));
            break;
        }
    }
    let Some((a, b)) = pair else {
        return Node::Leaf(Bucket::new(ids, &ctx.data, chunk));
    };
    let (p1, p2) = (ids[a], ids[b]);
    ids.retain(|&i| i != p1 && i != p2);
    let (pv1, pv2) = (view(p1), view(p2));
    let (l, r): (Vec<IdType>, Vec<IdType>) = ids
        .into_iter()
        .partition(|&i| ctx.space.distance(pv1, view(i)) <= ctx.space.distance(pv2, view(i)));
    Node::Inner {
        p1,
        p2,
        left: Box::new(build_node(ctx, bucket, chunk, l, rng, depth + 1)),
        right: Box::new(build_node(ctx, bucket, chunk, r, rng, depth + 1)),
    }
}

fn node_size(n: &Node) -> usize {
    core::mem::size_of::<Node>()
        + match n {
            Node::Leaf(b) => b.size_bytes(),
            Node::Inner { left, right, .. } => node_size(left) + node_size(right),
        }
}

impl Index for GhTree {
    fn method(&self) -> &'static str {
        "ghtree"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        self.search_counting(q);
        Ok(())
    }

    /// Query-time: `maxLeavesToVisit`.
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.max_leaves = p.optional("maxLeavesToVisit", UNLIMITED_LEAVES)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        node_size(&self.root)
    }
}
