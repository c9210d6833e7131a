//! Bregman ball tree for left queries under a Bregman divergence.
//!
//! Each node covers its members with a ball `{x : d(x, mu) <= R}` where `mu` is the
//! arithmetic mean of the members. The search lower-bounds `min d(x, q)` over a ball
//! with the Lagrange dual: for `theta` in `[0, 1)` the point `x_theta` with
//! `grad f(x_theta) = theta * grad f(mu) + (1 - theta) * grad f(q)` yields the bound
//! `d(x_theta, q) + lambda * (d(x_theta, mu) - R)` with `lambda = theta / (1 - theta)`.
//! Bisection on `theta` tightens it.

use alloc::boxed::Box;
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
use crate::space::{BregmanFamily, VectorData};

const LLOYD_ITERS: usize = 10;
const BISECT_TOL: f64 = 1e-6;
const BISECT_ITERS: usize = 100;
const MAX_DEPTH: usize = 256;
/// Relative slack absorbing the rounding of a narrowed (single-precision) distance.
const PRUNE_SLACK: f64 = 1e-6;

struct Ball {
    center: Vec<f64>,
    grad_center: Vec<f64>,
    radius: f64,
}

enum Node {
    Leaf(Ball, Bucket),
    Inner(Ball, Box<Node>, Box<Node>),
}

impl Node {
    fn ball(&self) -> &Ball {
        match self {
            Node::Leaf(b, _) | Node::Inner(b, _, _) => b,
        }
    }

    fn members(&self, out: &mut Vec<IdType>) {
        match self {
            Node::Leaf(_, b) => out.extend_from_slice(b.ids()),
            Node::Inner(_, l, r) => {
                l.members(out);
                r.members(out);
            }
        }
    }
}

pub struct BbTree {
    data: Arc<DataSet>,
    family: BregmanFamily,
    root: Option<Node>,
    max_leaves: usize,
}

fn dense(v: Option<VectorData>) -> Result<Vec<f64>> {
    match v {
        Some(VectorData::Dense(v)) => Ok(v),
        _ => Err(Error::Unsupported("bbtree needs dense vectors".into())),
    }
}

struct Builder<'a> {
    ctx: &'a IndexContext,
    vecs: &'a [Vec<f64>],
    family: BregmanFamily,
    bucket: usize,
    chunk: bool,
}

impl Builder<'_> {
    fn ball(&self, ids: &[IdType]) -> Ball {
        let dim = self.vecs[ids[0] as usize].len();
        let mut center = alloc::vec![0.0; dim];
        for &i in ids {
            for (c, v) in center.iter_mut().zip(&self.vecs[i as usize]) {
                *c += v;
            }
        }
        for c in &mut center {
            *c /= ids.len() as f64;
        }
        let radius = ids
            .iter()
            .map(|&i| self.family.generator_div(&self.vecs[i as usize], &center))
            .fold(0.0, f64::max);
        let grad_center = center.iter().map(|&c| self.family.grad(c)).collect();
        Ball {
            center,
            grad_center,
            radius,
        }
    }

    fn node(&self, ids: Vec<IdType>, rng: &mut impl Rng, depth: usize) -> Node {
        let ball = self.ball(&ids);
        if ids.len() <= self.bucket || depth >= MAX_DEPTH {
            return Node::Leaf(ball, Bucket::new(ids, &self.ctx.data, self.chunk));
        }
        match self.split(&ids, rng) {
            Some((l, r)) => Node::Inner(
                ball,
                Box::new(self.node(l, rng, depth + 1)),
                Box::new(self.node(r, rng, depth + 1)),
            ),
            None => Node::Leaf(ball, Bucket::new(ids, &self.ctx.data, self.chunk)),
        }
    }

    /// Two-means split seeded by two random members with distinct vectors.
    fn split(&self, ids: &[IdType], rng: &mut impl Rng) -> Option<(Vec<IdType>, Vec<IdType>)> {
        let v = |i: IdType| &self.vecs[i as usize];
        let a = ids[rng.random_range(0..ids.len())];
        let mut b = None;
        for _ in 0..16 {
            let c = ids[rng.random_range(0..ids.len())];
            if v(c) != v(a) {
                b = Some(c);
                break;
            }
        }
        let b = match b {
            Some(b) => b,
            None => *ids.iter().find(|&&c| v(c) != v(a))?,
        };
        let mut centers = [v(a).clone(), v(b).clone()];
        let mut assign: Vec<bool> = Vec::new();
        for _ in 0..LLOYD_ITERS {
            let next: Vec<bool> = ids
                .iter()
                .map(|&i| {
                    self.family.generator_div(v(i), &centers[1]) < self.family.generator_div(v(i), &centers[0])
                })
                .collect();
            if next == assign {
                break;
            }
            assign = next;
            for (side, c) in centers.iter_mut().enumerate() {
                let members: Vec<&Vec<f64>> = ids
                    .iter()
                    .zip(&assign)
                    .filter(|(_, &s)| s == (side == 1))
                    .map(|(&i, _)| v(i))
                    .collect();
                if members.is_empty() {
                    continue;
                }
                for (k, x) in c.iter_mut().enumerate() {
                    *x = members.iter().map(|m| m[k]).sum::<f64>() / members.len() as f64;
                }
            }
        }
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for (&i, &s) in ids.iter().zip(&assign) {
            if s {
                r.push(i);
            } else {
                l.push(i);
            }
        }
        (!l.is_empty() && !r.is_empty()).then_some((l, r))
    }
}

/// Outcome of bounding a ball against the current search radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallBound {
    /// The ball cannot hold anything within the radius; carries the lower bound.
    Prune(f64),
    Visit,
}

/// Query data needed by the bound.
struct QueryVec {
    x: Vec<f64>,
    grad: Vec<f64>,
}

impl BbTree {
    /// Index-time: `bucketSize` (default 50), `chunkBucket` (default 1).
    pub fn build(ctx: &IndexContext, p: &mut ParamMap) -> Result<Self> {
        let bucket: usize = p.optional("bucketSize", 50usize)?;
        let chunk: bool = p.optional("chunkBucket", true)?;
        if bucket == 0 {
            return Err(Error::InvalidArgument("bucketSize must be at least 1".into()));
        }
        let family = ctx.space.bregman().ok_or_else(|| {
            Error::Unsupported(alloc::format!(
                "bbtree needs a left-query Bregman space, got '{}'",
                ctx.space.name()
            ))
        })?;
        let vecs = ctx
            .data
            .iter()
            .map(|r| dense(ctx.space.vector(r.view())))
            .collect::<Result<Vec<_>>>()?;
        let builder = Builder {
            ctx,
            vecs: &vecs,
            family,
            bucket,
            chunk,
        };
        let mut rng = ctx.rng();
        let root = (!vecs.is_empty()).then(|| builder.node((0..vecs.len() as IdType).collect(), &mut rng, 0));
        Ok(BbTree {
            data: ctx.data.clone(),
            family,
            root,
            max_leaves: UNLIMITED_LEAVES,
        })
    }

    /// Dual lower bound on `min d(x, q)` over the ball, evaluated until it decides against `radius`.
    /// Every divergence evaluated here is added to the query's distance count.
    fn bound(&self, ball: &Ball, qv: &QueryVec, radius: f64, q: &mut Query<'_>) -> BallBound {
        let fam = self.family;
        let mut evals = 1u64;
        if fam.generator_div(&qv.x, &ball.center) <= ball.radius {
            q.add_distance_count(evals);
            return BallBound::Visit;
        }
        let threshold = radius + PRUNE_SLACK * radius.abs();
        let mut x = alloc::vec![0.0; qv.x.len()];
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut best = 0.0f64;
        let mut outcome = BallBound::Visit;
        for _ in 0..BISECT_ITERS {
            let theta = 0.5 * (lo + hi);
            for k in 0..x.len() {
                x[k] = fam.grad_inv(theta * ball.grad_center[k] + (1.0 - theta) * qv.grad[k]);
            }
            let to_q = fam.generator_div(&x, &qv.x);
            let to_mu = fam.generator_div(&x, &ball.center);
            evals += 2;
            let lambda = theta / (1.0 - theta);
            let g = to_q + lambda * (to_mu - ball.radius);
            best = best.max(g);
            if best > threshold {
                outcome = BallBound::Prune(best);
                break;
            }
            if to_mu <= ball.radius {
                // x lies in the ball: the minimum is at most to_q
                if to_q <= radius {
                    break;
                }
                hi = theta;
            } else {
                lo = theta;
            }
            if hi - lo < BISECT_TOL {
                break;
            }
        }
        q.add_distance_count(evals);
        outcome
    }

    fn query_vec(&self, q: &Query<'_>) -> Result<QueryVec> {
        let x = dense(q.space().vector(q.object()))?;
        if x.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain("bbtree queries must be strictly positive".into()));
        }
        let grad = x.iter().map(|&v| self.family.grad(v)).collect();
        Ok(QueryVec { x, grad })
    }

    fn visit(
        &self,
        node: &Node,
        qv: &QueryVec,
        q: &mut Query<'_>,
        budget: &mut usize,
        pruned: &mut Option<&mut Vec<(Vec<IdType>, f64)>>,
    ) {
        if *budget == 0 {
            return;
        }
        match node {
            Node::Leaf(_, b) => {
                *budget -= 1;
                b.scan(&self.data, q);
            }
            Node::Inner(_, l, r) => {
                let mut kids = [(l.as_ref(), self.order_key(l, qv, q)), (r.as_ref(), self.order_key(r, qv, q))];
                // ball whose center is relatively nearer goes first
                if kids[1].1 < kids[0].1 {
                    kids.swap(0, 1);
                }
                for (child, _) in kids {
                    let radius = q.radius();
                    match self.bound(child.ball(), qv, radius, q) {
                        BallBound::Visit => self.visit(child, qv, q, budget, pruned),
                        BallBound::Prune(_) => {
                            if let Some(list) = pruned.as_deref_mut() {
                                let mut m = Vec::new();
                                child.members(&mut m);
                                list.push((m, radius));
                            }
                        }
                    }
                }
            }
        }
    }

    /// Cheap ordering key: divergence from the query to the ball center minus its radius.
    fn order_key(&self, node: &Node, qv: &QueryVec, q: &mut Query<'_>) -> f64 {
        let b = node.ball();
        q.add_distance_count(1);
        self.family.generator_div(&qv.x, &b.center) - b.radius
    }

    fn run(&self, q: &mut Query<'_>, mut pruned: Option<&mut Vec<(Vec<IdType>, f64)>>) -> Result<usize> {
        let Some(root) = &self.root else {
            return Ok(0);
        };
        let qv = self.query_vec(q)?;
        let mut budget = self.max_leaves;
        self.visit(root, &qv, q, &mut budget, &mut pruned);
        Ok(self.max_leaves - budget)
    }

    /// Search that also reports each pruned ball's members with the radius at prune time.
    pub fn search_audit(&self, q: &mut Query<'_>) -> Result<(usize, Vec<(Vec<IdType>, f64)>)> {
        let mut pruned = Vec::new();
        let leaves = self.run(q, Some(&mut pruned))?;
        Ok((leaves, pruned))
    }

    /// Bound of the root ball against `radius`, for diagnostics.
    pub fn root_bound(&self, q: &mut Query<'_>, radius: f64) -> Result<BallBound> {
        let qv = self.query_vec(q)?;
        match &self.root {
            Some(r) => Ok(self.bound(r.ball(), &qv, radius, q)),
            None => Ok(BallBound::Visit),
        }
    }
}

fn node_size(n: &Node) -> usize {
    let b = n.ball();
    let own = core::mem::size_of::<Node>() + 16 * b.center.len();
    own + match n {
        Node::Leaf(_, bucket) => bucket.size_bytes(),
        Node::Inner(_, l, r) => node_size(l) + node_size(r),
    }
}

impl Index for BbTree {
    fn method(&self) -> &'static str {
        "bbtree"
    }

    fn search(&self, q: &mut Query<'_>) -> Result<()> {
        self.run(q, None).map(|_| ())
    }

    /// Query-time: `maxLeavesToVisit`.
    fn set_query_time_params(&mut self, p: &mut ParamMap) -> Result<()> {
        self.max_leaves = p.optional("maxLeavesToVisit", UNLIMITED_LEAVES)?;
        Ok(())
    }

    fn size_bytes(&self) -> usize {
        self.root.as_ref().map_or(0, node_size)
    }
}
