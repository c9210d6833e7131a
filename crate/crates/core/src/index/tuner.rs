//! Grid search with random restarts for the VP-tree pruning oracle.
//!
//! Candidate oracles are evaluated on bootstrap query sets drawn from a sample of
//! the data. Cost is the mean number of distance computations per query, and the
//! cheapest oracle whose mean recall reaches the target wins.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::index::vptree::{VpBuildParams, VpOracle, VpSearchParams, VpTree, UNLIMITED_LEAVES};
use crate::index::IndexContext;
use crate::math;
use crate::object::{DataSet, IdType};
use crate::params::ParamMap;
use crate::query::{Query, QueryKind};

/// Smallest data set the tuner accepts.
pub const MIN_TUNING_SET: usize = 2000;

const QUERY_SETS: usize = 3;
const QUERIES_PER_SET: usize = 200;
const RESTARTS: usize = 8;
/// Alphas are `2^(i / 2)` for `i` in this range, i.e. geometric steps over `[2^-4, 2^6]`.
const ALPHA_STEPS: (i32, i32) = (-8, 12);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TuneTarget {
    Knn(usize),
    Range(f64),
}

#[derive(Debug, Clone)]
pub struct TunerConfig {
    pub target: TuneTarget,
    pub desired_recall: f64,
    pub tune_qty: usize,
    pub min_exp: u32,
    pub max_exp: u32,
    pub build: VpBuildParams,
}

impl TunerConfig {
    pub fn read(p: &mut ParamMap, target: TuneTarget, build: VpBuildParams) -> Result<Self> {
        let desired_recall: f64 = p.required("desiredRecall")?;
        if !(desired_recall > 0.0 && desired_recall <= 1.0) {
            return Err(Error::InvalidArgument("desiredRecall must be in (0, 1]".into()));
        }
        let min_exp: u32 = p.optional("minExp", 1u64)? as u32;
        let max_exp: u32 = p.optional("maxExp", 1u64)? as u32;
        if min_exp > max_exp || min_exp == 0 {
            return Err(Error::InvalidArgument("need 1 <= minExp <= maxExp".into()));
        }
        if let TuneTarget::Knn(0) = target {
            return Err(Error::InvalidArgument("tuneK must be at least 1".into()));
        }
        Ok(TunerConfig {
            target,
            desired_recall,
            tune_qty: p.optional("tuneQty", 50_000usize)?,
            min_exp,
            max_exp,
            build,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneOutcome {
    pub oracle: VpOracle,
    pub recall: f64,
    /// Mean distance computations per query on the tuning sets.
    pub cost: f64,
}

struct QuerySet {
    tree: VpTree,
    queries: DataSet,
    gold: Vec<Vec<IdType>>,
}

struct Evaluator<'a> {
    ctx: &'a IndexContext,
    sets: Vec<QuerySet>,
    kind: QueryKind,
    memo: BTreeMap<(u32, i32, i32), (f64, f64)>,
}

fn alpha(i: i32) -> f64 {
    math::pow(2.0, i as f64 / 2.0)
}

impl Evaluator<'_> {
    /// `(recall, cost)` of the oracle at grid point `(exp, i, j)`.
    fn eval(&mut self, exp: u32, i: i32, j: i32) -> (f64, f64) {
        if let Some(v) = self.memo.get(&(exp, i, j)) {
            return *v;
        }
        let oracle = VpOracle {
            alpha_left: alpha(i),
            alpha_right: alpha(j),
            exp_left: exp as f64,
            exp_right: exp as f64,
        };
        let v = self.eval_oracle(&oracle);
        self.memo.insert((exp, i, j), v);
        v
    }

    fn eval_oracle(&self, oracle: &VpOracle) -> (f64, f64) {
        let sp = VpSearchParams {
            oracle: *oracle,
            max_leaves: UNLIMITED_LEAVES,
        };
        let (mut recall, mut cost, mut n) = (0.0, 0.0, 0usize);
        for set in &self.sets {
            for (qi, qrec) in set.queries.iter().enumerate() {
                let mut q = Query::new(&*self.ctx.space, qrec.view(), self.kind);
                set.tree.search(&mut q, &sp);
                recall += recall_of(&q.result_ids(), &set.gold[qi]);
                cost += q.distance_count() as f64;
                n += 1;
            }
        }
        (recall / n as f64, cost / n as f64)
    }

    /// Ordering key: feasible points by cost, infeasible ones after them by recall.
    fn key(&mut self, desired: f64, exp: u32, i: i32, j: i32) -> (u8, f64) {
        let (r, c) = self.eval(exp, i, j);
        if r >= desired {
            (0, c)
        } else {
            (1, -r)
        }
    }
}

fn recall_of(found: &[IdType], gold: &[IdType]) -> f64 {
    if gold.is_empty() {
        return 1.0;
    }
    let hit = found.iter().filter(|id| gold.contains(id)).count();
    hit as f64 / gold.len() as f64
}

fn less(a: (u8, f64), b: (u8, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Finds oracle parameters meeting `cfg.desired_recall` at the lowest cost.
pub fn tune(ctx: &IndexContext, cfg: &TunerConfig) -> Result<TuneOutcome> {
    let n = ctx.data.len();
    if n < MIN_TUNING_SET {
        return Err(Error::Tuning(alloc::format!(
            "need at least {MIN_TUNING_SET} records for tuning, have {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x7475_6e65);
    let sample_n = cfg.tune_qty.clamp(MIN_TUNING_SET, n);
    let mut sample_ids: Vec<usize> = sample(&mut rng, n, sample_n).into_vec();
    sample_ids.sort_unstable();
    let sampled = ctx.data.subset(&sample_ids);
    let qn = QUERIES_PER_SET.min(sample_n / 10);
    let kind = match cfg.target {
        TuneTarget::Knn(k) => QueryKind::Knn(k),
        TuneTarget::Range(r) => QueryKind::Range(r),
    };

    let mut sets = Vec::with_capacity(QUERY_SETS);
    for _ in 0..QUERY_SETS {
        let mut picked = alloc::vec![false; sample_n];
        for i in sample(&mut rng, sample_n, qn) {
            picked[i] = true;
        }
        let (qids, dids): (Vec<usize>, Vec<usize>) = (0..sample_n).partition(|&i| picked[i]);
        let data = Arc::new(sampled.subset(&dids));
        let queries = sampled.subset(&qids);
        let sub = IndexContext::new(ctx.space.clone(), data.clone(), rng.random());
        let tree = VpTree::build(&sub, cfg.build)?;
        let gold = queries
            .iter()
            .map(|qr| {
                let mut q = Query::new(&*ctx.space, qr.view(), kind);
                for r in data.iter() {
                    let d = q.distance_to(r.view());
                    q.check_and_add(r.id(), d);
                }
                q.result_ids()
            })
            .collect();
        sets.push(QuerySet {
            tree,
            queries,
            gold,
        });
    }

    let mut ev = Evaluator {
        ctx,
        sets,
        kind,
        memo: BTreeMap::new(),
    };
    let desired = cfg.desired_recall;
    let (lo, hi) = ALPHA_STEPS;
    let mut best: Option<(f64, u32, i32, i32)> = None;
    for exp in cfg.min_exp..=cfg.max_exp {
        let mut starts = alloc::vec![(0, 0)];
        for _ in 0..RESTARTS {
            starts.push((rng.random_range(lo..=hi), rng.random_range(lo..=hi)));
        }
        for (mut i, mut j) in starts {
            let mut cur = ev.key(desired, exp, i, j);
            loop {
                let mut next = None;
                for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)] {
                    let (ni, nj) = (i + di, j + dj);
                    if ni < lo || ni > hi || nj < lo || nj > hi {
                        continue;
                    }
                    let k = ev.key(desired, exp, ni, nj);
                    if less(k, cur) && next.is_none_or(|(bk, _, _)| less(k, bk)) {
                        next = Some((k, ni, nj));
                    }
                }
                match next {
                    Some((k, ni, nj)) => {
                        cur = k;
                        i = ni;
                        j = nj;
                    }
                    None => break,
                }
            }
            if cur.0 == 0 && best.is_none_or(|b| cur.1 < b.0) {
                best = Some((cur.1, exp, i, j));
            }
        }
    }
    let (cost, exp, i, j) = best.ok_or_else(|| {
        Error::Tuning(alloc::format!("no parameters reach recall {desired}"))
    })?;
    let recall = ev.eval(exp, i, j).0;
    Ok(TuneOutcome {
        oracle: VpOracle {
            alpha_left: alpha(i),
            alpha_right: alpha(j),
            exp_left: exp as f64,
            exp_right: exp as f64,
        },
        recall,
        cost,
    })
}
