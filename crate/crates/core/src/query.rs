//! Query objects: they proxy every search-time distance evaluation and collect results.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;

pub use crate::math::Neighbor;
use crate::object::{IdType, ObjView};
use crate::space::Space;

/// Which argument slot the data object takes in `d(., .)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueryOrientation {
    /// `d(data, query)`.
    #[default]
    Left,
    /// `d(query, data)`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QueryKind {
    Knn(usize),
    Range(f64),
}

#[derive(Debug, Clone)]
enum Results {
    Knn { k: usize, heap: BinaryHeap<Neighbor> },
    Range { r: f64, found: Vec<Neighbor> },
}

/// A k-NN or range query bound to a space.
pub struct Query<'a> {
    space: &'a dyn Space,
    object: ObjView<'a>,
    orientation: QueryOrientation,
    results: Results,
    dist_count: u64,
}

impl<'a> Query<'a> {
    /// k-NN query; `k` must be at least 1.
    pub fn knn(space: &'a dyn Space, object: ObjView<'a>, k: usize) -> Self {
        assert!(k >= 1, "k must be at least 1");
        Query {
            space,
            object,
            orientation: QueryOrientation::Left,
            results: Results::Knn {
                k,
                heap: BinaryHeap::with_capacity(k + 1),
            },
            dist_count: 0,
        }
    }

    /// Range query returning every object with `d <= r`.
    pub fn range(space: &'a dyn Space, object: ObjView<'a>, r: f64) -> Self {
        Query {
            space,
            object,
            orientation: QueryOrientation::Left,
            results: Results::Range { r, found: Vec::new() },
            dist_count: 0,
        }
    }

    pub fn new(space: &'a dyn Space, object: ObjView<'a>, kind: QueryKind) -> Self {
        match kind {
            QueryKind::Knn(k) => Self::knn(space, object, k),
            QueryKind::Range(r) => Self::range(space, object, r),
        }
    }

    pub fn with_orientation(mut self, o: QueryOrientation) -> Self {
        self.orientation = o;
        self
    }

    /// Same query object, kind and orientation with empty results and counter.
    pub fn fresh(&self) -> Query<'a> {
        Query::new(self.space, self.object, self.kind()).with_orientation(self.orientation)
    }

    pub fn orientation(&self) -> QueryOrientation {
        self.orientation
    }

    pub fn kind(&self) -> QueryKind {
        match &self.results {
            Results::Knn { k, .. } => QueryKind::Knn(*k),
            Results::Range { r, .. } => QueryKind::Range(*r),
        }
    }

    pub fn object(&self) -> ObjView<'a> {
        self.object
    }

    pub fn space(&self) -> &'a dyn Space {
        self.space
    }

    /// Distance between a data object and the query, counted.
    #[inline]
    pub fn distance_to(&mut self, obj: ObjView<'_>) -> f64 {
        self.dist_count += 1;
        match self.orientation {
            QueryOrientation::Left => self.space.distance(obj, self.object),
            QueryOrientation::Right => self.space.distance(self.object, obj),
        }
    }

    /// Distance between two arbitrary objects, counted.
    #[inline]
    pub fn distance(&mut self, a: ObjView<'_>, b: ObjView<'_>) -> f64 {
        self.dist_count += 1;
        self.space.distance(a, b)
    }

    /// Accounts for distance-like evaluations performed outside the proxy.
    pub fn add_distance_count(&mut self, n: u64) {
        self.dist_count += n;
    }

    pub fn distance_count(&self) -> u64 {
        self.dist_count
    }

    /// Current pruning radius: k-th best distance (`+inf` until k results) or the fixed range.
    #[inline]
    pub fn radius(&self) -> f64 {
        match &self.results {
            Results::Knn { k, heap } => {
                if heap.len() < *k {
                    f64::INFINITY
                } else {
                    heap.peek().map_or(f64::INFINITY, |n| n.dist.0)
                }
            }
            Results::Range { r, .. } => *r,
        }
    }

    /// Offers a candidate; returns whether it was kept.
    #[inline]
    pub fn check_and_add(&mut self, id: IdType, dist: f64) -> bool {
        let cand = Neighbor::new(dist, id);
        match &mut self.results {
            Results::Knn { k, heap } => {
                if heap.len() < *k {
                    heap.push(cand);
                    true
                } else if heap.peek().is_some_and(|top| cand < *top) {
                    heap.pop();
                    heap.push(cand);
                    true
                } else {
                    false
                }
            }
            Results::Range { r, found } => {
                if dist <= *r {
                    found.push(cand);
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Merges the results and distance count of another query over disjoint or overlapping data.
    /// Entries with an id already present are skipped.
    pub fn absorb(&mut self, other: &Query<'_>) {
        self.dist_count += other.dist_count;
        let present: Vec<IdType> = self.results().iter().map(|n| n.id).collect();
        for n in other.results() {
            if !present.contains(&n.id) {
                self.check_and_add(n.id, n.dist.0);
            }
        }
    }

    pub fn result_count(&self) -> usize {
        match &self.results {
            Results::Knn { heap, .. } => heap.len(),
            Results::Range { found, .. } => found.len(),
        }
    }

    /// Results sorted by `(distance, id)`.
    pub fn results(&self) -> Vec<Neighbor> {
        let mut v: Vec<Neighbor> = match &self.results {
            Results::Knn { heap, .. } => heap.iter().copied().collect(),
            Results::Range { found, .. } => found.clone(),
        };
        v.sort_unstable();
        v
    }

    /// Result ids in `(distance, id)` order.
    pub fn result_ids(&self) -> Vec<IdType> {
        self.results().into_iter().map(|n| n.id).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{create_space, DistType};

    #[test]
    fn knn_heap() {
        let s = create_space("l2", DistType::Double).unwrap();
        let q = s.from_dense(0, -1, &[0.0]).unwrap();
        let mut query = Query::knn(&*s, q.view(), 2);
        assert_eq!(query.radius(), f64::INFINITY);
        for (id, d) in [(0, 5.0), (1, 3.0), (2, 4.0)] {
            query.check_and_add(id, d);
        }
        assert_eq!(query.result_ids(), [1, 2]);
        assert_eq!(query.radius(), 4.0);
    }

    #[test]
    fn ties_and_range() {
        let s = create_space("l2", DistType::Double).unwrap();
        let q = s.from_dense(0, -1, &[0.0]).unwrap();
        let mut query = Query::knn(&*s, q.view(), 1);
        query.check_and_add(9, 1.0);
        query.check_and_add(2, 1.0);
        assert_eq!(query.result_ids(), [2]);
        let mut r = Query::range(&*s, q.view(), 1.0);
        assert!(r.check_and_add(3, 1.0));
        assert!(!r.check_and_add(4, 1.0000001));
        assert_eq!(r.radius(), 1.0);
    }

    #[test]
    fn counting_and_orientation() {
        let s = create_space("kldivgenfast", DistType::Double).unwrap();
        let q = s.from_dense(0, -1, &[0.2, 0.8]).unwrap();
        let a = s.from_dense(1, -1, &[0.6, 0.4]).unwrap();
        let mut left = Query::knn(&*s, q.view(), 1);
        let dl = left.distance_to(a.view());
        left.distance(a.view(), q.view());
        assert_eq!(left.distance_count(), 2);
        assert_eq!(dl, s.distance(a.view(), q.view()));
        let mut right = Query::knn(&*s, q.view(), 1).with_orientation(QueryOrientation::Right);
        assert_eq!(right.distance_to(a.view()), s.distance(q.view(), a.view()));
        assert_ne!(dl, s.distance(q.view(), a.view()));
    }
}
