//! Proximity graphs and the best-first layer search they share.

pub mod hnsw;
pub mod swgraph;

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math::Neighbor;

/// Versioned visit marks: clearing is a counter bump.
pub struct VisitedList {
    marks: Vec<u32>,
    version: u32,
}

impl VisitedList {
    pub fn new(n: usize) -> Self {
        VisitedList {
            marks: alloc::vec![0; n],
            version: 0,
        }
    }

    pub fn reset(&mut self) {
        self.version = self.version.wrapping_add(1);
        if self.version == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.version = 1;
        }
    }

    /// Marks `i`; returns whether it was unmarked.
    #[inline]
    pub fn insert(&mut self, i: u32) -> bool {
        let m = &mut self.marks[i as usize];
        if *m == self.version {
            false
        } else {
            *m = self.version;
            true
        }
    }
}

/// Reusable scratch lists shared by concurrent searches.
pub struct VisitedPool {
    n: usize,
    free: spin::Mutex<Vec<VisitedList>>,
}

impl VisitedPool {
    pub fn new(n: usize) -> Self {
        VisitedPool {
            n,
            free: spin::Mutex::new(Vec::new()),
        }
    }

    pub fn with<R>(&self, f: impl FnOnce(&mut VisitedList) -> R) -> R {
        let mut v = self.free.lock().pop().unwrap_or_else(|| VisitedList::new(self.n));
        v.reset();
        let r = f(&mut v);
        self.free.lock().push(v);
        r
    }
}

/// Best-first search over one graph layer.
///
/// `dist(i)` is the distance from node `i` to the target and `neighbors(i, buf)` fills `buf`
/// with the adjacency of `i`. Entry points must already carry their distances. Returns up to
/// `ef` closest discovered nodes, ascending.
pub fn search_layer(
    entries: &[Neighbor],
    ef: usize,
    visited: &mut VisitedList,
    mut dist: impl FnMut(u32) -> f64,
    mut neighbors: impl FnMut(u32, &mut Vec<u32>),
) -> Vec<Neighbor> {
    let ef = ef.max(1);
    let mut candidates: BinaryHeap<Reverse<Neighbor>> = BinaryHeap::new();
    let mut results: BinaryHeap<Neighbor> = BinaryHeap::new();
    for &e in entries {
        if visited.insert(e.id) {
            candidates.push(Reverse(e));
            results.push(e);
            if results.len() > ef {
                results.pop();
            }
        }
    }
    let mut buf = Vec::new();
    while let Some(Reverse(c)) = candidates.pop() {
        if results.len() >= ef && c.dist > results.peek().unwrap().dist {
            break;
        }
        buf.clear();
        neighbors(c.id, &mut buf);
        for &n in &buf {
            if !visited.insert(n) {
                continue;
            }
            let d = dist(n);
            if results.len() < ef || d < results.peek().unwrap().distance() {
                let nb = Neighbor::new(d, n);
                candidates.push(Reverse(nb));
                results.push(nb);
                if results.len() > ef {
                    results.pop();
                }
            }
        }
    }
    results.into_sorted_vec()
}

/// Independent RNG stream for item `i` of a seeded process.
pub(crate) fn stream_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i);
    r
}

/// Seed for query-time randomness, fixed per (index, query object).
pub(crate) fn query_seed(seed: u64, bytes: &[u8]) -> u64 {
    // FNV-1a
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Runs `f(i)` for every `i` in `0..n`, claiming indices in order from a shared counter.
pub(crate) fn for_each_ordered(n: usize, threads: usize, f: impl Fn(usize) + Sync) {
    #[cfg(feature = "std")]
    if threads > 1 && n > 1 {
        use core::sync::atomic::{AtomicUsize, Ordering};
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..threads.min(n) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= n {
                        break;
                    }
                    f(i);
                });
            }
        });
        return;
    }
    let _ = threads;
    (0..n).for_each(f);
}
