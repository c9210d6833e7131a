//! Mappings from a space into low-dimensional dense vectors.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::index::perm::permutation;
use crate::math;
use crate::object::{DataSet, ObjView, ObjectRecord};
use crate::query::Query;
use crate::space::{Space, VectorData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjKind {
    /// Random orthonormal directions (vector spaces only).
    Rand,
    /// Coordinates along lines through pivot pairs.
    FastMap,
    /// Distances to reference points.
    RandRefPt,
    /// Pivot ranks.
    Perm,
}

impl FromStr for ProjKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rand" => ProjKind::Rand,
            "fastmap" => ProjKind::FastMap,
            "randrefpt" => ProjKind::RandRefPt,
            "perm" => ProjKind::Perm,
            _ => return Err(Error::InvalidArgument(alloc::format!("unknown projection type '{s}'"))),
        })
    }
}

impl fmt::Display for ProjKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProjKind::Rand => "rand",
            ProjKind::FastMap => "fastmap",
            ProjKind::RandRefPt => "randrefpt",
            ProjKind::Perm => "perm",
        })
    }
}

enum Basis {
    /// `proj_dim` rows of length `source_dim`.
    Directions { rows: Vec<f64>, source_dim: usize },
    /// Pairs `(A_i, B_i)` with `d(A_i, B_i)`.
    Pairs(Vec<(ObjectRecord, ObjectRecord, f64)>),
    Pivots(Vec<ObjectRecord>),
}

pub struct Projection {
    kind: ProjKind,
    proj_dim: usize,
    interm_dim: usize,
    hash_seed: u64,
    basis: Basis,
}

/// 64-bit finalizer of splitmix64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sparse vector into `interm_dim` cells, summing colliding values.
pub fn hashing_trick(x: &[(u32, f64)], interm_dim: usize, seed: u64) -> Vec<f64> {
    assert!(interm_dim >= 1, "intermDim must be positive");
    let mut out = alloc::vec![0.0; interm_dim];
    for &(id, v) in x {
        out[(mix64(id as u64 ^ seed) % interm_dim as u64) as usize] += v;
    }
    out
}

fn random_directions(n: usize, dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut rows: Vec<f64> = Vec::with_capacity(n * dim);
    for i in 0..n {
        loop {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            // Only the first `dim` rows can be mutually orthogonal.
            if i < dim {
                for j in 0..i {
                    let prev = &rows[j * dim..(j + 1) * dim];
                    let c: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                    for (x, p) in v.iter_mut().zip(prev) {
                        *x -= c * p;
                    }
                }
            }
            let norm = math::sqrt(v.iter().map(|x| x * x).sum());
            if norm > 1e-8 {
                rows.extend(v.iter().map(|x| x / norm));
                break;
            }
        }
    }
    rows
}

impl Projection {
    /// Draws a projection of `kind` with `proj_dim` coordinates from a sample of the data.
    ///
    /// `interm_dim > 0` folds sparse vectors to that many cells before a random projection.
    pub fn new(
        kind: ProjKind,
        space: &dyn Space,
        data: &DataSet,
        proj_dim: usize,
        interm_dim: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if proj_dim == 0 {
            return Err(Error::InvalidArgument("projection dimension must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::InvalidArgument("cannot draw a projection from an empty data set".into()));
        }
        let hash_seed: u64 = rng.random();
        let need = if kind == ProjKind::FastMap { 2 * proj_dim } else { proj_dim };
        if kind != ProjKind::Rand && need > data.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "{kind} projection needs {need} pivots, data has {}",
                data.len()
            )));
        }
        let basis = match kind {
            ProjKind::Rand => {
                let source_dim = match space.vector(data.view(0)) {
                    None => {
                        return Err(Error::InvalidArgument(alloc::format!(
                            "random projections need a vector space, got '{}'",
                            space.name()
                        )))
                    }
                    Some(VectorData::Dense(v)) => v.len(),
                    Some(VectorData::Sparse(_)) if interm_dim > 0 => interm_dim,
                    Some(VectorData::Sparse(_)) => data
                        .iter()
                        .filter_map(|r| match space.vector(r.view()) {
                            Some(VectorData::Sparse(p)) => p.last().map(|e| e.0 as usize + 1),
                            _ => None,
                        })
                        .max()
                        .unwrap_or(1),
                };
                Basis::Directions {
                    rows: random_directions(proj_dim, source_dim, rng),
                    source_dim,
                }
            }
            ProjKind::FastMap => {
                let mut order = sample(rng, data.len(), data.len()).into_vec().into_iter();
                let mut pairs = Vec::with_capacity(proj_dim);
                while pairs.len() < proj_dim {
                    let (Some(a), Some(b)) = (order.next(), order.next()) else {
                        return Err(Error::InvalidArgument(
                            "not enough distinct point pairs for a fastmap projection".into(),
                        ));
                    };
                    let (a, b) = (data.get(a), data.get(b));
                    let d = space.distance(a.view(), b.view());
                    if d > 0.0 {
                        pairs.push((a.clone(), b.clone(), d));
                    }
                }
                Basis::Pairs(pairs)
            }
            ProjKind::RandRefPt | ProjKind::Perm => {
                let mut ids = sample(rng, data.len(), proj_dim).into_vec();
                ids.sort_unstable();
                Basis::Pivots(ids.into_iter().map(|i| data.get(i).clone()).collect())
            }
        };
        Ok(Projection {
            kind,
            proj_dim,
            interm_dim,
            hash_seed,
            basis,
        })
    }

    pub fn kind(&self) -> ProjKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.proj_dim
    }

    /// Orthonormalized rows of a random projection.
    pub fn directions(&self) -> Option<(&[f64], usize)> {
        match &self.basis {
            Basis::Directions { rows, source_dim } => Some((rows, *source_dim)),
            _ => None,
        }
    }

    pub fn pivots(&self) -> &[ObjectRecord] {
        match &self.basis {
            Basis::Pivots(p) => p,
            _ => &[],
        }
    }

    /// Projects a data object; distances are taken as `d(pivot, obj)`.
    pub fn project(&self, space: &dyn Space, obj: ObjView<'_>) -> Result<Vec<f64>> {
        self.project_with(space, obj, |a, b| space.distance(a, b))
    }

    /// Projects the query object, charging every distance to the query.
    pub fn project_query(&self, q: &mut Query<'_>) -> Result<Vec<f64>> {
        let obj = q.object();
        let space = q.space();
        self.project_with(space, obj, |p, _| q.distance_to(p))
    }

    fn project_with(
        &self,
        space: &dyn Space,
        obj: ObjView<'_>,
        mut dist: impl FnMut(ObjView<'_>, ObjView<'_>) -> f64,
    ) -> Result<Vec<f64>> {
        Ok(match &self.basis {
            Basis::Directions { rows, source_dim } => {
                let x = self.source_vector(space, obj, *source_dim)?;
                rows.chunks_exact(*source_dim)
                    .map(|r| x.iter().map(|&(i, v)| r[i] * v).sum())
                    .collect()
            }
            Basis::Pairs(pairs) => pairs
                .iter()
                .map(|(a, b, dab)| {
                    let dax = dist(a.view(), obj);
                    let dbx = dist(b.view(), obj);
                    (dax * dax + dab * dab - dbx * dbx) / (2.0 * dab)
                })
                .collect(),
            Basis::Pivots(pivots) => {
                let d: Vec<f64> = pivots.iter().map(|p| dist(p.view(), obj)).collect();
                match self.kind {
                    ProjKind::Perm => permutation(&d).into_iter().map(f64::from).collect(),
                    _ => d,
                }
            }
        })
    }

    /// Nonzero `(coordinate, value)` pairs of `obj` in the random-projection input space.
    fn source_vector(&self, space: &dyn Space, obj: ObjView<'_>, source_dim: usize) -> Result<Vec<(usize, f64)>> {
        match space.vector(obj) {
            Some(VectorData::Dense(v)) => {
                if v.len() != source_dim {
                    return Err(Error::DimensionMismatch(source_dim, v.len()));
                }
                Ok(v.into_iter().enumerate().collect())
            }
            Some(VectorData::Sparse(p)) if self.interm_dim > 0 => Ok(hashing_trick(&p, self.interm_dim, self.hash_seed)
                .into_iter()
                .enumerate()
                .filter(|e| e.1 != 0.0)
                .collect()),
            // Coordinates outside the sampled range have no basis component.
            Some(VectorData::Sparse(p)) => Ok(p
                .into_iter()
                .map(|(i, v)| (i as usize, v))
                .filter(|e| e.0 < source_dim)
                .collect()),
            None => Err(Error::InvalidArgument("object has no vector form".into())),
        }
    }

    pub fn size_bytes(&self) -> usize {
        match &self.basis {
            Basis::Directions { rows, .. } => rows.len() * 8,
            Basis::Pairs(p) => p.iter().map(|(a, b, _)| a.byte_len() + b.byte_len() + 8).sum(),
            Basis::Pivots(p) => p.iter().map(ObjectRecord::byte_len).sum(),
        }
    }
}
