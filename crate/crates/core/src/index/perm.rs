//! Pivot selection and permutation utilities.

use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::index::IndexContext;
use crate::object::{ObjView, ObjectRecord};
use crate::query::Query;
use crate::space::Space;

/// `num` pivots: the externally supplied ones when present, otherwise distinct random data points.
pub fn select_pivots(ctx: &IndexContext, num: usize, rng: &mut impl Rng) -> Result<Vec<ObjectRecord>> {
    if num == 0 {
        return Err(Error::InvalidArgument("numPivot must be at least 1".into()));
    }
    if let Some(ext) = &ctx.pivots {
        if ext.len() != num {
            return Err(Error::InvalidArgument(alloc::format!(
                "pivot file holds {} pivots, numPivot is {num}",
                ext.len()
            )));
        }
        return Ok(ext.clone());
    }
    if num > ctx.data.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "numPivot {num} exceeds the data size {}",
            ctx.data.len()
        )));
    }
    let mut ids = sample(rng, ctx.data.len(), num).into_vec();
    ids.sort_unstable();
    Ok(ids.into_iter().map(|i| ctx.data.get(i).clone()).collect())
}

/// Index-time distances `d(pivot, obj)`.
pub fn pivot_distances(space: &dyn Space, pivots: &[ObjectRecord], obj: ObjView<'_>) -> Vec<f64> {
    pivots.iter().map(|p| space.distance(p.view(), obj)).collect()
}

/// Query-side pivot distances, each counted by the query.
pub fn query_pivot_distances(q: &mut Query<'_>, pivots: &[ObjectRecord]) -> Vec<f64> {
    pivots.iter().map(|p| q.distance_to(p.view())).collect()
}

/// Pivot indices ordered by increasing distance; ties go to the smaller index.
pub fn pivot_order(dists: &[f64]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..dists.len() as u32).collect();
    order.sort_by(|&a, &b| dists[a as usize].total_cmp(&dists[b as usize]).then(a.cmp(&b)));
    order
}

/// The `m` closest pivots in increasing distance order.
pub fn closest_pivots(dists: &[f64], m: usize) -> Vec<u32> {
    let mut o = pivot_order(dists);
    o.truncate(m);
    o
}

/// `positions[i]` = 1-based rank of pivot `i`.
pub fn permutation(dists: &[f64]) -> Vec<u32> {
    let mut pos = alloc::vec![0u32; dists.len()];
    for (rank, &p) in pivot_order(dists).iter().enumerate() {
        pos[p as usize] = rank as u32 + 1;
    }
    pos
}

/// Ranks `>= threshold` become ones.
pub fn binarize(perm: &[u32], threshold: u32) -> Vec<bool> {
    perm.iter().map(|&r| r >= threshold).collect()
}

/// Packs a binarized permutation into words.
pub fn binarize_packed(perm: &[u32], threshold: u32) -> Vec<u64> {
    crate::space::bits::pack_bits(&binarize(perm, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(permutation(&[0.5, 0.1, 0.9]), [2, 1, 3]);
        assert_eq!(binarize(&[2, 1, 3], 2), [true, false, true]);
        assert_eq!(permutation(&[0.3, 0.0, 0.3]), [2, 1, 3]);
        assert_eq!(closest_pivots(&[0.5, 0.1, 0.9], 2), [1, 0]);
    }
}
