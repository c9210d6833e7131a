//! Dot-product based distances: cosine and angular.

use crate::error::{Error, Result};
use crate::math;
use crate::space::Elem;

#[inline]
pub fn dot<T: Elem>(x: &[T], y: &[T]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.to_f64() * b.to_f64()).sum()
}

#[inline]
pub fn norm<T: Elem>(x: &[T]) -> f64 {
    math::sqrt(dot(x, x))
}

/// Sparse dot product by linear merge of the sorted id lists.
pub fn sparse_dot_merge<T: Elem>(xi: &[u32], xv: &[T], yi: &[u32], yv: &[T]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < xi.len() && j < yi.len() {
        match xi[i].cmp(&yi[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                acc += xv[i].to_f64() * yv[j].to_f64();
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// First position in `ids[from..]` whose value is `>= target`, by exponential then binary search.
#[inline]
fn gallop(ids: &[u32], from: usize, target: u32) -> usize {
    let mut step = 1;
    let mut lo = from;
    let mut hi = from;
    while hi < ids.len() && ids[hi] < target {
        lo = hi + 1;
        hi += step;
        step <<= 1;
    }
    let hi = hi.min(ids.len());
    lo + ids[lo..hi].partition_point(|&v| v < target)
}

/// Sparse dot product that gallops through the longer list. Products are summed in
/// increasing id order, so the result is bitwise identical to [`sparse_dot_merge`].
pub fn sparse_dot_gallop<T: Elem>(xi: &[u32], xv: &[T], yi: &[u32], yv: &[T]) -> f64 {
    let (si, sv, li, lv, short_is_x) = if xi.len() <= yi.len() {
        (xi, xv, yi, yv, true)
    } else {
        (yi, yv, xi, xv, false)
    };
    let mut acc = 0.0;
    let mut pos = 0;
    for (k, &id) in si.iter().enumerate() {
        pos = gallop(li, pos, id);
        if pos >= li.len() {
            break;
        }
        if li[pos] == id {
            // keep operand order x*y so both kernels round identically
            acc += if short_is_x {
                sv[k].to_f64() * lv[pos].to_f64()
            } else {
                lv[pos].to_f64() * sv[k].to_f64()
            };
            pos += 1;
        }
    }
    acc
}

/// `1 - <x,y>/(|x||y|)` from precomputed pieces, clamped to `[0, 2]`.
#[inline]
pub fn cosine_from_parts(dot: f64, nx: f64, ny: f64) -> f64 {
    let c = dot / (nx * ny);
    (1.0 - c.clamp(-1.0, 1.0)).clamp(0.0, 2.0)
}

/// Angle derived from the cosine distance.
#[inline]
pub fn angular_from_cosine(cos_dist: f64) -> f64 {
    math::acos((1.0 - cos_dist).clamp(-1.0, 1.0))
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::Domain("cosine of a zero-norm vector".into()));
    }
    Ok((nx, ny))
}

pub fn dist_cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    let (nx, ny) = check_pair(x, y)?;
    Ok(cosine_from_parts(dot(x, y), nx, ny))
}

pub fn dist_angular(x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(angular_from_cosine(dist_cosine(x, y)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((dist_cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(dist_cosine(&[1.0, 2.0], &[2.0, 4.0]).unwrap().abs() < 1e-12);
        let a = dist_angular(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((a - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(matches!(dist_cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn gallop_matches_merge() {
        let xi = [1u32, 4, 9, 10, 200, 300];
        let xv = [0.1f32, 0.2, 0.3, 0.4, 0.5, 0.6];
        let yi = [4u32, 300];
        let yv = [0.7f32, 0.9];
        let m = sparse_dot_merge(&xi, &xv, &yi, &yv);
        assert_eq!(m.to_bits(), sparse_dot_gallop(&xi, &xv, &yi, &yv).to_bits());
        assert_eq!(
            sparse_dot_merge(&yi, &yv, &xi, &xv).to_bits(),
            sparse_dot_gallop(&yi, &yv, &xi, &xv).to_bits()
        );
        assert_eq!(sparse_dot_gallop::<f32>(&[], &[], &xi, &xv), 0.0);
    }

    #[test]
    fn gallop_positions() {
        let ids = [1u32, 3, 5, 7, 9, 11, 13];
        for t in 0..15 {
            let want = ids.partition_point(|&v| v < t);
            assert_eq!(gallop(&ids, 0, t), want);
        }
        assert_eq!(gallop(&ids, 3, 8), 4);
    }
}
