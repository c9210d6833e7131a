//! Signature Quadratic Form Distance.

use crate::math;
use crate::space::Elem;

/// Dimension of a signature centroid.
pub const CENTROID_DIM: usize = 7;
/// Values stored per cluster: centroid followed by weight.
pub const CLUSTER_STRIDE: usize = CENTROID_DIM + 1;

/// Similarity transform applied to centroid distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqfdFunc {
    Minus,
    Heuristic(f64),
    Gaussian(f64),
}

impl SqfdFunc {
    #[inline]
    pub fn similarity(&self, d: f64) -> f64 {
        match *self {
            SqfdFunc::Minus => -d,
            SqfdFunc::Heuristic(alpha) => 1.0 / (alpha + d),
            SqfdFunc::Gaussian(alpha) => math::exp(-alpha * d * d),
        }
    }
}

#[inline]
fn centroid_dist<T: Elem>(a: &[T], b: &[T]) -> f64 {
    let mut s = 0.0;
    for k in 0..CENTROID_DIM {
        let d = a[k].to_f64() - b[k].to_f64();
        s += d * d;
    }
    math::sqrt(s)
}

/// Quadratic form over the concatenated weights `(w_a, -w_b)`, before the square root.
pub fn sqfd_form<T: Elem>(a: &[T], b: &[T], func: SqfdFunc) -> f64 {
    let na = a.len() / CLUSTER_STRIDE;
    let nb = b.len() / CLUSTER_STRIDE;
    let cluster = |i: usize| -> (&[T], f64) {
        let (src, k, sign) = if i < na { (a, i, 1.0) } else { (b, i - na, -1.0) };
        let c = &src[k * CLUSTER_STRIDE..(k + 1) * CLUSTER_STRIDE];
        (&c[..CENTROID_DIM], sign * c[CENTROID_DIM].to_f64())
    };
    let n = na + nb;
    let mut q = 0.0;
    for i in 0..n {
        let (ci, wi) = cluster(i);
        q += wi * wi * func.similarity(0.0);
        for j in i + 1..n {
            let (cj, wj) = cluster(j);
            q += 2.0 * wi * wj * func.similarity(centroid_dist(ci, cj));
        }
    }
    q
}

/// `sqrt(max(0, form))`. Radicands below `-1e-9` indicate a non-definite transform; they clamp to 0.
pub fn sqfd<T: Elem>(a: &[T], b: &[T], func: SqfdFunc) -> f64 {
    math::sqrt(sqfd_form(a, b, func).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(c: [f64; 7], w: f64) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..7].copy_from_slice(&c);
        out[7] = w;
        out
    }

    #[test]
    fn examples() {
        let a = sig([0.0; 7], 1.0);
        let mut c = [0.0; 7];
        c[2] = 3.0;
        let b = sig(c, 1.0);
        let alpha = 0.1;
        let want = math::sqrt(2.0 - 2.0 * math::exp(-alpha * 9.0));
        assert!((sqfd(&a, &b, SqfdFunc::Gaussian(alpha)) - want).abs() < 1e-12);
        assert_eq!(sqfd(&a, &a, SqfdFunc::Minus), 0.0);
        assert_eq!(sqfd(&a, &a, SqfdFunc::Gaussian(1.0)), 0.0);
        assert!(sqfd(&a, &a, SqfdFunc::Heuristic(1.0)).abs() < 1e-12);
        // minus over one cluster each: 2 * d
        assert!((sqfd(&a, &b, SqfdFunc::Minus) - math::sqrt(6.0)).abs() < 1e-12);
    }
}
