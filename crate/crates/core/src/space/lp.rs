//! Minkowski distances over dense and sparse vectors.

use crate::error::{Error, Result};
use crate::math;
use crate::space::Elem;

/// Exponent plan for `|d|^p`: an integer power followed by a chain of square roots
/// when `p` has at most five binary fraction digits, general `pow` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowPlan {
    Dyadic { int_part: u32, frac_bits: u8 },
    General(f64),
}

const MAX_FRAC_DIGITS: u32 = 5;

impl PowPlan {
    pub fn new(p: f64) -> Self {
        let scaled = p * (1u32 << MAX_FRAC_DIGITS) as f64;
        if p > 0.0 && p < 1e6 && math::floor(scaled) == scaled {
            let s = scaled as u64;
            PowPlan::Dyadic {
                int_part: (s >> MAX_FRAC_DIGITS) as u32,
                frac_bits: (s & ((1 << MAX_FRAC_DIGITS) - 1)) as u8,
            }
        } else {
            PowPlan::General(p)
        }
    }

    #[inline]
    pub fn apply(&self, base: f64) -> f64 {
        match *self {
            PowPlan::General(p) => math::pow(base, p),
            PowPlan::Dyadic { int_part, frac_bits } => {
                let mut res = 1.0;
                for _ in 0..int_part {
                    res *= base;
                }
                let mut root = base;
                // bit 4 of frac_bits is the 1/2 digit, bit 0 the 1/32 digit
                for k in (0..MAX_FRAC_DIGITS).rev() {
                    if frac_bits & ((2 << k) - 1) == 0 {
                        break;
                    }
                    root = math::sqrt(root);
                    if frac_bits & (1 << k) != 0 {
                        res *= root;
                    }
                }
                res
            }
        }
    }
}

#[inline]
pub fn l1<T: Elem>(x: &[T], y: &[T]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| math::abs(a.to_f64() - b.to_f64()))
        .sum()
}

#[inline]
pub fn l2_sqr<T: Elem>(x: &[T], y: &[T]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a.to_f64() - b.to_f64();
            d * d
        })
        .sum()
}

#[inline]
pub fn l2<T: Elem>(x: &[T], y: &[T]) -> f64 {
    math::sqrt(l2_sqr(x, y))
}

#[inline]
pub fn linf<T: Elem>(x: &[T], y: &[T]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| math::abs(a.to_f64() - b.to_f64()))
        .fold(0.0, f64::max)
}

/// Generic `p`; `plan` must come from `PowPlan::new(p)`.
#[inline]
pub fn lp_with_plan<T: Elem>(x: &[T], y: &[T], p: f64, plan: &PowPlan) -> f64 {
    let s: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| plan.apply(math::abs(a.to_f64() - b.to_f64())))
        .sum();
    math::pow(s, 1.0 / p)
}

/// Order of a Minkowski distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpOrder {
    One,
    Two,
    Inf,
    General(f64),
}

impl LpOrder {
    pub fn from_p(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(LpOrder::Inf)
        } else if !(p > 0.0) || !p.is_finite() {
            Err(Error::InvalidArgument(alloc::format!("lp requires p > 0, got {p}")))
        } else if p == 1.0 {
            Ok(LpOrder::One)
        } else if p == 2.0 {
            Ok(LpOrder::Two)
        } else {
            Ok(LpOrder::General(p))
        }
    }
}

/// Checked dense Lp distance (`p = f64::INFINITY` for Chebyshev).
pub fn dist_lp(x: &[f64], y: &[f64], p: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    Ok(match LpOrder::from_p(p)? {
        LpOrder::One => l1(x, y),
        LpOrder::Two => l2(x, y),
        LpOrder::Inf => linf(x, y),
        LpOrder::General(p) => lp_with_plan(x, y, p, &PowPlan::new(p)),
    })
}

/// Walks the union of two index-sorted sparse vectors, calling `f(|x_i - y_i|)`.
#[inline]
fn sparse_union_diffs<T: Elem>(
    xi: &[u32],
    xv: &[T],
    yi: &[u32],
    yv: &[T],
    mut f: impl FnMut(f64),
) {
    let (mut i, mut j) = (0, 0);
    while i < xi.len() && j < yi.len() {
        match xi[i].cmp(&yi[j]) {
            core::cmp::Ordering::Less => {
                f(math::abs(xv[i].to_f64()));
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                f(math::abs(yv[j].to_f64()));
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                f(math::abs(xv[i].to_f64() - yv[j].to_f64()));
                i += 1;
                j += 1;
            }
        }
    }
    for v in &xv[i..] {
        f(math::abs(v.to_f64()));
    }
    for v in &yv[j..] {
        f(math::abs(v.to_f64()));
    }
}

pub fn sparse_lp<T: Elem>(
    xi: &[u32],
    xv: &[T],
    yi: &[u32],
    yv: &[T],
    order: LpOrder,
    plan: &PowPlan,
) -> f64 {
    let mut acc = 0.0;
    match order {
        LpOrder::One => sparse_union_diffs(xi, xv, yi, yv, |d| acc += d),
        LpOrder::Two => {
            sparse_union_diffs(xi, xv, yi, yv, |d| acc += d * d);
            acc = math::sqrt(acc);
        }
        LpOrder::Inf => sparse_union_diffs(xi, xv, yi, yv, |d| acc = f64::max(acc, d)),
        LpOrder::General(p) => {
            sparse_union_diffs(xi, xv, yi, yv, |d| acc += plan.apply(d));
            acc = math::pow(acc, 1.0 / p);
        }
    }
    acc
}
