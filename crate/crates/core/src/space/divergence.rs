//! Jensen-Shannon and Bregman divergences.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::space::Elem;

/// `ln v` for `v > 0`, `0` for `v == 0`.
#[inline]
pub fn log_or_zero(v: f64) -> f64 {
    if v > 0.0 {
        math::ln(v)
    } else {
        0.0
    }
}

/// Logarithms of `vals` with the zero slot convention.
pub fn precompute_logs(vals: &[f64]) -> Result<Vec<f64>> {
    vals.iter()
        .map(|&v| {
            if v < 0.0 {
                Err(Error::Domain(alloc::format!("negative element {v}")))
            } else {
                Ok(log_or_zero(v))
            }
        })
        .collect()
}

/// Tabulated `ln` over `[1, 2]` with linear interpolation.
#[derive(Debug, Clone)]
pub struct LogLookupTable {
    table: Vec<f64>,
    cells: f64,
}

/// Default number of grid points: `2^16` cells.
pub const DEFAULT_LOG_TABLE_POINTS: usize = (1 << 16) + 1;

impl LogLookupTable {
    /// `points` grid points spread uniformly over `[1, 2]`, endpoints included.
    pub fn new(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument("log table needs at least 2 grid points".into()));
        }
        let cells = (points - 1) as f64;
        let mut table: Vec<f64> = (0..points).map(|i| math::ln(1.0 + i as f64 / cells)).collect();
        table[0] = 0.0;
        table[points - 1] = core::f64::consts::LN_2;
        Ok(LogLookupTable { table, cells })
    }

    pub fn values(&self) -> &[f64] {
        &self.table
    }

    /// `ln v` for `v` in `[1, 2]`.
    #[inline]
    pub fn lookup(&self, v: f64) -> f64 {
        let t = (v - 1.0).clamp(0.0, 1.0) * self.cells;
        let last = self.table.len() - 2;
        let i = (t as usize).min(last);
        let frac = t - i as f64;
        let a = self.table[i];
        a + frac * (self.table[i + 1] - a)
    }
}

impl Default for LogLookupTable {
    fn default() -> Self {
        Self::new(DEFAULT_LOG_TABLE_POINTS).unwrap()
    }
}

#[inline]
fn xlogx(v: f64) -> f64 {
    if v > 0.0 {
        v * math::ln(v)
    } else {
        0.0
    }
}

/// Direct evaluation of the JS divergence.
pub fn js_slow<T: Elem>(x: &[T], y: &[T]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (a, b) = (a.to_f64(), b.to_f64());
        s += xlogx(a) + xlogx(b) - (a + b) * log_or_zero((a + b) * 0.5);
    }
    (0.5 * s).max(0.0)
}

/// JS divergence with precomputed logarithms of both operands.
pub fn js_fast<T: Elem>(x: &[T], lx: &[f64], y: &[T], ly: &[f64]) -> f64 {
    let mut own = 0.0;
    let mut mixed = 0.0;
    for i in 0..x.len() {
        let (a, b) = (x[i].to_f64(), y[i].to_f64());
        own += a * lx[i] + b * ly[i];
        let m = 0.5 * (a + b);
        mixed += xlogx(m);
    }
    (0.5 * own - mixed).max(0.0)
}

/// JS divergence where `ln(1 + min/max)` comes from the lookup table.
pub fn js_approx<T: Elem>(x: &[T], lx: &[f64], y: &[T], ly: &[f64], tbl: &LogLookupTable) -> f64 {
    let mut own = 0.0;
    let mut mixed = 0.0;
    for i in 0..x.len() {
        let (a, b) = (x[i].to_f64(), y[i].to_f64());
        own += a * lx[i] + b * ly[i];
        let (lo, hi, lhi) = if a >= b { (b, a, lx[i]) } else { (a, b, ly[i]) };
        if hi > 0.0 {
            let m = 0.5 * (a + b);
            mixed += m * (lhi - core::f64::consts::LN_2 + tbl.lookup(1.0 + lo / hi));
        }
    }
    (0.5 * own - mixed).max(0.0)
}

/// Evaluation strategy for log-based divergences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivMode {
    Slow,
    Fast,
    Approx,
}

fn check_nonneg(x: &[f64]) -> Result<()> {
    match x.iter().find(|&&v| v < 0.0) {
        Some(v) => Err(Error::Domain(alloc::format!("negative element {v}"))),
        None => Ok(()),
    }
}

/// Checked JS divergence. `tbl` is used only in approximate mode.
pub fn js_divergence(x: &[f64], y: &[f64], mode: DivMode, tbl: Option<&LogLookupTable>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    check_nonneg(x)?;
    check_nonneg(y)?;
    Ok(match mode {
        DivMode::Slow => js_slow(x, y),
        DivMode::Fast => js_fast(x, &precompute_logs(x)?, y, &precompute_logs(y)?),
        DivMode::Approx => {
            let owned;
            let tbl = match tbl {
                Some(t) => t,
                None => {
                    owned = LogLookupTable::default();
                    &owned
                }
            };
            js_approx(x, &precompute_logs(x)?, y, &precompute_logs(y)?, tbl)
        }
    })
}

pub fn js_metric(x: &[f64], y: &[f64], mode: DivMode, tbl: Option<&LogLookupTable>) -> Result<f64> {
    js_divergence(x, y, mode, tbl).map(math::sqrt)
}

/// Bregman divergence generators supported by the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BregmanFamily {
    /// `Σ x ln(x/y)`; inputs expected to be distributions.
    Kl,
    /// `Σ x ln(x/y) - x + y`.
    GenKl,
    /// `Σ x/y - ln(x/y) - 1`.
    ItakuraSaito,
}

impl BregmanFamily {
    /// `∇f` per coordinate of the generator behind the family (gen-KL serves KL too).
    #[inline]
    pub fn grad(&self, x: f64) -> f64 {
        match self {
            BregmanFamily::Kl | BregmanFamily::GenKl => math::ln(x),
            BregmanFamily::ItakuraSaito => -1.0 / x,
        }
    }

    /// Inverse of [`Self::grad`].
    #[inline]
    pub fn grad_inv(&self, g: f64) -> f64 {
        match self {
            BregmanFamily::Kl | BregmanFamily::GenKl => math::exp(g),
            BregmanFamily::ItakuraSaito => -1.0 / g,
        }
    }

    /// Divergence with an explicit generator, used by bounds where sums need not be 1.
    pub fn generator_div(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            BregmanFamily::Kl | BregmanFamily::GenKl => gen_kl_slow(x, y),
            BregmanFamily::ItakuraSaito => itakura_saito_slow(x, y),
        }
    }
}

/// Argument order of an asymmetric distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `d(x, y)` as written.
    Left,
    /// Arguments swapped: `d(y, x)`.
    Right,
}

#[inline]
pub fn kl_slow<T: Elem>(x: &[T], y: &[T]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let a = a.to_f64();
            if a > 0.0 {
                a * math::ln(a / b.to_f64())
            } else {
                0.0
            }
        })
        .sum()
}

#[inline]
pub fn gen_kl_slow<T: Elem>(x: &[T], y: &[T]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let (a, b) = (a.to_f64(), b.to_f64());
            let t = if a > 0.0 { a * math::ln(a / b) } else { 0.0 };
            t - a + b
        })
        .sum()
}

#[inline]
pub fn itakura_saito_slow<T: Elem>(x: &[T], y: &[T]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let r = a.to_f64() / b.to_f64();
            r - math::ln(r) - 1.0
        })
        .sum()
}

#[inline]
pub fn kl_fast<T: Elem>(x: &[T], lx: &[f64], _y: &[T], ly: &[f64]) -> f64 {
    (0..x.len()).map(|i| x[i].to_f64() * (lx[i] - ly[i])).sum()
}

#[inline]
pub fn gen_kl_fast<T: Elem>(x: &[T], lx: &[f64], y: &[T], ly: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| {
            let (a, b) = (x[i].to_f64(), y[i].to_f64());
            a * (lx[i] - ly[i]) - a + b
        })
        .sum()
}

#[inline]
pub fn itakura_saito_fast<T: Elem>(x: &[T], lx: &[f64], y: &[T], ly: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| x[i].to_f64() / y[i].to_f64() - (lx[i] - ly[i]) - 1.0)
        .sum()
}

/// Checked Bregman divergence in the requested family, mode and orientation.
pub fn bregman_div(
    x: &[f64],
    y: &[f64],
    family: BregmanFamily,
    mode: DivMode,
    orientation: Orientation,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    let (x, y) = match orientation {
        Orientation::Left => (x, y),
        Orientation::Right => (y, x),
    };
    check_nonneg(x)?;
    if let Some(v) = y.iter().find(|&&v| v <= 0.0) {
        return Err(Error::Domain(alloc::format!("non-positive element {v} in second argument")));
    }
    if family == BregmanFamily::ItakuraSaito {
        if let Some(v) = x.iter().find(|&&v| v <= 0.0) {
            return Err(Error::Domain(alloc::format!("non-positive element {v}")));
        }
    }
    let fast = mode != DivMode::Slow;
    let (lx, ly) = if fast {
        (precompute_logs(x)?, precompute_logs(y)?)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(match (family, fast) {
        (BregmanFamily::Kl, false) => kl_slow(x, y),
        (BregmanFamily::Kl, true) => kl_fast(x, &lx, y, &ly),
        (BregmanFamily::GenKl, false) => gen_kl_slow(x, y),
        (BregmanFamily::GenKl, true) => gen_kl_fast(x, &lx, y, &ly),
        (BregmanFamily::ItakuraSaito, false) => itakura_saito_slow(x, y),
        (BregmanFamily::ItakuraSaito, true) => itakura_saito_fast(x, &lx, y, &ly),
    })
}
