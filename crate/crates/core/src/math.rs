//! Float helpers routed through `libm` so the crate stays `no_std`.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// `ceil(frac * n)`, at least 1 when `frac > 0`, never more than `n`.
pub fn scan_count(frac: f64, n: usize) -> usize {
    if frac <= 0.0 || n == 0 {
        return 0;
    }
    let c = ceil(frac * n as f64) as usize;
    c.clamp(1, n)
}

/// Total order wrapper for distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `(distance, id)` pair ordered lexicographically; smaller id wins ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Neighbor {
    pub dist: OrdF64,
    pub id: u32,
}

impl Neighbor {
    #[inline]
    pub fn new(dist: f64, id: u32) -> Self {
        Neighbor {
            dist: OrdF64(dist),
            id,
        }
    }

    #[inline]
    pub fn distance(&self) -> f64 {
        self.dist.0
    }
}
