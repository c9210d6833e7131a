//! Spaces: distance functions plus the object (de)serialization they imply.
//!
//! Each space is created from a mnemonic such as `l2`, `lp:p=0.5` or `kldivgenfast`
//! by [`create_space`]. Distances are evaluated in `f64` and then narrowed to the
//! space's [`DistType`].

pub mod bits;
pub mod divergence;
pub mod edit;
pub mod lp;
pub mod scalar;
pub mod sqfd;

mod dense;
mod sparse;
mod symbolic;

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use bytemuck::Pod;

use crate::error::{Error, Result};
use crate::object::{IdType, LabelType, ObjView, ObjectRecord};
use crate::params::ParamMap;
use crate::text;

pub use dense::DenseSpace;
pub use divergence::{BregmanFamily, DivMode, LogLookupTable, Orientation};
pub use sparse::SparseSpace;
pub use symbolic::{BitHammingSpace, LevenshteinSpace, SqfdSpace};

/// Value type a space reports distances in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistType {
    Int,
    Float,
    Double,
}

impl DistType {
    /// Rounds an `f64` distance to this type, returning it widened back to `f64`.
    #[inline]
    pub fn narrow(self, v: f64) -> f64 {
        match self {
            DistType::Int => crate::math::round(v),
            DistType::Float => v as f32 as f64,
            DistType::Double => v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistType::Int => "int",
            DistType::Float => "float",
            DistType::Double => "double",
        }
    }
}

impl core::str::FromStr for DistType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int" => Ok(DistType::Int),
            "float" => Ok(DistType::Float),
            "double" => Ok(DistType::Double),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown distance type '{s}'"))),
        }
    }
}

impl fmt::Display for DistType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stored element type of real-valued vectors.
pub trait Elem: Pod + Default + PartialEq + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn to_f64(self) -> f64;
    fn from_f64(v: f64) -> Self;
}

impl Elem for f32 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

impl Elem for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
}

/// Which metric axioms a space is known to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceProps {
    pub symmetric: bool,
    /// Symmetric, non-negative, identity of indiscernibles and triangle inequality.
    pub metric: bool,
}

/// Decoded real vector, used by projections and bound computations.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorData {
    Dense(Vec<f64>),
    Sparse(Vec<(u32, f64)>),
}

/// A distance function together with its object format.
pub trait Space: Send + Sync + fmt::Debug {
    /// Mnemonic the space was created from, including parameters.
    fn name(&self) -> &str;

    fn dist_type(&self) -> DistType;

    fn props(&self) -> SpaceProps;

    /// `d(a, b)`, already narrowed to [`Self::dist_type`].
    fn distance(&self, a: ObjView<'_>, b: ObjView<'_>) -> f64;

    /// Builds an object from the text that follows the optional label prefix.
    fn parse(&self, id: IdType, label: LabelType, body: &str) -> Result<ObjectRecord>;

    /// Text form accepted by [`Self::parse`] (without the label prefix).
    fn format(&self, obj: ObjView<'_>) -> String;

    /// Parses a whole data line, label prefix included.
    fn parse_line(&self, id: IdType, line: &str) -> Result<ObjectRecord> {
        let (label, body) = text::split_label(line)?;
        self.parse(id, label, body)
    }

    /// Dense dimensionality of an object, when that notion applies.
    fn dimension(&self, _obj: ObjView<'_>) -> Option<usize> {
        None
    }

    /// Real-vector view of an object for spaces over vectors.
    fn vector(&self, _obj: ObjView<'_>) -> Option<VectorData> {
        None
    }

    /// Builds an object from dense real values.
    fn from_dense(&self, _id: IdType, _label: LabelType, _values: &[f64]) -> Result<ObjectRecord> {
        Err(Error::Unsupported(alloc::format!("space '{}' has no dense constructor", self.name())))
    }

    /// Bregman generator of a left-query divergence space.
    fn bregman(&self) -> Option<BregmanFamily> {
        None
    }
}

pub type SpaceRef = Arc<dyn Space>;

/// Splits `name:params` and parses the parameter list.
pub fn parse_mnemonic(mnemonic: &str) -> Result<(String, ParamMap)> {
    let (name, rest) = match mnemonic.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (mnemonic.trim(), ""),
    };
    if name.is_empty() {
        return Err(Error::UnknownSpace(mnemonic.to_string()));
    }
    let mut params = ParamMap::new();
    if !rest.is_empty() {
        // `lp:0.5` is shorthand for `lp:p=0.5`
        if name == "lp" && !rest.contains('=') {
            params.set("p", rest);
        } else {
            params = ParamMap::parse(rest)?;
        }
    }
    Ok((name.to_string(), params))
}

fn int_unsupported(name: &str) -> Error {
    Error::Unsupported(alloc::format!("space '{name}' has no integer distance type"))
}

/// Creates a space from its mnemonic.
pub fn create_space(mnemonic: &str, dist_type: DistType) -> Result<SpaceRef> {
    let (name, mut params) = parse_mnemonic(mnemonic)?;
    let label = mnemonic.trim().to_string();
    let space: SpaceRef = match name.as_str() {
        "leven" | "normleven" => {
            let normalized = name == "normleven";
            if normalized && dist_type == DistType::Int {
                return Err(int_unsupported(&name));
            }
            Arc::new(LevenshteinSpace::new(label, normalized, dist_type))
        }
        "bit_hamming" => Arc::new(BitHammingSpace::new(label, dist_type)),
        _ if dist_type == DistType::Int => {
            // validate the name first so unknown spaces report as such
            if !is_known_real_space(&name) {
                return Err(Error::UnknownSpace(name));
            }
            return Err(int_unsupported(&name));
        }
        _ => create_real_space(&name, label, &mut params, dist_type)?,
    };
    params.check_unused()?;
    Ok(space)
}

const REAL_SPACES: &[&str] = &[
    "l1", "l2", "linf", "lp", "l1_sparse", "l2_sparse", "linf_sparse", "lp_sparse",
    "cosinesimil", "angulardist", "cosinesimil_sparse", "angulardist_sparse",
    "cosinesimil_sparse_fast", "angulardist_sparse_fast", "jsdivslow", "jsdivfast",
    "jsdivfastapprox", "jsmetrslow", "jsmetrfast", "jsmetrfastapprox", "kldivfast",
    "kldivfastrq", "kldivgenslow", "kldivgenfast", "kldivgenfastrq", "itakurasaitoslow",
    "itakurasaitofast", "itakurasaitofastrq", "sqfd_minus_func", "sqfd_heuristic_func",
    "sqfd_gaussian_func",
];

fn is_known_real_space(name: &str) -> bool {
    REAL_SPACES.contains(&name)
}

/// Every mnemonic base name `create_space` understands.
pub fn space_names() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = REAL_SPACES.to_vec();
    v.extend(["leven", "normleven", "bit_hamming"]);
    v
}

fn create_real_space(name: &str, label: String, params: &mut ParamMap, dt: DistType) -> Result<SpaceRef> {
    use dense::DenseKind as K;
    use sparse::SparseKind as S;
    let double = dt == DistType::Double;

    macro_rules! dense {
        ($kind:expr) => {
            if double {
                Arc::new(DenseSpace::<f64>::new(label, $kind, dt)) as SpaceRef
            } else {
                Arc::new(DenseSpace::<f32>::new(label, $kind, dt)) as SpaceRef
            }
        };
    }
    macro_rules! sparse {
        ($kind:expr) => {
            if double {
                Arc::new(SparseSpace::<f64>::new(label, $kind, dt)) as SpaceRef
            } else {
                Arc::new(SparseSpace::<f32>::new(label, $kind, dt)) as SpaceRef
            }
        };
    }
    macro_rules! sqfd {
        ($func:expr) => {
            if double {
                Arc::new(SqfdSpace::<f64>::new(label, $func, dt)) as SpaceRef
            } else {
                Arc::new(SqfdSpace::<f32>::new(label, $func, dt)) as SpaceRef
            }
        };
    }

    let lp_order = |params: &mut ParamMap| -> Result<lp::LpOrder> {
        let p: f64 = params.required("p")?;
        lp::LpOrder::from_p(p)
    };
    let alpha = |params: &mut ParamMap| -> Result<f64> {
        let a: f64 = params.required("alpha")?;
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("alpha must be positive, got {a}")));
        }
        Ok(a)
    };

    Ok(match name {
        "l1" => dense!(K::Lp(lp::LpOrder::One)),
        "l2" => dense!(K::Lp(lp::LpOrder::Two)),
        "linf" => dense!(K::Lp(lp::LpOrder::Inf)),
        "lp" => dense!(K::Lp(lp_order(params)?)),
        "l1_sparse" => sparse!(S::Lp(lp::LpOrder::One)),
        "l2_sparse" => sparse!(S::Lp(lp::LpOrder::Two)),
        "linf_sparse" => sparse!(S::Lp(lp::LpOrder::Inf)),
        "lp_sparse" => sparse!(S::Lp(lp_order(params)?)),
        "cosinesimil" => dense!(K::Cosine),
        "angulardist" => dense!(K::Angular),
        "cosinesimil_sparse" => sparse!(S::Cosine { gallop: false }),
        "angulardist_sparse" => sparse!(S::Angular { gallop: false }),
        "cosinesimil_sparse_fast" => sparse!(S::Cosine { gallop: true }),
        "angulardist_sparse_fast" => sparse!(S::Angular { gallop: true }),
        "jsdivslow" => dense!(K::JsDiv(DivMode::Slow)),
        "jsdivfast" => dense!(K::JsDiv(DivMode::Fast)),
        "jsdivfastapprox" => dense!(K::JsDiv(DivMode::Approx)),
        "jsmetrslow" => dense!(K::JsMetr(DivMode::Slow)),
        "jsmetrfast" => dense!(K::JsMetr(DivMode::Fast)),
        "jsmetrfastapprox" => dense!(K::JsMetr(DivMode::Approx)),
        "kldivfast" => dense!(K::Bregman(BregmanFamily::Kl, DivMode::Fast, Orientation::Left)),
        "kldivfastrq" => dense!(K::Bregman(BregmanFamily::Kl, DivMode::Fast, Orientation::Right)),
        "kldivgenslow" => dense!(K::Bregman(BregmanFamily::GenKl, DivMode::Slow, Orientation::Left)),
        "kldivgenfast" => dense!(K::Bregman(BregmanFamily::GenKl, DivMode::Fast, Orientation::Left)),
        "kldivgenfastrq" => dense!(K::Bregman(BregmanFamily::GenKl, DivMode::Fast, Orientation::Right)),
        "itakurasaitoslow" => dense!(K::Bregman(BregmanFamily::ItakuraSaito, DivMode::Slow, Orientation::Left)),
        "itakurasaitofast" => dense!(K::Bregman(BregmanFamily::ItakuraSaito, DivMode::Fast, Orientation::Left)),
        "itakurasaitofastrq" => {
            dense!(K::Bregman(BregmanFamily::ItakuraSaito, DivMode::Fast, Orientation::Right))
        }
        "sqfd_minus_func" => sqfd!(sqfd::SqfdFunc::Minus),
        "sqfd_heuristic_func" => sqfd!(sqfd::SqfdFunc::Heuristic(alpha(params)?)),
        "sqfd_gaussian_func" => sqfd!(sqfd::SqfdFunc::Gaussian(alpha(params)?)),
        _ => return Err(Error::UnknownSpace(name.to_string())),
    })
}

/// Writes values separated by single spaces.
pub(crate) fn join_values<T: fmt::Display>(vals: impl IntoIterator<Item = T>) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, v) in vals.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mnemonics() {
        let (n, mut p) = parse_mnemonic("lp:p=0.5").unwrap();
        assert_eq!(n, "lp");
        assert_eq!(p.required::<f64>("p").unwrap(), 0.5);
        let (_, mut p) = parse_mnemonic("lp:0.25").unwrap();
        assert_eq!(p.required::<f64>("p").unwrap(), 0.25);
        assert!(create_space("nosuch", DistType::Float).is_err());
        assert!(matches!(create_space("lp", DistType::Float), Err(Error::MissingParam(_))));
        assert!(matches!(create_space("l2:p=3", DistType::Float), Err(Error::UnusedParams(_))));
        assert!(matches!(create_space("l2", DistType::Int), Err(Error::Unsupported(_))));
        assert!(matches!(create_space("nope", DistType::Int), Err(Error::UnknownSpace(_))));
        assert!(create_space("sqfd_gaussian_func", DistType::Float).is_err());
        for n in space_names() {
            let m = match n {
                "lp" | "lp_sparse" => alloc::format!("{n}:p=3"),
                "sqfd_heuristic_func" | "sqfd_gaussian_func" => alloc::format!("{n}:alpha=1"),
                _ => n.to_string(),
            };
            let s = create_space(&m, DistType::Float).unwrap();
            assert_eq!(s.name(), m);
        }
        assert!(create_space("leven", DistType::Int).is_ok());
        assert!(create_space("normleven", DistType::Int).is_err());
    }

    #[test]
    fn narrowing() {
        let v = 0.1f64;
        assert_eq!(DistType::Float.narrow(v), 0.1f32 as f64);
        assert_eq!(DistType::Double.narrow(v), v);
        assert_eq!(DistType::Int.narrow(2.0000001), 2.0);
    }
}
