use alloc::string::String;
use alloc::vec::Vec;
use core::marker::PhantomData;

use crate::error::{Error, Result};
use crate::math;
use crate::object::{IdType, LabelType, ObjView, ObjectRecord, PayloadBuilder};
use crate::space::divergence::{self as dv, BregmanFamily, DivMode, LogLookupTable, Orientation};
use crate::space::lp::{self, LpOrder, PowPlan};
use crate::space::scalar;
use crate::space::{join_values, DistType, Elem, Space, SpaceProps, VectorData};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseKind {
    Lp(LpOrder),
    Cosine,
    Angular,
    JsDiv(DivMode),
    JsMetr(DivMode),
    Bregman(BregmanFamily, DivMode, Orientation),
}

impl DenseKind {
    /// Whether objects carry precomputed logarithms ahead of their values.
    fn stores_logs(&self) -> bool {
        match self {
            DenseKind::JsDiv(m) | DenseKind::JsMetr(m) | DenseKind::Bregman(_, m, _) => *m != DivMode::Slow,
            _ => false,
        }
    }
}

/// Dense real-vector space. Payload: `[T; n]`, or `[f64 logs; n][T; n]` for fast divergences.
#[derive(Debug)]
pub struct DenseSpace<T: Elem> {
    name: String,
    kind: DenseKind,
    dist_type: DistType,
    plan: PowPlan,
    table: Option<LogLookupTable>,
    _elem: PhantomData<T>,
}

impl<T: Elem> DenseSpace<T> {
    pub fn new(name: impl Into<String>, kind: DenseKind, dist_type: DistType) -> Self {
        let plan = match kind {
            DenseKind::Lp(LpOrder::General(p)) => PowPlan::new(p),
            _ => PowPlan::General(1.0),
        };
        let approx = matches!(kind, DenseKind::JsDiv(DivMode::Approx) | DenseKind::JsMetr(DivMode::Approx));
        DenseSpace {
            name: name.into(),
            kind,
            dist_type,
            plan,
            table: approx.then(LogLookupTable::default),
            _elem: PhantomData,
        }
    }

    fn dim_of(&self, obj: &ObjView<'_>) -> usize {
        let per = core::mem::size_of::<T>() + if self.kind.stores_logs() { 8 } else { 0 };
        obj.byte_len() / per
    }

    #[inline]
    fn values<'a>(&self, obj: &ObjView<'a>) -> &'a [T] {
        let n = self.dim_of(obj);
        if self.kind.stores_logs() {
            obj.slice::<T>(8 * n, n)
        } else {
            obj.slice::<T>(0, n)
        }
    }

    #[inline]
    fn logs<'a>(&self, obj: &ObjView<'a>) -> &'a [f64] {
        obj.slice::<f64>(0, self.dim_of(obj))
    }

    fn validate(&self, vals: &[f64]) -> Result<()> {
        match self.kind {
            DenseKind::Cosine | DenseKind::Angular => {
                if vals.iter().all(|&v| v == 0.0) {
                    return Err(Error::Domain("zero-norm vector".into()));
                }
            }
            DenseKind::JsDiv(_) | DenseKind::JsMetr(_) => {
                if let Some(v) = vals.iter().find(|&&v| v < 0.0) {
                    return Err(Error::Domain(alloc::format!("negative element {v}")));
                }
            }
            DenseKind::Bregman(..) => {
                if let Some(v) = vals.iter().find(|&&v| v <= 0.0) {
                    return Err(Error::Domain(alloc::format!("non-positive element {v}")));
                }
            }
            DenseKind::Lp(_) => {}
        }
        Ok(())
    }

    fn raw_distance(&self, a: &ObjView<'_>, b: &ObjView<'_>) -> f64 {
        let (x, y) = (self.values(a), self.values(b));
        match self.kind {
            DenseKind::Lp(LpOrder::One) => lp::l1(x, y),
            DenseKind::Lp(LpOrder::Two) => lp::l2(x, y),
            DenseKind::Lp(LpOrder::Inf) => lp::linf(x, y),
            DenseKind::Lp(LpOrder::General(p)) => lp::lp_with_plan(x, y, p, &self.plan),
            DenseKind::Cosine => scalar::cosine_from_parts(scalar::dot(x, y), scalar::norm(x), scalar::norm(y)),
            DenseKind::Angular => scalar::angular_from_cosine(scalar::cosine_from_parts(
                scalar::dot(x, y),
                scalar::norm(x),
                scalar::norm(y),
            )),
            DenseKind::JsDiv(m) => self.js(a, b, m),
            DenseKind::JsMetr(m) => math::sqrt(self.js(a, b, m)),
            DenseKind::Bregman(fam, mode, orient) => {
                let (a, b) = match orient {
                    Orientation::Left => (a, b),
                    Orientation::Right => (b, a),
                };
                let (x, y) = (self.values(a), self.values(b));
                match (fam, mode) {
                    (BregmanFamily::Kl, DivMode::Slow) => dv::kl_slow(x, y),
                    (BregmanFamily::GenKl, DivMode::Slow) => dv::gen_kl_slow(x, y),
                    (BregmanFamily::ItakuraSaito, DivMode::Slow) => dv::itakura_saito_slow(x, y),
                    (BregmanFamily::Kl, _) => dv::kl_fast(x, self.logs(a), y, self.logs(b)),
                    (BregmanFamily::GenKl, _) => dv::gen_kl_fast(x, self.logs(a), y, self.logs(b)),
                    (BregmanFamily::ItakuraSaito, _) => dv::itakura_saito_fast(x, self.logs(a), y, self.logs(b)),
                }
            }
        }
    }

    fn js(&self, a: &ObjView<'_>, b: &ObjView<'_>, mode: DivMode) -> f64 {
        let (x, y) = (self.values(a), self.values(b));
        match mode {
            DivMode::Slow => dv::js_slow(x, y),
            DivMode::Fast => dv::js_fast(x, self.logs(a), y, self.logs(b)),
            DivMode::Approx => {
                let tbl = self.table.as_ref().expect("approximate space owns a table");
                dv::js_approx(x, self.logs(a), y, self.logs(b), tbl)
            }
        }
    }
}

impl<T: Elem> Space for DenseSpace<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dist_type(&self) -> DistType {
        self.dist_type
    }

    fn props(&self) -> SpaceProps {
        let (symmetric, metric) = match self.kind {
            DenseKind::Lp(LpOrder::General(p)) => (true, p >= 1.0),
            DenseKind::Lp(_) => (true, true),
            DenseKind::Cosine => (true, false),
            DenseKind::Angular => (true, true),
            DenseKind::JsDiv(_) => (true, false),
            DenseKind::JsMetr(m) => (true, m != DivMode::Approx),
            DenseKind::Bregman(..) => (false, false),
        };
        SpaceProps { symmetric, metric }
    }

    #[inline]
    fn distance(&self, a: ObjView<'_>, b: ObjView<'_>) -> f64 {
        self.dist_type.narrow(self.raw_distance(&a, &b))
    }

    fn parse(&self, id: IdType, label: LabelType, body: &str) -> Result<ObjectRecord> {
        let vals = text::parse_dense_values(body)?;
        self.from_dense(id, label, &vals)
    }

    fn format(&self, obj: ObjView<'_>) -> String {
        join_values(self.values(&obj).iter())
    }

    fn dimension(&self, obj: ObjView<'_>) -> Option<usize> {
        Some(self.dim_of(&obj))
    }

    fn vector(&self, obj: ObjView<'_>) -> Option<VectorData> {
        Some(VectorData::Dense(self.values(&obj).iter().map(|v| v.to_f64()).collect()))
    }

    fn from_dense(&self, id: IdType, label: LabelType, values: &[f64]) -> Result<ObjectRecord> {
        if values.is_empty() {
            return Err(Error::parse("empty vector"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::parse(alloc::format!("non-finite value {v}")));
        }
        let stored: Vec<T> = values.iter().map(|&v| T::from_f64(v)).collect();
        let check: Vec<f64> = stored.iter().map(|v| v.to_f64()).collect();
        self.validate(&check)?;
        let mut b = PayloadBuilder::new();
        if self.kind.stores_logs() {
            b = b.push(&dv::precompute_logs(&check)?);
        }
        Ok(b.push(&stored).build(id, label))
    }

    fn bregman(&self) -> Option<BregmanFamily> {
        match self.kind {
            DenseKind::Bregman(f, _, Orientation::Left) => Some(f),
            _ => None,
        }
    }
}
