use alloc::string::String;
use alloc::vec::Vec;
use core::marker::PhantomData;

use crate::error::{Error, Result};
use crate::object::{IdType, LabelType, ObjView, ObjectRecord, PayloadBuilder};
use crate::space::lp::{self, LpOrder, PowPlan};
use crate::space::scalar;
use crate::space::{DistType, Elem, Space, SpaceProps, VectorData};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparseKind {
    Lp(LpOrder),
    Cosine { gallop: bool },
    Angular { gallop: bool },
}

/// Sparse real-vector space. Payload: `[T values; n][u32 ids; n]` with ascending ids.
#[derive(Debug)]
pub struct SparseSpace<T: Elem> {
    name: String,
    kind: SparseKind,
    dist_type: DistType,
    plan: PowPlan,
    _elem: PhantomData<T>,
}

impl<T: Elem> SparseSpace<T> {
    pub fn new(name: impl Into<String>, kind: SparseKind, dist_type: DistType) -> Self {
        let plan = match kind {
            SparseKind::Lp(LpOrder::General(p)) => PowPlan::new(p),
            _ => PowPlan::General(1.0),
        };
        SparseSpace {
            name: name.into(),
            kind,
            dist_type,
            plan,
            _elem: PhantomData,
        }
    }

    #[inline]
    fn parts<'a>(&self, obj: &ObjView<'a>) -> (&'a [u32], &'a [T]) {
        let n = obj.byte_len() / (core::mem::size_of::<T>() + 4);
        (obj.slice::<u32>(n * core::mem::size_of::<T>(), n), obj.slice::<T>(0, n))
    }

    /// Builds an object from `(id, value)` pairs sorted by id.
    pub fn from_pairs(&self, id: IdType, label: LabelType, pairs: &[(u32, f64)]) -> Result<ObjectRecord> {
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument("sparse ids must be strictly increasing".into()));
        }
        let vals: Vec<T> = pairs.iter().map(|p| T::from_f64(p.1)).collect();
        let ids: Vec<u32> = pairs.iter().map(|p| p.0).collect();
        if matches!(self.kind, SparseKind::Cosine { .. } | SparseKind::Angular { .. })
            && vals.iter().all(|v| v.to_f64() == 0.0)
        {
            return Err(Error::Domain("zero-norm vector".into()));
        }
        let b = PayloadBuilder::new().push(&vals);
        // ids start at a 4-aligned offset since T is 4 or 8 bytes wide
        Ok(b.push(&ids).build(id, label))
    }

    fn cosine(&self, a: &ObjView<'_>, b: &ObjView<'_>, gallop: bool) -> f64 {
        let ((xi, xv), (yi, yv)) = (self.parts(a), self.parts(b));
        let d = if gallop {
            scalar::sparse_dot_gallop(xi, xv, yi, yv)
        } else {
            scalar::sparse_dot_merge(xi, xv, yi, yv)
        };
        scalar::cosine_from_parts(d, scalar::norm(xv), scalar::norm(yv))
    }
}

impl<T: Elem> Space for SparseSpace<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dist_type(&self) -> DistType {
        self.dist_type
    }

    fn props(&self) -> SpaceProps {
        let metric = match self.kind {
            SparseKind::Lp(LpOrder::General(p)) => p >= 1.0,
            SparseKind::Lp(_) | SparseKind::Angular { .. } => true,
            SparseKind::Cosine { .. } => false,
        };
        SpaceProps { symmetric: true, metric }
    }

    fn distance(&self, a: ObjView<'_>, b: ObjView<'_>) -> f64 {
        let v = match self.kind {
            SparseKind::Lp(order) => {
                let ((xi, xv), (yi, yv)) = (self.parts(&a), self.parts(&b));
                lp::sparse_lp(xi, xv, yi, yv, order, &self.plan)
            }
            SparseKind::Cosine { gallop } => self.cosine(&a, &b, gallop),
            SparseKind::Angular { gallop } => scalar::angular_from_cosine(self.cosine(&a, &b, gallop)),
        };
        self.dist_type.narrow(v)
    }

    fn parse(&self, id: IdType, label: LabelType, body: &str) -> Result<ObjectRecord> {
        let pairs = text::parse_sparse_values(body)?;
        self.from_pairs(id, label, &pairs)
    }

    fn format(&self, obj: ObjView<'_>) -> String {
        use core::fmt::Write;
        let (ids, vals) = self.parts(&obj);
        let mut out = String::new();
        for (k, (i, v)) in ids.iter().zip(vals).enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{i} {v}");
        }
        out
    }

    fn vector(&self, obj: ObjView<'_>) -> Option<VectorData> {
        let (ids, vals) = self.parts(&obj);
        Some(VectorData::Sparse(ids.iter().zip(vals).map(|(&i, v)| (i, v.to_f64())).collect()))
    }

    fn from_dense(&self, id: IdType, label: LabelType, values: &[f64]) -> Result<ObjectRecord> {
        let pairs: Vec<(u32, f64)> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::parse(alloc::format!("non-finite value {v}")));
        }
        self.from_pairs(id, label, &pairs)
    }
}

