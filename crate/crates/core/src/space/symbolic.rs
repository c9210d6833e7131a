use alloc::string::String;
use alloc::vec::Vec;
use core::marker::PhantomData;

use crate::error::{Error, Result};
use crate::object::{IdType, LabelType, ObjView, ObjectRecord, PayloadBuilder};
use crate::space::bits;
use crate::space::edit;
use crate::space::sqfd::{self, SqfdFunc, CENTROID_DIM, CLUSTER_STRIDE};
use crate::space::{join_values, DistType, Elem, Space, SpaceProps};
use crate::text;

/// Strings under the (optionally length-normalized) Levenshtein distance. Payload: UTF-8 bytes.
#[derive(Debug)]
pub struct LevenshteinSpace {
    name: String,
    normalized: bool,
    dist_type: DistType,
}

impl LevenshteinSpace {
    pub fn new(name: impl Into<String>, normalized: bool, dist_type: DistType) -> Self {
        LevenshteinSpace {
            name: name.into(),
            normalized,
            dist_type,
        }
    }

    pub fn make(&self, id: IdType, label: LabelType, s: &str) -> ObjectRecord {
        ObjectRecord::new(id, label, s.as_bytes())
    }

    fn text<'a>(obj: &ObjView<'a>) -> &'a str {
        // payloads are only ever built from &str
        core::str::from_utf8(obj.bytes()).unwrap_or("")
    }
}

impl Space for LevenshteinSpace {
    fn name(&self) -> &str {
        &self.name
    }

    fn dist_type(&self) -> DistType {
        self.dist_type
    }

    fn props(&self) -> SpaceProps {
        SpaceProps {
            symmetric: true,
            metric: !self.normalized,
        }
    }

    fn distance(&self, a: ObjView<'_>, b: ObjView<'_>) -> f64 {
        let (p, s) = (Self::text(&a), Self::text(&b));
        let v = if self.normalized {
            edit::normalized_levenshtein_str(p, s)
        } else {
            edit::levenshtein_str(p, s) as f64
        };
        self.dist_type.narrow(v)
    }

    fn parse(&self, id: IdType, label: LabelType, body: &str) -> Result<ObjectRecord> {
        Ok(self.make(id, label, body))
    }

    fn format(&self, obj: ObjView<'_>) -> String {
        String::from(Self::text(&obj))
    }

    fn dimension(&self, obj: ObjView<'_>) -> Option<usize> {
        Some(Self::text(&obj).chars().count())
    }
}

/// Packed bit vectors under Hamming distance. Payload: `[u64 bit count][u64 words]`.
#[derive(Debug)]
pub struct BitHammingSpace {
    name: String,
    dist_type: DistType,
}

impl BitHammingSpace {
    pub fn new(name: impl Into<String>, dist_type: DistType) -> Self {
        BitHammingSpace {
            name: name.into(),
            dist_type,
        }
    }

    pub fn from_bits(&self, id: IdType, label: LabelType, flags: &[bool]) -> ObjectRecord {
        let words = bits::pack_bits(flags);
        PayloadBuilder::new()
            .push(&[flags.len() as u64])
            .push(&words)
            .build(id, label)
    }

    fn parts<'a>(obj: &ObjView<'a>) -> (usize, &'a [u64]) {
        let all = obj.slice::<u64>(0, obj.byte_len() / 8);
        (all[0] as usize, &all[1..])
    }
}

impl Space for BitHammingSpace {
    fn name(&self) -> &str {
        &self.name
    }

    fn dist_type(&self) -> DistType {
        self.dist_type
    }

    fn props(&self) -> SpaceProps {
        SpaceProps {
            symmetric: true,
            metric: true,
        }
    }

    fn distance(&self, a: ObjView<'_>, b: ObjView<'_>) -> f64 {
        let ((_, x), (_, y)) = (Self::parts(&a), Self::parts(&b));
        self.dist_type.narrow(bits::hamming_words(x, y) as f64)
    }

    /// Accepts either separated `0`/`1` tokens or one run of binary digits.
    fn parse(&self, id: IdType, label: LabelType, body: &str) -> Result<ObjectRecord> {
        let mut flags = Vec::new();
        for c in body.chars() {
            match c {
                '0' => flags.push(false),
                '1' => flags.push(true),
                c if c.is_whitespace() || c == ',' => {}
                c => return Err(Error::parse(alloc::format!("bad bit character '{c}'"))),
            }
        }
        if flags.is_empty() {
            return Err(Error::parse("empty bit vector"));
        }
        Ok(self.from_bits(id, label, &flags))
    }

    fn format(&self, obj: ObjView<'_>) -> String {
        let (n, words) = Self::parts(&obj);
        let bits = (0..n).map(|i| if words[i / 64] >> (i % 64) & 1 == 1 { '1' } else { '0' });
        let mut out = String::with_capacity(2 * n);
        for (i, b) in bits.enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push(b);
        }
        out
    }

    fn dimension(&self, obj: ObjView<'_>) -> Option<usize> {
        Some(Self::parts(&obj).0)
    }
}

/// Feature signatures under SQFD. Payload: `[T; 8 * clusters]`, each cluster a 7-d centroid then its weight.
#[derive(Debug)]
pub struct SqfdSpace<T: Elem> {
    name: String,
    func: SqfdFunc,
    dist_type: DistType,
    _elem: PhantomData<T>,
}

const WEIGHT_SUM_TOL: f64 = 1e-6;

impl<T: Elem> SqfdSpace<T> {
    pub fn new(name: impl Into<String>, func: SqfdFunc, dist_type: DistType) -> Self {
        SqfdSpace {
            name: name.into(),
            func,
            dist_type,
            _elem: PhantomData,
        }
    }

    fn values<'a>(obj: &ObjView<'a>) -> &'a [T] {
        obj.slice::<T>(0, obj.byte_len() / core::mem::size_of::<T>())
    }
}

impl<T: Elem> Space for SqfdSpace<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dist_type(&self) -> DistType {
        self.dist_type
    }

    fn props(&self) -> SpaceProps {
        SpaceProps {
            symmetric: true,
            metric: true,
        }
    }

    fn distance(&self, a: ObjView<'_>, b: ObjView<'_>) -> f64 {
        self.dist_type
            .narrow(sqfd::sqfd(Self::values(&a), Self::values(&b), self.func))
    }

    fn parse(&self, id: IdType, label: LabelType, body: &str) -> Result<ObjectRecord> {
        let vals = text::parse_dense_values(body)?;
        self.from_dense(id, label, &vals)
    }

    fn format(&self, obj: ObjView<'_>) -> String {
        join_values(Self::values(&obj).iter())
    }

    fn dimension(&self, obj: ObjView<'_>) -> Option<usize> {
        Some(Self::values(&obj).len() / CLUSTER_STRIDE)
    }

    /// `values` holds clusters back to back: 7 centroid coordinates then the weight.
    fn from_dense(&self, id: IdType, label: LabelType, values: &[f64]) -> Result<ObjectRecord> {
        if values.is_empty() || values.len() % CLUSTER_STRIDE != 0 {
            return Err(Error::parse(alloc::format!(
                "signature needs a multiple of {CLUSTER_STRIDE} values, got {}",
                values.len()
            )));
        }
        let mut sum = 0.0;
        for c in values.chunks(CLUSTER_STRIDE) {
            let w = c[CENTROID_DIM];
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::parse(alloc::format!("cluster weight {w} outside (0, 1]")));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::parse(alloc::format!("cluster weights sum to {sum}, expected 1")));
        }
        let stored: Vec<T> = values.iter().map(|&v| T::from_f64(v)).collect();
        Ok(PayloadBuilder::new().push(&stored).build(id, label))
    }
}
