//! Object records and data sets.
//!
//! An [`ObjectRecord`] keeps an opaque payload; only a space knows how to read it.
//! Payload bytes live in a `u64`-backed buffer so spaces can reinterpret them as
//! `f32`/`f64`/`u32` slices without copying.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use bytemuck::Pod;

pub type IdType = u32;
pub type LabelType = i32;

/// Label value meaning "no class label".
pub const NO_LABEL: LabelType = -1;

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectRecord {
    id: IdType,
    label: LabelType,
    extern_id: Option<String>,
    words: Box<[u64]>,
    len: usize,
}

/// Borrowed view of an object payload together with its id and label.
#[derive(Clone, Copy, Debug)]
pub struct ObjView<'a> {
    pub id: IdType,
    pub label: LabelType,
    words: &'a [u64],
    len: usize,
}

fn pack(bytes: &[u8]) -> Box<[u64]> {
    let mut words = vec![0u64; bytes.len().div_ceil(8)];
    bytemuck::cast_slice_mut::<u64, u8>(&mut words)[..bytes.len()].copy_from_slice(bytes);
    words.into_boxed_slice()
}

impl ObjectRecord {
    pub fn new(id: IdType, label: LabelType, bytes: &[u8]) -> Self {
        ObjectRecord {
            id,
            label,
            extern_id: None,
            words: pack(bytes),
            len: bytes.len(),
        }
    }

    pub fn from_view(v: ObjView<'_>) -> Self {
        ObjectRecord {
            id: v.id,
            label: v.label,
            extern_id: None,
            words: v.words.into(),
            len: v.len,
        }
    }

    pub fn with_extern_id(mut self, ext: Option<String>) -> Self {
        self.extern_id = ext;
        self
    }

    pub fn id(&self) -> IdType {
        self.id
    }

    pub fn label(&self) -> LabelType {
        self.label
    }

    pub fn extern_id(&self) -> Option<&str> {
        self.extern_id.as_deref()
    }

    pub fn bytes(&self) -> &[u8] {
        &bytemuck::cast_slice::<u64, u8>(&self.words)[..self.len]
    }

    pub fn byte_len(&self) -> usize {
        self.len
    }

    /// Same payload under a different ordinal.
    pub fn renumbered(&self, id: IdType) -> Self {
        let mut out = self.clone();
        out.id = id;
        out
    }

    #[inline]
    pub fn view(&self) -> ObjView<'_> {
        ObjView {
            id: self.id,
            label: self.label,
            words: &self.words,
            len: self.len,
        }
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl<'a> ObjView<'a> {
    #[inline]
    pub fn bytes(&self) -> &'a [u8] {
        &bytemuck::cast_slice::<u64, u8>(self.words)[..self.len]
    }

    #[inline]
    pub fn byte_len(&self) -> usize {
        self.len
    }

    /// `count` elements of `T` starting at `offset` bytes; `offset` must be aligned for `T`.
    #[inline]
    pub fn slice<T: Pod>(&self, offset: usize, count: usize) -> &'a [T] {
        let size = core::mem::size_of::<T>();
        let all = bytemuck::cast_slice::<u64, u8>(self.words);
        bytemuck::cast_slice(&all[offset..offset + count * size])
    }
}

/// Concatenates POD sections into a payload byte buffer.
#[derive(Default)]
pub struct PayloadBuilder {
    bytes: Vec<u8>,
}

impl PayloadBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push<T: Pod>(mut self, data: &[T]) -> Self {
        self.bytes.extend_from_slice(bytemuck::cast_slice(data));
        self
    }

    pub fn build(self, id: IdType, label: LabelType) -> ObjectRecord {
        ObjectRecord::new(id, label, &self.bytes)
    }
}

/// Contiguous copies of several payloads (bucket storage).
#[derive(Clone, Debug, Default)]
pub struct PackedObjects {
    words: Vec<u64>,
    // (word offset, byte len, id, label)
    slots: Vec<(usize, usize, IdType, LabelType)>,
}

impl PackedObjects {
    pub fn pack<'a>(objs: impl IntoIterator<Item = ObjView<'a>>) -> Self {
        let mut out = PackedObjects::default();
        for o in objs {
            out.slots.push((out.words.len(), o.len, o.id, o.label));
            out.words.extend_from_slice(o.words);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> ObjView<'_> {
        let (off, len, id, label) = self.slots[i];
        ObjView {
            id,
            label,
            words: &self.words[off..off + len.div_ceil(8)],
            len,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ObjView<'_>> {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn size_bytes(&self) -> usize {
        self.words.len() * 8 + self.slots.len() * core::mem::size_of::<(usize, usize, u32, i32)>()
    }
}

/// Ordered collection of records whose ids equal their positions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DataSet {
    records: Vec<ObjectRecord>,
    space: String,
}

impl DataSet {
    pub fn new(space: impl Into<String>) -> Self {
        DataSet {
            records: Vec::new(),
            space: space.into(),
        }
    }

    /// Appends a record, renumbering it to the next ordinal.
    pub fn push(&mut self, rec: ObjectRecord) {
        let id = self.records.len() as IdType;
        if rec.id == id {
            self.records.push(rec);
        } else {
            self.records.push(rec.renumbered(id));
        }
    }

    pub fn from_records(space: impl Into<String>, recs: impl IntoIterator<Item = ObjectRecord>) -> Self {
        let mut ds = DataSet::new(space);
        for r in recs {
            ds.push(r);
        }
        ds
    }

    pub fn space_name(&self) -> &str {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &ObjectRecord {
        &self.records[i]
    }

    #[inline]
    pub fn view(&self, i: usize) -> ObjView<'_> {
        self.records[i].view()
    }

    pub fn records(&self) -> &[ObjectRecord] {
        &self.records
    }

    pub fn iter(&self) -> core::slice::Iter<'_, ObjectRecord> {
        self.records.iter()
    }

    /// New data set made of the given records (by position), renumbered from zero.
    pub fn subset(&self, ids: &[usize]) -> DataSet {
        DataSet::from_records(self.space.clone(), ids.iter().map(|&i| self.records[i].clone()))
    }

    pub fn truncate(&mut self, n: usize) {
        self.records.truncate(n);
    }

    /// Bytes held by payloads.
    pub fn size_bytes(&self) -> usize {
        self.records
            .iter()
            .map(|r| r.words().len() * 8 + core::mem::size_of::<ObjectRecord>())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_views_are_aligned() {
        let vals = [1.0f32, 2.0, 3.0];
        let ids = [7u32, 9, 11];
        let obj = PayloadBuilder::new().push(&vals).push(&ids).build(0, NO_LABEL);
        let v = obj.view();
        assert_eq!(v.byte_len(), 24);
        assert_eq!(v.slice::<f32>(0, 3), &vals);
        assert_eq!(v.slice::<u32>(12, 3), &ids);
    }

    #[test]
    fn dataset_ids_follow_positions() {
        let mut ds = DataSet::new("l2");
        ds.push(ObjectRecord::new(5, 1, &[1]));
        ds.push(ObjectRecord::new(0, 2, &[2]));
        assert_eq!(ds.get(0).id(), 0);
        assert_eq!(ds.get(1).id(), 1);
        let sub = ds.subset(&[1]);
        assert_eq!(sub.get(0).id(), 0);
        assert_eq!(sub.get(0).label(), 2);
    }

    #[test]
    fn packed_objects_roundtrip() {
        let a = ObjectRecord::new(3, 0, &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let b = ObjectRecord::new(4, 1, &[10]);
        let p = PackedObjects::pack([a.view(), b.view()]);
        assert_eq!(p.get(0).bytes(), a.bytes());
        assert_eq!(p.get(1).bytes(), b.bytes());
        assert_eq!(p.get(1).id, 4);
    }
}
