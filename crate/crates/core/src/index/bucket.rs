//! Leaf buckets shared by the tree methods.

use alloc::vec::Vec;

use crate::object::{DataSet, IdType, PackedObjects};
use crate::query::Query;

/// Object ids of a leaf, optionally with a contiguous copy of their payloads.
#[derive(Debug, Clone, Default)]
pub struct Bucket {
    ids: Vec<IdType>,
    packed: Option<PackedObjects>,
}

impl Bucket {
    pub fn new(ids: Vec<IdType>, data: &DataSet, chunk: bool) -> Self {
        let packed = chunk.then(|| PackedObjects::pack(ids.iter().map(|&i| data.view(i as usize))));
        Bucket { ids, packed }
    }

    pub fn ids(&self) -> &[IdType] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Compares every member with the query.
    pub fn scan(&self, data: &DataSet, q: &mut Query<'_>) {
        match &self.packed {
            Some(p) => {
                for v in p.iter() {
                    let d = q.distance_to(v);
                    q.check_and_add(v.id, d);
                }
            }
            None => {
                for &id in &self.ids {
                    let d = q.distance_to(data.view(id as usize));
                    q.check_and_add(id, d);
                }
            }
        }
    }

    pub fn size_bytes(&self) -> usize {
        self.ids.len() * 4 + self.packed.as_ref().map_or(0, PackedObjects::size_bytes)
    }
}

/// Compares a candidate list with the query (the refine step of filter-and-refine).
pub fn refine(data: &DataSet, ids: impl IntoIterator<Item = IdType>, q: &mut Query<'_>) {
    for id in ids {
        let d = q.distance_to(data.view(id as usize));
        q.check_and_add(id, d);
    }
}
