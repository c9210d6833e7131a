//! Similarity search over metric and non-metric spaces.
//!
//! The crate is `no_std` (with `alloc`). The default `std` feature enables
//! multi-threaded index construction.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod index;
pub mod math;
pub mod object;
pub mod params;
pub mod persist;
pub mod projection;
pub mod query;
pub mod space;
pub mod text;

pub use error::{Error, Result};
pub use object::{DataSet, IdType, LabelType, ObjView, ObjectRecord, NO_LABEL};
pub use params::ParamMap;
pub use space::{create_space, DistType, Space, SpaceRef};
