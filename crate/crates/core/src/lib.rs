//! Entity-centric personal knowledge stores for contextual query suggestion.
//!
//! This crate is `no_std` (it needs `alloc`) and holds every pure part of the
//! pipeline: log sessionization and privacy filtering, gazetteer entity
//! linking, the two per-user knowledge stores, contextual retrieval, the
//! fallback embedder, prompt assembly and output parsing, and the offline
//! evaluation harness. File formats, HTTP backends and the service live in
//! the `klamp` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod embed;
mod error;
pub mod eval;
pub mod ingest;
pub mod linker;
pub mod model;
pub mod retrieval;
pub mod rng;
pub mod store;
pub mod suggest;

pub use error::{Error, Result};
pub use model::{
    canonicalize_entity, concat_context, EntityId, SearchContext, SearchRecord, Session, Timestamp,
    UserId, WebPage,
};
