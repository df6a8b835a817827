//! Std companion to `klamp-core`: log and file formats, remote backends,
//! durable per-user state, the HTTP service and the command line.

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod persist;
pub mod pipeline;
pub mod remote;
pub mod service;

pub use error::{Error, Result};
