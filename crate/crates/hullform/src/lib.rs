//! File formats, run configuration and the end-to-end pipeline around
//! `hullform-core`.

mod binfmt;

pub mod archive_io;
pub mod case_io;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod mesh_io;
pub mod pipeline;
pub mod timing;

pub use config::RunConfig;
pub use error::{Error, Result};
