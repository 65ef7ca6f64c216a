//! Numerical core for surrogate-driven hull-form optimization.
//!
//! Everything here is pure computation over in-memory data and builds
//! without `std`: triangle-mesh geometry, parametric morphing, flow-field
//! containers and force integration, an analytic reference flow model, a
//! point-wise neural field regressor, Sobol sampling, tangent-search
//! optimization with Pareto extraction, and sensitivity analysis with SVG
//! figure rendering. File formats, configuration and the command-line
//! driver live in the `hullform` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analyze;
pub mod doe;
mod error;
pub mod fields;
pub mod geom;
pub mod mesh;
pub mod morph;
pub mod optimize;
pub mod oracle;
pub mod rng;
pub mod surrogate;

pub use error::{Error, Result};
pub use fields::{FieldSample, FlowCase, ForceVector, SampleKind, WaterConstants};
pub use geom::Vec3;
pub use mesh::HullMesh;
pub use morph::{BaselineRatios, DesignBounds, DesignParams, MorphConfig, Parameter};
