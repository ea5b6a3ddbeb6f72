//! Discrete Willmore flow of immersed surfaces in `R^n`.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! - [`mesh`]: immersed triangle meshes, connectivity and periodic identifications
//! - [`frames`], [`operators`], [`curvature`]: tangent/normal frames, cotangent and
//!   normal-connection Laplacians, second fundamental form, Willmore tensor and energy
//! - [`concentration`]: local curvature concentration in extrinsic balls
//! - [`cutoff`]: the smooth bump profile and radial ambient cutoffs
//! - [`flow`]: time integration of `∂ₜf = −θʳ W(f)`
//! - [`graph`]: the normal-graph gauge `f = f₀ + η`
//! - [`monitor`]: energy reports, energy-identity residual, existence-time prediction, decay fits
//! - [`inequality`]: empirical ratios for the Sobolev-type inequalities
//! - [`primitives`]: generators for reference geometries
//!
//! File formats, configuration and the command-line front end live in the
//! `willmore-cli` crate.

#![no_std]
// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the formulas
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
// `Float` imports are allowed to go unused: once any crate in the graph links
// std (proptest does in test builds), std's inherent float methods win

extern crate alloc;


pub mod concentration;
pub mod curvature;
pub mod cutoff;
mod error;
pub mod flow;
pub mod frames;
pub mod graph;
pub mod inequality;
pub(crate) mod linalg;
pub mod mesh;
pub mod monitor;
pub mod numeric;
pub mod operators;
pub mod primitives;
pub(crate) mod sparse;
mod spatial;

pub use crate::curvature::{analyze_surface, AnalysisOptions, ShapeState, SurfaceAnalysis};
pub use crate::error::{Error, Result};
pub use crate::frames::{vertex_frames, VertexFrame, VertexFrames};
pub use crate::mesh::{build_mesh, ImmersedMesh, PeriodicLattice, MAX_DIM};
