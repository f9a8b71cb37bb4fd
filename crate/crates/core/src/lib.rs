//! Occupancy mapping on a normal-distributions-transform voxel grid where
//! cells belonging to the same object share measurement evidence.
//!
//! Each voxel keeps a Gaussian over the points that landed in it, a
//! log-odds occupancy, a semantic label histogram and a cluster membership.
//! Cells are grouped into clusters by region growing on their majority
//! labels; the per-scan occupancy update of a clustered cell is the
//! membership-weighted sum of the evidence observed anywhere in its cluster.
//! With identity weights the update is exactly the classic per-cell NDT-OM
//! filter.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: voxel indexing, NDT cells, submaps.
//! - [`sensor`]: ray traversal and the NDT-OM hit/miss evidence model.
//! - [`occupancy`]: latent-weighted log-odds fusion and commit.
//! - [`clustering`]: semantic region growing and χ² membership.
//! - [`pipeline`]: the [`Mapper`] that runs the per-scan loop.
//! - [`sim`]: deterministic box-world scenes producing labeled scans.
//! - [`io`]: KITTI-style readers, the map container, metrics.
//! - [`localization`]: NDT Monte Carlo localization and ATE.
//! - [`commands`]: the experiment commands behind the binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod localization;
pub mod occupancy;
pub mod pipeline;
pub mod sensor;
pub mod sim;

pub use config::Config;
pub use error::{Error, Result};
pub use grid::{CellIndex, ClusterId, Label, MapStack, NdtCell, SubMap};
pub use pipeline::Mapper;

/// World-frame 3-vector in meters.
pub type Vec3 = nalgebra::Vector3<f64>;
