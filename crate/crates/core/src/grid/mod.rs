//! Voxel grid container: NDT cell statistics, semantic label histograms and
//! submap management.

mod cell;
mod gaussian;
mod labels;
mod submap;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cell::NdtCell;
pub use gaussian::{regularize_covariance, GaussianStats};
pub use labels::LabelHistogram;
pub use submap::{MapConfig, MapStack, SubMap};

/// Signed voxel coordinates relative to a submap origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub ix: i32,
    pub iy: i32,
    pub iz: i32,
}

impl CellIndex {
    pub const fn new(ix: i32, iy: i32, iz: i32) -> Self {
        Self { ix, iy, iz }
    }

    pub fn offset(self, dx: i32, dy: i32, dz: i32) -> Self {
        Self::new(self.ix + dx, self.iy + dy, self.iz + dz)
    }

    /// Chebyshev distance; 1 means 26-adjacent.
    pub fn chebyshev(self, other: Self) -> i32 {
        (self.ix - other.ix)
            .abs()
            .max((self.iy - other.iy).abs())
            .max((self.iz - other.iz).abs())
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.ix, self.iy, self.iz)
    }
}

/// Semantic class id, SemanticKITTI numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u16);

impl Label {
    pub const UNLABELED: Label = Label(0);
    pub const CAR: Label = Label(10);
    pub const ROAD: Label = Label(40);
    pub const PARKING: Label = Label(44);
    pub const SIDEWALK: Label = Label(48);
    pub const BUILDING: Label = Label(50);
    pub const POLE: Label = Label(80);
    pub const MOVING_CAR: Label = Label(252);
    pub const MOVING_PERSON: Label = Label(254);
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Handle of a cluster inside one submap's registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u32);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}
