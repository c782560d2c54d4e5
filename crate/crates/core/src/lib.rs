//! Spacing-aware evaluation of volumetric segmentations.
//!
//! Label volumes carry their physical voxel spacing; every distance and
//! volume is measured in millimetres. The [`mme`] module scores a prediction
//! on five properties (detection, uniformity, boundary alignment, total
//! volume, relative volume), and [`baseline`] provides the usual overlap
//! and surface-distance metrics for comparison.

pub mod baseline;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mme;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{
    class_mask, connected_components, BinaryMask, Connectivity, Dims, LabelVolume, Segment,
    SegmentSet, Spacing,
};
