//! Distance transforms, surfaces, skeletons and surface-distance metrics.

pub mod edt;
pub mod normalized;
pub mod skeleton;
pub mod surface;

pub use edt::{edt, DistanceField};
pub use normalized::{normalized_distance, normalized_distance_in, NormalizedDistanceField};
pub use skeleton::{skeletonize, Skeleton};
pub use surface::{boundary, boundary_mask, hausdorff, nsd, HausdorffStats, SurfaceDistances};
