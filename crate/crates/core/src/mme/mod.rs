//! Multi-property evaluation: clustering of predictions around ground-truth
//! segments and the detection, uniformity, boundary, total-volume and
//! relative-volume scores built on it.

pub mod aggregate;
pub mod cluster;
pub mod evaluate;
pub mod prf;
pub mod properties;

pub use aggregate::{aggregate, macro_average, MeanStd, MmeAggregate, PrfSummary};
pub use cluster::{cluster, Cluster, ClusterSet, Fragment};
pub use evaluate::{evaluate_masks, evaluate_pair, MmeParams, MmeResult, Property, PropertyScore};
pub use prf::{prf, Prf, PropertyCounts};
pub use properties::{
    boundary_alignment, detection, distance_fields, relative_volume, total_volume, uniformity,
};
