//! Shape-normalized distances around one ground-truth segment.
//!
//! `DB` is the distance to the segment's surface and `DK` the distance to
//! its skeleton. Inside the segment a voxel scores `DB / (DK + DB)`, which
//! is 0 on the surface and 1 on the skeleton. Outside it scores
//! `DB / max(DK - DB, ε)` with `ε` the smallest voxel spacing.

use crate::error::{Error, Result};
use crate::geometry::edt::squared_edt;
use crate::geometry::skeleton::Skeleton;
use crate::geometry::surface::boundary_of_bits;
use crate::volume::{BoundingBox, Dims, Segment, Spacing};

/// Normalized distances over a box of the grid that contains the segment.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedDistanceField {
    segment_id: u32,
    dims: Dims,
    region: BoundingBox,
    inside: Vec<bool>,
    values: Vec<f64>,
}

impl NormalizedDistanceField {
    pub fn segment_id(&self) -> u32 {
        self.segment_id
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn region(&self) -> BoundingBox {
        self.region
    }

    fn local(&self, index: usize) -> Option<usize> {
        let c = self.dims.coords(index);
        self.region.contains(c).then(|| self.region.local_index(c))
    }

    /// `DN_in` for a voxel of the segment, `None` outside it or off-region.
    pub fn dn_in(&self, index: usize) -> Option<f64> {
        let l = self.local(index)?;
        self.inside[l].then_some(self.values[l])
    }

    /// `DN_out` for a voxel outside the segment, `None` inside it or off-region.
    pub fn dn_out(&self, index: usize) -> Option<f64> {
        let l = self.local(index)?;
        (!self.inside[l]).then_some(self.values[l])
    }

    /// Sum of `DN_in` over the whole segment.
    pub fn inside_mass(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.inside)
            .filter(|(_, &i)| i)
            .map(|(v, _)| v)
            .sum()
    }
}

/// Field over the entire grid.
pub fn normalized_distance(
    segment: &Segment,
    skeleton: &Skeleton,
    spacing: Spacing,
) -> Result<NormalizedDistanceField> {
    let dims = segment.dims();
    let full = BoundingBox {
        min: [0, 0, 0],
        max: [dims.w - 1, dims.h - 1, dims.d - 1],
    };
    normalized_distance_in(segment, skeleton, spacing, full)
}

/// Field restricted to `region`, which must contain the segment. Distances
/// are exact inside the region because every seed lies in the segment.
pub fn normalized_distance_in(
    segment: &Segment,
    skeleton: &Skeleton,
    spacing: Spacing,
    region: BoundingBox,
) -> Result<NormalizedDistanceField> {
    let dims = segment.dims();
    let bb = segment.bounding_box();
    if !region.contains(bb.min) || !region.contains(bb.max) {
        return Err(Error::InvalidParameter(
            "distance region must contain the segment".into(),
        ));
    }
    if skeleton.parent_segment_id() != segment.id()
        || skeleton.is_empty()
        || !skeleton.voxels().iter().all(|&v| segment.contains(v))
    {
        return Err(Error::InvalidParameter(
            "skeleton does not belong to the segment".into(),
        ));
    }

    let local = region.extent();
    let mut inside = vec![false; local.len()];
    for c in segment.coords() {
        inside[region.local_index(c)] = true;
    }
    let mut on_skeleton = vec![false; local.len()];
    for &v in skeleton.voxels() {
        on_skeleton[region.local_index(dims.coords(v))] = true;
    }

    // The region may be cropped from a larger grid; voxels on its faces that
    // are not on the grid faces still have in-grid neighbors, but those lie
    // outside the segment, so treating them as background is exact.
    let mut surface = vec![false; local.len()];
    let surface_idx = if dims.is_planar() == local.is_planar() {
        boundary_of_bits(local, &inside)
    } else {
        // A single-slice crop of a 3D grid: neighbors above and below are
        // either outside the segment or off-grid, so every voxel of the
        // slice sees background along z.
        (0..local.len()).filter(|&i| inside[i]).collect()
    };
    for i in surface_idx {
        surface[i] = true;
    }

    let db = squared_edt(local, &surface, spacing);
    let dk = squared_edt(local, &on_skeleton, spacing);
    let eps = spacing.min_component();

    let values = (0..local.len())
        .map(|i| {
            let (b, k) = (db[i].sqrt(), dk[i].sqrt());
            if inside[i] {
                if on_skeleton[i] {
                    1.0
                } else {
                    b / (k + b)
                }
            } else {
                b / (k - b).max(eps)
            }
        })
        .collect();

    Ok(NormalizedDistanceField {
        segment_id: segment.id(),
        dims,
        region,
        inside,
        values,
    })
}
