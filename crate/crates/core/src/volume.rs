//! Voxel grids, per-class masks and connected-component segments.
//!
//! Storage is row-major with `x` varying fastest, so the linear index of
//! `(x, y, z)` is `x + w * (y + h * z)`. Every type here is immutable once
//! built.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid extent in voxels along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub w: usize,
    pub h: usize,
    pub d: usize,
}

impl Dims {
    pub fn new(w: usize, h: usize, d: usize) -> Result<Self> {
        let dims = Dims { w, h, d };
        if w == 0 || h == 0 || d == 0 {
            return Err(Error::InvalidDims(dims));
        }
        Ok(dims)
    }

    pub fn len(&self) -> usize {
        self.w * self.h * self.d
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Depth-one grids are treated as planar images.
    pub fn is_planar(&self) -> bool {
        self.d == 1
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.w * (y + self.h * z)
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.w;
        let rest = index / self.w;
        [x, rest % self.h, rest / self.h]
    }

    #[inline]
    pub fn as_array(&self) -> [usize; 3] {
        [self.w, self.h, self.d]
    }

    /// Index of `(x, y, z) + offset` when it stays inside the grid.
    #[inline]
    pub fn offset(&self, c: [usize; 3], off: [isize; 3]) -> Option<usize> {
        let ext = self.as_array();
        let mut out = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as isize + off[a];
            if v < 0 || v >= ext[a] as isize {
                return None;
            }
            out[a] = v as usize;
        }
        Some(self.index(out[0], out[1], out[2]))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.w, self.h, self.d)
    }
}

/// Physical voxel size in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Spacing {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(dx) && ok(dy) && ok(dz)) {
            return Err(Error::InvalidSpacing(dx, dy, dz));
        }
        Ok(Spacing { dx, dy, dz })
    }

    pub fn isotropic() -> Self {
        Spacing {
            dx: 1.0,
            dy: 1.0,
            dz: 1.0,
        }
    }

    pub fn voxel_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn min_component(&self) -> f64 {
        self.dx.min(self.dy).min(self.dz)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Spacing::new(self.dx * c, self.dy * c, self.dz * c)
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing::isotropic()
    }
}

/// Neighborhood used to decide whether two foreground voxels touch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u32", try_from = "u32")]
pub enum Connectivity {
    /// Face neighbors.
    Six,
    /// Face and edge neighbors.
    Eighteen,
    /// Face, edge and corner neighbors.
    #[default]
    TwentySix,
}

impl Connectivity {
    pub fn from_count(n: u32) -> Result<Self> {
        match n {
            6 => Ok(Connectivity::Six),
            18 => Ok(Connectivity::Eighteen),
            26 => Ok(Connectivity::TwentySix),
            other => Err(Error::InvalidParameter(format!(
                "connectivity must be 6, 18 or 26, got {other}"
            ))),
        }
    }

    pub fn count(&self) -> u32 {
        match self {
            Connectivity::Six => 6,
            Connectivity::Eighteen => 18,
            Connectivity::TwentySix => 26,
        }
    }

    pub fn offsets(&self) -> Vec<[isize; 3]> {
        let max_nonzero = match self {
            Connectivity::Six => 1,
            Connectivity::Eighteen => 2,
            Connectivity::TwentySix => 3,
        };
        let mut out = Vec::with_capacity(26);
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let nz = (dx != 0) as usize + (dy != 0) as usize + (dz != 0) as usize;
                    if nz > 0 && nz <= max_nonzero {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl From<Connectivity> for u32 {
    fn from(c: Connectivity) -> u32 {
        c.count()
    }
}

impl TryFrom<u32> for Connectivity {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Connectivity::from_count(n)
    }
}

/// A dense grid of class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    dims: Dims,
    labels: Vec<u32>,
    spacing: Spacing,
}

impl LabelVolume {
    pub fn new(dims: Dims, labels: Vec<u32>, spacing: Spacing) -> Result<Self> {
        let dims = Dims::new(dims.w, dims.h, dims.d)?;
        if labels.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                got: labels.len(),
            });
        }
        Ok(LabelVolume {
            dims,
            labels,
            spacing,
        })
    }

    /// A planar image reshaped to depth one with a 1 mm slice thickness.
    pub fn planar(w: usize, h: usize, labels: Vec<u32>, dx: f64, dy: f64) -> Result<Self> {
        LabelVolume::new(Dims::new(w, h, 1)?, labels, Spacing::new(dx, dy, 1.0)?)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn with_spacing(&self, spacing: Spacing) -> Self {
        LabelVolume {
            spacing,
            ..self.clone()
        }
    }

    /// Sorted non-zero labels occurring in the volume.
    pub fn foreground_labels(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        set.into_iter().collect()
    }
}

/// One boolean per voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    dims: Dims,
    bits: Vec<bool>,
    spacing: Spacing,
}

impl BinaryMask {
    pub fn new(dims: Dims, bits: Vec<bool>, spacing: Spacing) -> Result<Self> {
        let dims = Dims::new(dims.w, dims.h, dims.d)?;
        if bits.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                got: bits.len(),
            });
        }
        Ok(BinaryMask {
            dims,
            bits,
            spacing,
        })
    }

    pub fn empty(dims: Dims, spacing: Spacing) -> Self {
        BinaryMask {
            dims,
            bits: vec![false; dims.len()],
            spacing,
        }
    }

    /// Mask with exactly the given linear indices set.
    pub fn from_indices(dims: Dims, spacing: Spacing, indices: &[usize]) -> Self {
        let mut bits = vec![false; dims.len()];
        for &i in indices {
            bits[i] = true;
        }
        BinaryMask {
            dims,
            bits,
            spacing,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[self.dims.index(x, y, z)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn with_spacing(&self, spacing: Spacing) -> Self {
        BinaryMask {
            spacing,
            ..self.clone()
        }
    }

    pub(crate) fn check_compatible(&self, other: &BinaryMask) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        if self.spacing != other.spacing {
            return Err(Error::SpacingMismatch);
        }
        Ok(())
    }
}

/// Inclusive axis-aligned box of voxel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min: [usize; 3],
    pub max: [usize; 3],
}

impl BoundingBox {
    pub fn of_indices(dims: Dims, indices: &[usize]) -> Option<Self> {
        let mut it = indices.iter();
        let first = dims.coords(*it.next()?);
        let mut bb = BoundingBox {
            min: first,
            max: first,
        };
        for &i in it {
            bb.include(dims.coords(i));
        }
        Some(bb)
    }

    pub fn include(&mut self, c: [usize; 3]) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(c[a]);
            self.max[a] = self.max[a].max(c[a]);
        }
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        let mut out = *self;
        out.include(other.min);
        out.include(other.max);
        out
    }

    /// Grows the box by `margin` voxels on each side, clipped to `dims`.
    pub fn grown(&self, margin: usize, dims: Dims) -> BoundingBox {
        let ext = dims.as_array();
        let mut out = *self;
        for a in 0..3 {
            out.min[a] = self.min[a].saturating_sub(margin);
            out.max[a] = (self.max[a] + margin).min(ext[a] - 1);
        }
        out
    }

    pub fn extent(&self) -> Dims {
        Dims {
            w: self.max[0] - self.min[0] + 1,
            h: self.max[1] - self.min[1] + 1,
            d: self.max[2] - self.min[2] + 1,
        }
    }

    pub fn contains(&self, c: [usize; 3]) -> bool {
        (0..3).all(|a| c[a] >= self.min[a] && c[a] <= self.max[a])
    }

    /// Local linear index inside the box for a global coordinate.
    #[inline]
    pub fn local_index(&self, c: [usize; 3]) -> usize {
        let e = self.extent();
        e.index(c[0] - self.min[0], c[1] - self.min[1], c[2] - self.min[2])
    }

    /// Global linear index of a local box index.
    #[inline]
    pub fn global_index(&self, local: usize, dims: Dims) -> usize {
        let c = self.extent().coords(local);
        dims.index(
            c[0] + self.min[0],
            c[1] + self.min[1],
            c[2] + self.min[2],
        )
    }
}

/// A connected set of foreground voxels of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    id: u32,
    voxels: Vec<usize>,
    dims: Dims,
    volume_mm3: f64,
}

impl Segment {
    /// Builds a segment from linear voxel indices; they are sorted and
    /// deduplicated. Connectivity is not re-checked.
    pub fn new(id: u32, mut voxels: Vec<usize>, dims: Dims, spacing: Spacing) -> Result<Self> {
        if voxels.is_empty() {
            return Err(Error::EmptyInput("segment voxels"));
        }
        voxels.sort_unstable();
        voxels.dedup();
        if let Some(&last) = voxels.last() {
            if last >= dims.len() {
                return Err(Error::LengthMismatch {
                    expected: dims.len(),
                    got: last + 1,
                });
            }
        }
        let volume_mm3 = volume_of(voxels.len(), spacing);
        Ok(Segment {
            id,
            voxels,
            dims,
            volume_mm3,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    /// Sorted linear indices.
    pub fn voxels(&self) -> &[usize] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn volume_mm3(&self) -> f64 {
        self.volume_mm3
    }

    pub fn contains(&self, index: usize) -> bool {
        self.voxels.binary_search(&index).is_ok()
    }

    pub fn coords(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.voxels.iter().map(|&i| self.dims.coords(i))
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of_indices(self.dims, &self.voxels).expect("segments are non-empty")
    }
}

/// All segments of one class found in a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    class_id: u32,
    segments: Vec<Segment>,
    dims: Dims,
    spacing: Spacing,
}

impl SegmentSet {
    pub fn new(class_id: u32, segments: Vec<Segment>, dims: Dims, spacing: Spacing) -> Self {
        SegmentSet {
            class_id,
            segments,
            dims,
            spacing,
        }
    }

    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn voxel_count(&self) -> usize {
        self.segments.iter().map(Segment::len).sum()
    }

    pub fn total_volume(&self) -> f64 {
        volume_of(self.voxel_count(), self.spacing)
    }

    /// Segment index (not id) owning each voxel, `None` for background.
    pub fn owner_map(&self) -> Vec<Option<u32>> {
        let mut owner = vec![None; self.dims.len()];
        for (k, s) in self.segments.iter().enumerate() {
            for &v in s.voxels() {
                owner[v] = Some(k as u32);
            }
        }
        owner
    }

    pub fn to_mask(&self) -> BinaryMask {
        let mut bits = vec![false; self.dims.len()];
        for s in &self.segments {
            for &v in s.voxels() {
                bits[v] = true;
            }
        }
        BinaryMask {
            dims: self.dims,
            bits,
            spacing: self.spacing,
        }
    }
}

/// Mask of voxels carrying `class_id`. An absent class yields an empty mask.
pub fn class_mask(volume: &LabelVolume, class_id: u32) -> BinaryMask {
    BinaryMask {
        dims: volume.dims,
        bits: volume.labels.iter().map(|&l| l == class_id).collect(),
        spacing: volume.spacing,
    }
}

/// Labels the connected foreground components of `mask`.
///
/// Segment ids start at 1 and follow the storage order of each segment's
/// first voxel, so labeling is deterministic.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> SegmentSet {
    components_with_class(mask, connectivity, 1)
}

pub(crate) fn components_with_class(
    mask: &BinaryMask,
    connectivity: Connectivity,
    class_id: u32,
) -> SegmentSet {
    let dims = mask.dims;
    let offsets = connectivity.offsets();
    let mut visited = vec![false; dims.len()];
    let mut queue = VecDeque::new();
    let mut segments = Vec::new();

    for start in 0..dims.len() {
        if !mask.bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let mut voxels = Vec::new();
        while let Some(v) = queue.pop_front() {
            voxels.push(v);
            let c = dims.coords(v);
            for off in &offsets {
                if let Some(n) = dims.offset(c, *off) {
                    if mask.bits[n] && !visited[n] {
                        visited[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        let id = segments.len() as u32 + 1;
        segments.push(Segment::new(id, voxels, dims, mask.spacing).expect("component is non-empty"));
    }

    SegmentSet {
        class_id,
        segments,
        dims,
        spacing: mask.spacing,
    }
}

/// Physical volume in mm³ of `voxel_count` voxels.
pub fn volume_of(voxel_count: usize, spacing: Spacing) -> f64 {
    voxel_count as f64 * spacing.voxel_volume()
}

/// Voxels shared by two segments. An empty result means they are uncorrelated.
pub fn overlap(a: &Segment, b: &Segment) -> Result<Vec<usize>> {
    if a.dims != b.dims {
        return Err(Error::DimsMismatch {
            left: a.dims,
            right: b.dims,
        });
    }
    Ok(intersect_sorted(&a.voxels, &b.voxels))
}

pub(crate) fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub(crate) fn count_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}
