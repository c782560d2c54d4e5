//! The five per-segment properties: detection, uniformity, boundary
//! alignment, total volume and relative volume.
//!
//! Ratios of volumes are taken on voxel counts since the voxel volume
//! cancels; this keeps detection and relative-volume counts bit-identical
//! under a uniform rescaling of the spacing.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{normalized_distance_in, skeletonize, NormalizedDistanceField};
use crate::mme::cluster::{fragment_overlap, ClusterSet};
use crate::mme::prf::PropertyCounts;
use crate::volume::{volume_of, SegmentSet};

pub fn detection(clusters: &ClusterSet, theta_tp: f64, theta_fp: f64) -> PropertyCounts {
    let mut tp = 0usize;
    let mut fp = clusters.orphans().len();
    for c in clusters.clusters() {
        let g = c.ground_truth();
        let size = g.len() as f64;
        let mut hit = 0.0;
        let mut miss = 0.0;
        for f in c.fragments() {
            let o = fragment_overlap(g, f);
            hit += o as f64 / size;
            miss += (f.len() - o) as f64 / size;
        }
        if hit > theta_tp {
            tp += 1;
        }
        if miss > theta_fp {
            fp += 1;
        }
    }
    let n = clusters.clusters().len();
    PropertyCounts::new(tp as f64, fp as f64, (n - tp) as f64)
}

pub fn uniformity(clusters: &ClusterSet) -> PropertyCounts {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for c in clusters.clusters().iter().filter(|c| c.is_detected()) {
        tp += 1;
        let sources: BTreeSet<u32> = c.fragments().iter().map(|f| f.source_id()).collect();
        fn_ += sources.len() - 1;
        let covered: BTreeSet<u32> = sources
            .iter()
            .flat_map(|&s| clusters.correlated_ground_truths(s).iter().copied())
            .collect();
        fp += covered.len() - 1;
    }
    PropertyCounts::new(tp as f64, fp as f64, fn_ as f64)
}

/// Normalized distance fields for every detected cluster, each covering
/// the ground truth and its fragments.
pub fn distance_fields(clusters: &ClusterSet) -> Result<Vec<NormalizedDistanceField>> {
    clusters
        .clusters()
        .par_iter()
        .filter(|c| c.is_detected())
        .map(|c| {
            let g = c.ground_truth();
            let dims = g.dims();
            let mut region = g.bounding_box();
            for f in c.fragments() {
                for &v in f.voxels() {
                    region.include(dims.coords(v));
                }
            }
            let skeleton = skeletonize(g);
            normalized_distance_in(g, &skeleton, clusters.spacing(), region)
        })
        .collect()
}

pub fn boundary_alignment(
    clusters: &ClusterSet,
    fields: &[NormalizedDistanceField],
) -> Result<PropertyCounts> {
    let mut total = PropertyCounts::default();
    for c in clusters.clusters().iter().filter(|c| c.is_detected()) {
        let g = c.ground_truth();
        let field = fields
            .iter()
            .find(|f| f.segment_id() == g.id() && f.dims() == g.dims())
            .ok_or(Error::MissingDistanceField {
                segment: g.id(),
                voxel: g.voxels()[0],
            })?;
        let missing = |v: usize| Error::MissingDistanceField {
            segment: g.id(),
            voxel: v,
        };

        let (mut covered, mut missed, mut mass) = (0.0, 0.0, 0.0);
        let overlap = c.overlap_voxels();
        for &v in g.voxels() {
            let dn = field.dn_in(v).ok_or_else(|| missing(v))?;
            mass += dn;
            if overlap.binary_search(&v).is_ok() {
                covered += dn;
            } else {
                missed += dn;
            }
        }
        let mut false_mass = 0.0;
        for f in c.fragments() {
            for &v in f.voxels() {
                if !g.contains(v) {
                    false_mass += field.dn_out(v).ok_or_else(|| missing(v))?;
                }
            }
        }
        total.tp += covered / mass;
        total.fn_ += missed / mass;
        total.fp += false_mass / mass;
    }
    Ok(total)
}

/// Physical overlap volumes in mm³.
pub fn total_volume(clusters: &ClusterSet, gt: &SegmentSet, pred: &SegmentSet) -> PropertyCounts {
    let overlap: usize = clusters
        .clusters()
        .iter()
        .map(|c| c.overlap_voxels().len())
        .sum();
    let tp = volume_of(overlap, clusters.spacing());
    let (tp, [fp, fn_]) = exact_partition(tp, [pred.total_volume(), gt.total_volume()]);
    PropertyCounts::new(tp, fp, fn_)
}

pub fn relative_volume(clusters: &ClusterSet) -> PropertyCounts {
    let (mut tp, mut fp) = (0.0, 0.0);
    for c in clusters.clusters() {
        let size = c.ground_truth().len() as f64;
        let o = c.overlap_voxels().len();
        tp += o as f64 / size;
        fp += f64::min(1.0, (c.prediction_voxels() - o) as f64 / size);
    }
    let n = clusters.clusters().len() as f64;
    let (tp, [fn_]) = exact_partition(tp, [n]);
    PropertyCounts::new(tp, fp, fn_)
}

/// `total - part`, moved by at most a few ulps so that `part + result`
/// rounds back to `total`. `None` if no such value is in reach.
fn complement(total: f64, part: f64) -> Option<f64> {
    let mut c = total - part;
    for _ in 0..8 {
        let s = part + c;
        if s == total {
            return Some(c);
        }
        c = if s < total { c.next_up() } else { c.next_down() };
    }
    None
}

/// Splits `totals` into a shared part near `part` and per-total remainders
/// whose sums with the part reproduce each total bit for bit. The part is
/// itself a rounded product, so it may move by a few ulps to get there.
pub(crate) fn exact_partition<const N: usize>(part: f64, totals: [f64; N]) -> (f64, [f64; N]) {
    let mut candidate = part;
    for step in 0..16 {
        if let Some(rest) = totals
            .iter()
            .map(|&t| complement(t, candidate))
            .collect::<Option<Vec<f64>>>()
        {
            return (candidate, rest.try_into().expect("length N"));
        }
        // Alternate: part+1ulp, part-1ulp, part+2ulp, ...
        candidate = part;
        for _ in 0..=step / 2 {
            candidate = if step % 2 == 0 { candidate.next_up() } else { candidate.next_down() };
        }
    }
    (part, totals.map(|t| t - part))
}
