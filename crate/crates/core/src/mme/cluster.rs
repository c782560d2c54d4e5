//! Pairing of ground-truth segments with the predictions that overlap them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::edt::squared_edt;
use crate::volume::{count_intersection, BoundingBox, Segment, SegmentSet, Spacing};

/// The part of one predicted segment assigned to a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    source_id: u32,
    voxels: Vec<usize>,
}

impl Fragment {
    /// Id of the prediction this fragment was cut from.
    pub fn source_id(&self) -> u32 {
        self.source_id
    }

    pub fn voxels(&self) -> &[usize] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }
}

/// One ground-truth segment with its correlated prediction fragments.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    ground_truth: Segment,
    fragments: Vec<Fragment>,
    overlap_voxels: Vec<usize>,
}

impl Cluster {
    pub fn ground_truth(&self) -> &Segment {
        &self.ground_truth
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    /// Voxels of the ground truth covered by any fragment, sorted.
    pub fn overlap_voxels(&self) -> &[usize] {
        &self.overlap_voxels
    }

    pub fn is_detected(&self) -> bool {
        !self.fragments.is_empty()
    }

    /// Total voxels across this cluster's fragments.
    pub fn prediction_voxels(&self) -> usize {
        self.fragments.iter().map(Fragment::len).sum()
    }

    pub fn in_prediction(&self, index: usize) -> bool {
        self.fragments
            .iter()
            .any(|f| f.voxels.binary_search(&index).is_ok())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    clusters: Vec<Cluster>,
    orphans: Vec<Segment>,
    /// Sorted ground-truth ids overlapped by each prediction, by prediction index.
    correlated: Vec<Vec<u32>>,
    spacing: Spacing,
}

impl ClusterSet {
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn orphans(&self) -> &[Segment] {
        &self.orphans
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Ground-truth ids overlapped by the original prediction `prediction_id`.
    pub fn correlated_ground_truths(&self, prediction_id: u32) -> &[u32] {
        &self.correlated[prediction_id as usize - 1]
    }
}

/// Builds one cluster per ground-truth segment plus the orphan predictions.
///
/// A prediction overlapping several ground truths is split: each overlap
/// goes to its own ground truth and every remaining voxel joins the
/// nearest overlapped ground truth in physical distance, ties going to the
/// smaller ground-truth id.
pub fn cluster(gt: &SegmentSet, pred: &SegmentSet) -> Result<ClusterSet> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimsMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    if gt.spacing() != pred.spacing() {
        return Err(Error::SpacingMismatch);
    }
    let dims = gt.dims();
    let owner = gt.owner_map();

    let mut fragments: Vec<Vec<Fragment>> = vec![Vec::new(); gt.len()];
    let mut orphans = Vec::new();
    let mut correlated = Vec::with_capacity(pred.len());

    for s in pred.segments() {
        let hits: BTreeSet<u32> = s.voxels().iter().filter_map(|&v| owner[v]).collect();
        correlated.push(
            hits.iter()
                .map(|&k| gt.segments()[k as usize].id())
                .collect::<Vec<_>>(),
        );
        match hits.len() {
            0 => orphans.push(s.clone()),
            1 => {
                let k = *hits.iter().next().unwrap() as usize;
                fragments[k].push(Fragment {
                    source_id: s.id(),
                    voxels: s.voxels().to_vec(),
                });
            }
            _ => {
                let hits: Vec<usize> = hits.iter().map(|&k| k as usize).collect();
                for (k, voxels) in split_prediction(s, gt, &owner, &hits) {
                    if !voxels.is_empty() {
                        fragments[k].push(Fragment {
                            source_id: s.id(),
                            voxels,
                        });
                    }
                }
            }
        }
    }

    let clusters = gt
        .segments()
        .iter()
        .zip(fragments)
        .map(|(g, frags)| {
            let mut overlap_voxels: Vec<usize> = frags
                .iter()
                .flat_map(|f| f.voxels.iter().copied().filter(|&v| g.contains(v)))
                .collect();
            overlap_voxels.sort_unstable();
            Cluster {
                ground_truth: g.clone(),
                fragments: frags,
                overlap_voxels,
            }
        })
        .collect();

    debug_assert_eq!(dims, pred.dims());
    Ok(ClusterSet {
        clusters,
        orphans,
        correlated,
        spacing: gt.spacing(),
    })
}

fn split_prediction(
    s: &Segment,
    gt: &SegmentSet,
    owner: &[Option<u32>],
    hits: &[usize],
) -> Vec<(usize, Vec<usize>)> {
    let dims = gt.dims();
    let mut region = s.bounding_box();
    for &k in hits {
        region = region.union(&gt.segments()[k].bounding_box());
    }
    let local = region.extent();

    // Squared distance from each voxel of the box to each overlapped G.
    let fields: Vec<Vec<f64>> = hits
        .iter()
        .map(|&k| {
            let mut seeds = vec![false; local.len()];
            for c in gt.segments()[k].coords() {
                seeds[region.local_index(c)] = true;
            }
            squared_edt(local, &seeds, gt.spacing())
        })
        .collect();

    let mut parts: Vec<(usize, Vec<usize>)> = hits.iter().map(|&k| (k, Vec::new())).collect();
    for &v in s.voxels() {
        let slot = match owner[v] {
            Some(k) => hits.iter().position(|&h| h == k as usize).unwrap(),
            None => nearest(&fields, &region, dims.coords(v)),
        };
        parts[slot].1.push(v);
    }
    parts
}

fn nearest(fields: &[Vec<f64>], region: &BoundingBox, c: [usize; 3]) -> usize {
    let l = region.local_index(c);
    let mut best = 0;
    for (i, f) in fields.iter().enumerate().skip(1) {
        // `hits` is ordered by ground-truth index, so strict comparison
        // keeps the smallest id on ties.
        if f[l] < fields[best][l] {
            best = i;
        }
    }
    best
}

/// Number of voxels of `g` covered by `fragment`.
pub(crate) fn fragment_overlap(g: &Segment, fragment: &Fragment) -> usize {
    count_intersection(g.voxels(), fragment.voxels())
}
