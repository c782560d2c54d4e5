//! Surface extraction and surface-distance metrics (Hausdorff family, NSD).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::edt::squared_edt;
use crate::volume::{BinaryMask, Dims};

/// Slack applied to tolerance membership tests.
pub const TOLERANCE_SLACK: f64 = 1e-9;

/// Foreground voxels with at least one background face neighbor. Off-grid
/// neighbors count as background. Depth-one grids only look in-plane.
pub fn boundary(mask: &BinaryMask) -> Vec<usize> {
    boundary_of_bits(mask.dims(), mask.bits())
}

pub(crate) fn boundary_of_bits(dims: Dims, bits: &[bool]) -> Vec<usize> {
    let offsets: &[[isize; 3]] = if dims.is_planar() {
        &[[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0]]
    } else {
        &[
            [-1, 0, 0],
            [1, 0, 0],
            [0, -1, 0],
            [0, 1, 0],
            [0, 0, -1],
            [0, 0, 1],
        ]
    };
    (0..dims.len())
        .filter(|&i| {
            bits[i] && {
                let c = dims.coords(i);
                offsets
                    .iter()
                    .any(|off| dims.offset(c, *off).is_none_or(|n| !bits[n]))
            }
        })
        .collect()
}

pub fn boundary_mask(mask: &BinaryMask) -> BinaryMask {
    BinaryMask::from_indices(mask.dims(), mask.spacing(), &boundary(mask))
}

/// Mean, 95th percentile and maximum of the symmetric surface distances (mm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffStats {
    pub avg: f64,
    pub p95: f64,
    pub max: f64,
}

/// Directed boundary-to-boundary distances between two non-empty masks.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDistances {
    /// Distance of each voxel of ∂G to ∂S.
    pub gt_to_pred: Vec<f64>,
    /// Distance of each voxel of ∂S to ∂G.
    pub pred_to_gt: Vec<f64>,
}

impl SurfaceDistances {
    /// `None` when either mask is empty, where surface distances are undefined.
    pub fn compute(gt: &BinaryMask, pred: &BinaryMask) -> Result<Option<Self>> {
        gt.check_compatible(pred)?;
        let dims = gt.dims();
        let bg = boundary(gt);
        let bs = boundary(pred);
        if bg.is_empty() || bs.is_empty() {
            return Ok(None);
        }
        let to_seeds = |seeds: &[usize], query: &[usize]| -> Vec<f64> {
            let mut bits = vec![false; dims.len()];
            for &s in seeds {
                bits[s] = true;
            }
            let sq = squared_edt(dims, &bits, gt.spacing());
            query.iter().map(|&q| sq[q].sqrt()).collect()
        };
        Ok(Some(SurfaceDistances {
            gt_to_pred: to_seeds(&bs, &bg),
            pred_to_gt: to_seeds(&bg, &bs),
        }))
    }

    pub fn hausdorff(&self) -> HausdorffStats {
        let mut all: Vec<f64> = self
            .gt_to_pred
            .iter()
            .chain(self.pred_to_gt.iter())
            .copied()
            .collect();
        all.sort_by(f64::total_cmp);
        let n = all.len();
        let avg = all.iter().sum::<f64>() / n as f64;
        HausdorffStats {
            avg,
            p95: percentile_sorted(&all, 95.0),
            max: all[n - 1],
        }
    }

    pub fn nsd(&self, tau: f64) -> f64 {
        let within = |d: &&f64| **d <= tau + TOLERANCE_SLACK;
        let hits = self.gt_to_pred.iter().filter(within).count()
            + self.pred_to_gt.iter().filter(within).count();
        hits as f64 / (self.gt_to_pred.len() + self.pred_to_gt.len()) as f64
    }
}

/// Linear interpolation between closest ranks on sorted, non-empty data.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Symmetric Hausdorff statistics; `None` when either mask is empty.
pub fn hausdorff(gt: &BinaryMask, pred: &BinaryMask) -> Result<Option<HausdorffStats>> {
    Ok(SurfaceDistances::compute(gt, pred)?.map(|d| d.hausdorff()))
}

/// Normalized surface dice at tolerance `tau` mm; `None` when either mask is empty.
pub fn nsd(gt: &BinaryMask, pred: &BinaryMask, tau: f64) -> Result<Option<f64>> {
    if !(tau >= 0.0) {
        return Err(crate::error::Error::InvalidParameter(format!(
            "tolerance must be non-negative, got {tau}"
        )));
    }
    Ok(SurfaceDistances::compute(gt, pred)?.map(|d| d.nsd(tau)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Spacing;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_boundary(mask: &BinaryMask) -> Vec<usize> {
        let dims = mask.dims();
        let mut out = Vec::new();
        for z in 0..dims.d {
            for y in 0..dims.h {
                for x in 0..dims.w {
                    if !mask.get(x, y, z) {
                        continue;
                    }
                    let bg = |xx: isize, yy: isize, zz: isize| {
                        xx < 0
                            || yy < 0
                            || zz < 0
                            || xx >= dims.w as isize
                            || yy >= dims.h as isize
                            || zz >= dims.d as isize
                            || !mask.get(xx as usize, yy as usize, zz as usize)
                    };
                    let (x, y, z) = (x as isize, y as isize, z as isize);
                    let mut is_b = bg(x - 1, y, z) || bg(x + 1, y, z) || bg(x, y - 1, z) || bg(x, y + 1, z);
                    if dims.d > 1 {
                        is_b |= bg(x, y, z - 1) || bg(x, y, z + 1);
                    }
                    if is_b {
                        out.push(dims.index(x as usize, y as usize, z as usize));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn single_voxel_is_its_own_boundary() {
        let dims = Dims::new(3, 3, 3).unwrap();
        let m = BinaryMask::from_indices(dims, Spacing::isotropic(), &[dims.index(1, 1, 1)]);
        assert_eq!(boundary(&m), vec![dims.index(1, 1, 1)]);
    }

    #[test]
    fn cube_boundary_count() {
        let dims = Dims::new(7, 7, 7).unwrap();
        let mut idx = Vec::new();
        for z in 1..6 {
            for y in 1..6 {
                for x in 1..6 {
                    idx.push(dims.index(x, y, z));
                }
            }
        }
        let m = BinaryMask::from_indices(dims, Spacing::isotropic(), &idx);
        assert_eq!(boundary(&m).len(), 125 - 27);
    }

    #[test]
    fn disk_boundary_matches_neighbor_scan() {
        let dims = Dims::new(9, 9, 1).unwrap();
        let idx: Vec<usize> = (0..dims.len())
            .filter(|&i| {
                let c = dims.coords(i);
                let (dx, dy) = (c[0] as f64 - 4.0, c[1] as f64 - 4.0);
                dx * dx + dy * dy <= 9.0
            })
            .collect();
        let m = BinaryMask::from_indices(dims, Spacing::isotropic(), &idx);
        let b = boundary(&m);
        assert_eq!(b, brute_boundary(&m));
        assert!(b.len() < idx.len());
    }

    #[test]
    fn random_boundaries_match_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..40 {
            let dims = Dims::new(rng.gen_range(1..7), rng.gen_range(1..7), rng.gen_range(1..4)).unwrap();
            let bits = (0..dims.len()).map(|_| rng.gen_bool(0.6)).collect();
            let m = BinaryMask::new(dims, bits, Spacing::isotropic()).unwrap();
            assert_eq!(boundary(&m), brute_boundary(&m));
        }
    }

    #[test]
    fn identical_masks() {
        let dims = Dims::new(6, 6, 3).unwrap();
        let m = BinaryMask::from_indices(dims, Spacing::new(0.5, 1.0, 2.0).unwrap(), &[3, 4, 10, 40]);
        let h = hausdorff(&m, &m).unwrap().unwrap();
        assert_eq!((h.avg, h.p95, h.max), (0.0, 0.0, 0.0));
        assert_eq!(nsd(&m, &m, 0.0).unwrap(), Some(1.0));
    }

    #[test]
    fn single_voxels_apart() {
        let dims = Dims::new(10, 1, 1).unwrap();
        let sp = Spacing::new(2.0, 1.0, 1.0).unwrap();
        for k in 1..9 {
            let g = BinaryMask::from_indices(dims, sp, &[0]);
            let s = BinaryMask::from_indices(dims, sp, &[k]);
            let h = hausdorff(&g, &s).unwrap().unwrap();
            assert_eq!(h.max, 2.0 * k as f64);
        }
    }

    #[test]
    fn empty_is_undefined() {
        let dims = Dims::new(4, 4, 1).unwrap();
        let g = BinaryMask::from_indices(dims, Spacing::isotropic(), &[1]);
        let e = BinaryMask::empty(dims, Spacing::isotropic());
        assert_eq!(hausdorff(&g, &e).unwrap(), None);
        assert_eq!(nsd(&e, &g, 1.0).unwrap(), None);
    }

    #[test]
    fn percentile_interpolates() {
        let v: Vec<f64> = (0..=10).map(f64::from).collect();
        assert!((percentile_sorted(&v, 95.0) - 9.5).abs() < 1e-12);
        assert_eq!(percentile_sorted(&[3.0], 95.0), 3.0);
    }
}
