//! Exact Euclidean distance transform with per-axis voxel spacing.
//!
//! Separable lower-envelope-of-parabolas method: one 1D pass per axis over
//! squared distances. Each output is evaluated as `Σ (Δ·spacing)²` for the
//! winning seed, so it agrees with an all-pairs search up to rounding.

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Dims, Spacing};

/// Physical distance (mm) from every voxel to the nearest seed voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    dims: Dims,
    values: Vec<f64>,
    spacing: Spacing,
}

impl DistanceField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, index: usize) -> f64 {
        self.values[index]
    }
}

/// Distance from each voxel to the nearest `true` voxel of `seeds`.
pub fn edt(seeds: &BinaryMask) -> Result<DistanceField> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    let mut values = squared_edt(seeds.dims(), seeds.bits(), seeds.spacing());
    for v in values.iter_mut() {
        *v = v.sqrt();
    }
    Ok(DistanceField {
        dims: seeds.dims(),
        values,
        spacing: seeds.spacing(),
    })
}

/// Squared distances to the nearest seed; `f64::INFINITY` everywhere when
/// there is no seed.
pub(crate) fn squared_edt(dims: Dims, seeds: &[bool], spacing: Spacing) -> Vec<f64> {
    debug_assert_eq!(seeds.len(), dims.len());
    let mut field: Vec<f64> = seeds
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();

    let ext = dims.as_array();
    let sp = spacing.as_array();
    let strides = [1, dims.w, dims.w * dims.h];
    let max_len = ext.iter().copied().max().unwrap_or(0);

    let mut line = vec![0.0; max_len];
    let mut out = vec![0.0; max_len];
    let mut env = Envelope::with_capacity(max_len);

    for axis in 0..3 {
        let n = ext[axis];
        if n == 1 {
            continue;
        }
        let stride = strides[axis];
        // Every line start: all coordinates with this axis fixed at 0.
        let starts: Vec<usize> = (0..dims.len())
            .filter(|&i| (i / stride).is_multiple_of(n))
            .collect();
        for start in starts {
            for k in 0..n {
                line[k] = field[start + k * stride];
            }
            env.transform(&line[..n], sp[axis], &mut out[..n]);
            for k in 0..n {
                field[start + k * stride] = out[k];
            }
        }
    }
    field
}

struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n + 1),
        }
    }

    /// `out[q] = min_p ((q - p)·step)² + f[p]` over finite `f[p]`.
    fn transform(&mut self, f: &[f64], step: f64, out: &mut [f64]) {
        self.sites.clear();
        self.bounds.clear();
        let pos = |i: usize| i as f64 * step;

        for (q, &fq) in f.iter().enumerate() {
            if !fq.is_finite() {
                continue;
            }
            if self.sites.is_empty() {
                self.sites.push(q);
                self.bounds.push(f64::NEG_INFINITY);
                continue;
            }
            let xq = pos(q);
            loop {
                let p = *self.sites.last().unwrap();
                let xp = pos(p);
                let s = ((fq + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
                if s <= *self.bounds.last().unwrap() {
                    self.sites.pop();
                    self.bounds.pop();
                    if self.sites.is_empty() {
                        self.sites.push(q);
                        self.bounds.push(f64::NEG_INFINITY);
                        break;
                    }
                } else {
                    self.sites.push(q);
                    self.bounds.push(s);
                    break;
                }
            }
        }

        if self.sites.is_empty() {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }

        let mut k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let xq = pos(q);
            while k + 1 < self.sites.len() && self.bounds[k + 1] < xq {
                k += 1;
            }
            // Ties at a boundary: check the next site too so the minimum is
            // taken exactly.
            let mut best = eval(f, self.sites[k], q, step);
            if k + 1 < self.sites.len() {
                best = best.min(eval(f, self.sites[k + 1], q, step));
            }
            *o = best;
        }
    }
}

#[inline]
fn eval(f: &[f64], p: usize, q: usize, step: f64) -> f64 {
    let d = (q as f64 - p as f64) * step;
    d * d + f[p]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(mask: &BinaryMask) -> Vec<f64> {
        let dims = mask.dims();
        let sp = mask.spacing().as_array();
        let seeds = mask.indices();
        (0..dims.len())
            .map(|i| {
                let c = dims.coords(i);
                seeds
                    .iter()
                    .map(|&s| {
                        let t = dims.coords(s);
                        let mut acc = 0.0;
                        for a in 0..3 {
                            let d = (c[a] as f64 - t[a] as f64) * sp[a];
                            acc += d * d;
                        }
                        acc.sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn pythagoras() {
        let dims = Dims::new(5, 5, 1).unwrap();
        let m = BinaryMask::from_indices(dims, Spacing::isotropic(), &[0]);
        let f = edt(&m).unwrap();
        assert_eq!(f.at(dims.index(3, 4, 0)), 5.0);
    }

    #[test]
    fn full_seeds_is_zero() {
        let dims = Dims::new(4, 3, 2).unwrap();
        let m = BinaryMask::new(dims, vec![true; dims.len()], Spacing::isotropic()).unwrap();
        assert!(edt(&m).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_seeds_rejected() {
        let m = BinaryMask::empty(Dims::new(3, 3, 3).unwrap(), Spacing::isotropic());
        assert!(matches!(edt(&m), Err(Error::EmptySeeds)));
    }

    #[test]
    fn matches_all_pairs_anisotropic() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let sp = Spacing::new(0.5, 1.0, 2.0).unwrap();
        for _ in 0..100 {
            let dims = Dims::new(rng.gen_range(1..=6), rng.gen_range(1..=6), rng.gen_range(1..=3))
                .unwrap();
            let p = rng.gen_range(0.02..0.5);
            let mut bits: Vec<bool> = (0..dims.len()).map(|_| rng.gen_bool(p)).collect();
            if !bits.iter().any(|&b| b) {
                bits[rng.gen_range(0..dims.len())] = true;
            }
            let m = BinaryMask::new(dims, bits, sp).unwrap();
            let got = edt(&m).unwrap();
            for (a, b) in got.values().iter().zip(brute_force(&m)) {
                assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn lipschitz_in_physical_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sp = Spacing::new(0.8, 1.3, 2.5).unwrap();
        let dims = Dims::new(12, 10, 6).unwrap();
        let bits: Vec<bool> = (0..dims.len()).map(|_| rng.gen_bool(0.03)).collect();
        let m = BinaryMask::new(dims, bits, sp).unwrap();
        let f = edt(&m).unwrap();
        for i in 0..dims.len() {
            let c = dims.coords(i);
            for (a, step) in sp.as_array().iter().enumerate() {
                let mut off = [0isize; 3];
                off[a] = 1;
                if let Some(j) = dims.offset(c, off) {
                    assert!((f.at(i) - f.at(j)).abs() <= step + 1e-12);
                }
            }
        }
    }
}
