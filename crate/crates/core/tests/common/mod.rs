#![allow(dead_code)]

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use mme_eval::{BinaryMask, Dims, LabelVolume, Spacing};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Single-file NIfTI-1 image with the payload right after a 352-byte header.
pub fn nifti_bytes(big_endian: bool, dims: [i16; 3], pixdim: [f32; 3], datatype: i16, payload: &[u8]) -> Vec<u8> {
    fn fill<B: ByteOrder>(h: &mut [u8], dims: [i16; 3], pixdim: [f32; 3], datatype: i16, bitpix: i16) {
        B::write_i32(&mut h[0..], 348);
        B::write_i16(&mut h[40..], 3);
        for k in 0..3 {
            B::write_i16(&mut h[42 + 2 * k..], dims[k]);
            B::write_f32(&mut h[80 + 4 * k..], pixdim[k]);
        }
        for k in 3..7 {
            B::write_i16(&mut h[42 + 2 * k..], 1);
        }
        B::write_i16(&mut h[70..], datatype);
        B::write_i16(&mut h[72..], bitpix);
        B::write_f32(&mut h[76..], 1.0);
        B::write_f32(&mut h[108..], 352.0);
        h[344..348].copy_from_slice(b"n+1\0");
    }
    let bitpix = match datatype {
        2 => 8,
        4 => 16,
        _ => 32,
    };
    let mut h = vec![0u8; 352];
    if big_endian {
        fill::<BigEndian>(&mut h, dims, pixdim, datatype, bitpix);
    } else {
        fill::<LittleEndian>(&mut h, dims, pixdim, datatype, bitpix);
    }
    h.extend_from_slice(payload);
    h
}

pub fn gzip(bytes: &[u8]) -> Vec<u8> {
    use std::io::Write;
    let mut e = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
    e.write_all(bytes).unwrap();
    e.finish().unwrap()
}

pub fn random_spacing(rng: &mut ChaCha8Rng) -> Spacing {
    Spacing::new(rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0)).unwrap()
}

/// Axis-aligned ellipsoid of `label` painted into `labels`.
pub fn paint_ellipsoid(labels: &mut [u32], dims: Dims, center: [f64; 3], radii: [f64; 3], label: u32) {
    for i in 0..dims.len() {
        let c = dims.coords(i);
        let q: f64 = (0..3)
            .map(|a| ((c[a] as f64 - center[a]) / radii[a]).powi(2))
            .sum();
        if q <= 1.0 {
            labels[i] = label;
        }
    }
}

/// Up to `max_blobs` random ellipsoids of label 1.
pub fn random_scene(rng: &mut ChaCha8Rng, dims: Dims, max_blobs: usize) -> Vec<u32> {
    let mut labels = vec![0u32; dims.len()];
    let n = rng.gen_range(1..=max_blobs);
    let size = dims.as_array();
    for _ in 0..n {
        let center = size.map(|s| rng.gen_range(0.0..s as f64));
        let radii = size.map(|s| rng.gen_range(0.8..(s as f64 / 3.0).max(1.0)));
        paint_ellipsoid(&mut labels, dims, center, radii, 1);
    }
    if labels.iter().all(|&l| l == 0) {
        labels[rng.gen_range(0..dims.len())] = 1;
    }
    labels
}

/// Shifted, thinned and padded copy of a scene.
pub fn perturbed(rng: &mut ChaCha8Rng, dims: Dims, gt: &[u32]) -> Vec<u32> {
    let shift = [rng.gen_range(-2isize..=2), rng.gen_range(-2isize..=2), rng.gen_range(-1isize..=1)];
    let keep = rng.gen_range(0.5..1.0);
    let mut out = vec![0u32; dims.len()];
    for i in 0..dims.len() {
        if gt[i] != 0 && rng.gen_bool(keep) {
            if let Some(j) = dims.offset(dims.coords(i), shift) {
                out[j] = gt[i];
            }
        }
    }
    if rng.gen_bool(0.5) {
        let size = dims.as_array();
        let center = size.map(|s| rng.gen_range(0.0..s as f64));
        paint_ellipsoid(&mut out, dims, center, [1.5, 1.5, 1.0], 1);
    }
    out
}

pub fn volume(dims: Dims, labels: Vec<u32>, spacing: Spacing) -> LabelVolume {
    LabelVolume::new(dims, labels, spacing).unwrap()
}

pub fn mask(dims: Dims, bits: Vec<bool>, spacing: Spacing) -> BinaryMask {
    BinaryMask::new(dims, bits, spacing).unwrap()
}

pub fn random_mask(rng: &mut ChaCha8Rng, dims: Dims, density: f64, spacing: Spacing) -> BinaryMask {
    mask(dims, (0..dims.len()).map(|_| rng.gen_bool(density)).collect(), spacing)
}

// Brute-force oracles. Each works directly from voxel coordinates.

pub fn physical_distance(dims: Dims, s: Spacing, a: usize, b: usize) -> f64 {
    let (p, q) = (dims.coords(a), dims.coords(b));
    let d = [
        (p[0] as f64 - q[0] as f64) * s.dx,
        (p[1] as f64 - q[1] as f64) * s.dy,
        (p[2] as f64 - q[2] as f64) * s.dz,
    ];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub fn brute_edt(m: &BinaryMask) -> Vec<f64> {
    let dims = m.dims();
    let seeds = m.indices();
    (0..dims.len())
        .map(|i| {
            seeds
                .iter()
                .map(|&s| physical_distance(dims, m.spacing(), i, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Foreground voxels with a background face neighbor; outside counts as
/// background. Single-slice grids use the four in-plane neighbors.
pub fn brute_surface(m: &BinaryMask) -> Vec<usize> {
    let d = m.dims();
    let (w, h, dd) = (d.w as isize, d.h as isize, d.d as isize);
    let mut out = Vec::new();
    for z in 0..dd {
        for y in 0..h {
            for x in 0..w {
                if !m.get(x as usize, y as usize, z as usize) {
                    continue;
                }
                let mut nbrs = vec![(x - 1, y, z), (x + 1, y, z), (x, y - 1, z), (x, y + 1, z)];
                if dd > 1 {
                    nbrs.push((x, y, z - 1));
                    nbrs.push((x, y, z + 1));
                }
                let exposed = nbrs.iter().any(|&(a, b, c)| {
                    a < 0 || b < 0 || c < 0 || a >= w || b >= h || c >= dd || !m.get(a as usize, b as usize, c as usize)
                });
                if exposed {
                    out.push(d.index(x as usize, y as usize, z as usize));
                }
            }
        }
    }
    out
}

/// Symmetric surface distances, unsorted.
pub fn brute_surface_distances(gt: &BinaryMask, pred: &BinaryMask) -> Option<(Vec<f64>, Vec<f64>)> {
    let (sg, sp) = (brute_surface(gt), brute_surface(pred));
    if sg.is_empty() || sp.is_empty() {
        return None;
    }
    let dims = gt.dims();
    let directed = |from: &[usize], to: &[usize]| -> Vec<f64> {
        from.iter()
            .map(|&a| {
                to.iter()
                    .map(|&b| physical_distance(dims, gt.spacing(), a, b))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    };
    Some((directed(&sg, &sp), directed(&sp, &sg)))
}

/// (avg, p95, max) with p95 interpolated at rank 0.95 * (n - 1).
pub fn brute_hausdorff(gt: &BinaryMask, pred: &BinaryMask) -> Option<(f64, f64, f64)> {
    let (a, b) = brute_surface_distances(gt, pred)?;
    let mut all: Vec<f64> = a.into_iter().chain(b).collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = all.len();
    let avg = all.iter().sum::<f64>() / n as f64;
    let rank = 0.95 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let p95 = all[lo] + (all[hi] - all[lo]) * (rank - lo as f64);
    Some((avg, p95, all[n - 1]))
}

pub fn brute_nsd(gt: &BinaryMask, pred: &BinaryMask, tau: f64) -> Option<f64> {
    let (a, b) = brute_surface_distances(gt, pred)?;
    let n = a.len() + b.len();
    let hits = a.iter().chain(b.iter()).filter(|&&d| d <= tau + 1e-9).count();
    Some(hits as f64 / n as f64)
}

/// (tp, fp, fn, tn) voxel counts.
pub fn brute_confusion(gt: &BinaryMask, pred: &BinaryMask) -> [u64; 4] {
    let mut c = [0u64; 4];
    for (g, p) in gt.bits().iter().zip(pred.bits()) {
        let k = match (g, p) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        };
        c[k] += 1;
    }
    c
}

/// Components as sorted voxel lists, ordered by their first voxel. Two
/// voxels touch when every coordinate differs by at most one and at most
/// `max_axes` coordinates differ.
pub fn brute_components(m: &BinaryMask, max_axes: usize) -> Vec<Vec<usize>> {
    let dims = m.dims();
    let fg = m.indices();
    let touches = |a: usize, b: usize| {
        let (p, q) = (dims.coords(a), dims.coords(b));
        let diffs: Vec<usize> = (0..3).map(|k| p[k].abs_diff(q[k])).collect();
        diffs.iter().all(|&d| d <= 1) && diffs.iter().filter(|&&d| d == 1).count() <= max_axes
    };
    let mut label = vec![usize::MAX; fg.len()];
    let mut comps = Vec::new();
    for start in 0..fg.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        label[start] = id;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(fg[i]);
            for j in 0..fg.len() {
                if label[j] == usize::MAX && touches(fg[i], fg[j]) {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps.sort_by_key(|c| c[0]);
    comps
}
