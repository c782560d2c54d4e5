//! Medial-axis extraction by directional parallel thinning.
//!
//! Border voxels are peeled one direction at a time (six directions in 3D,
//! four in a depth-one image). A voxel is removed only if it is simple,
//! meaning its deletion keeps the number of foreground components, holes
//! and cavities, and it is not the end of an arc. Candidates found in one
//! sub-iteration are re-checked sequentially before deletion so parallel
//! removal cannot disconnect the object.
//!
//! Simplicity is decided with topological numbers: in 3D with (26, 6)
//! adjacency a voxel is simple iff the foreground of its 26-neighborhood
//! forms one 26-component and the background of its 18-neighborhood has
//! exactly one 6-component touching a face neighbor. In 2D the same test
//! uses (8, 4) adjacency.

use std::sync::OnceLock;

use crate::volume::{Dims, Segment};

/// Thin centerline of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    voxels: Vec<usize>,
    parent_segment_id: u32,
}

impl Skeleton {
    /// Sorted global linear indices.
    pub fn voxels(&self) -> &[usize] {
        &self.voxels
    }

    pub fn parent_segment_id(&self) -> u32 {
        self.parent_segment_id
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }
}

pub fn skeletonize(segment: &Segment) -> Skeleton {
    let dims = segment.dims();
    let bb = segment.bounding_box();
    let ext = bb.extent();
    let planar = dims.is_planar();
    let pad_z = if planar { 0 } else { 1 };
    let local = Dims {
        w: ext.w + 2,
        h: ext.h + 2,
        d: ext.d + 2 * pad_z,
    };
    let to_local = |c: [usize; 3]| {
        local.index(
            c[0] - bb.min[0] + 1,
            c[1] - bb.min[1] + 1,
            c[2] - bb.min[2] + pad_z,
        )
    };

    let mut grid = vec![false; local.len()];
    for c in segment.coords() {
        grid[to_local(c)] = true;
    }

    if planar {
        thin_2d(&mut grid, local);
    } else {
        thin_3d(&mut grid, local);
    }

    let mut voxels: Vec<usize> = grid
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| {
            let c = local.coords(i);
            dims.index(
                c[0] + bb.min[0] - 1,
                c[1] + bb.min[1] - 1,
                c[2] + bb.min[2] - pad_z,
            )
        })
        .collect();
    voxels.sort_unstable();

    Skeleton {
        voxels,
        parent_segment_id: segment.id(),
    }
}

struct Tables {
    /// Adjacency masks over cube positions, `(dx+1) + 3(dy+1) + 9(dz+1)`.
    adj26: [u32; 27],
    /// 6-adjacency restricted to the 18-neighborhood.
    adj6_n18: [u32; 27],
    n26: u32,
    n18: u32,
    faces: u32,
}

fn cube_pos(p: usize) -> [i32; 3] {
    [(p % 3) as i32 - 1, ((p / 3) % 3) as i32 - 1, (p / 9) as i32 - 1]
}

fn tables_3d() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let nonzero = |c: [i32; 3]| c.iter().filter(|&&v| v != 0).count();
        let mut t = Tables {
            adj26: [0; 27],
            adj6_n18: [0; 27],
            n26: 0,
            n18: 0,
            faces: 0,
        };
        for p in 0..27 {
            let c = cube_pos(p);
            match nonzero(c) {
                0 => {}
                1 => {
                    t.faces |= 1 << p;
                    t.n18 |= 1 << p;
                    t.n26 |= 1 << p;
                }
                2 => {
                    t.n18 |= 1 << p;
                    t.n26 |= 1 << p;
                }
                _ => t.n26 |= 1 << p,
            }
        }
        for p in 0..27 {
            for q in 0..27 {
                if p == q {
                    continue;
                }
                let (a, b) = (cube_pos(p), cube_pos(q));
                let diff: Vec<i32> = (0..3).map(|k| (a[k] - b[k]).abs()).collect();
                if diff.iter().all(|&d| d <= 1) {
                    t.adj26[p] |= 1 << q;
                }
                if diff.iter().sum::<i32>() == 1 && (t.n18 >> p) & 1 == 1 && (t.n18 >> q) & 1 == 1 {
                    t.adj6_n18[p] |= 1 << q;
                }
            }
        }
        t
    })
}

struct Tables2d {
    adj8: [u32; 9],
    adj4: [u32; 9],
    n8: u32,
    edges: u32,
}

fn tables_2d() -> &'static Tables2d {
    static TABLES: OnceLock<Tables2d> = OnceLock::new();
    TABLES.get_or_init(|| {
        let pos = |p: usize| [(p % 3) as i32 - 1, (p / 3) as i32 - 1];
        let mut t = Tables2d {
            adj8: [0; 9],
            adj4: [0; 9],
            n8: 0,
            edges: 0,
        };
        for p in 0..9 {
            let c = pos(p);
            if c != [0, 0] {
                t.n8 |= 1 << p;
                if c[0] == 0 || c[1] == 0 {
                    t.edges |= 1 << p;
                }
            }
        }
        for p in 0..9 {
            for q in 0..9 {
                if p == q || (t.n8 >> p) & 1 == 0 || (t.n8 >> q) & 1 == 0 {
                    continue;
                }
                let (a, b) = (pos(p), pos(q));
                let (dx, dy) = ((a[0] - b[0]).abs(), (a[1] - b[1]).abs());
                if dx <= 1 && dy <= 1 {
                    t.adj8[p] |= 1 << q;
                }
                if dx + dy == 1 {
                    t.adj4[p] |= 1 << q;
                }
            }
        }
        t
    })
}

/// Components of `set` under `adj`, counting only those meeting `touch`.
fn count_components(mut set: u32, adj: &[u32], touch: u32) -> u32 {
    let mut count = 0;
    while set != 0 {
        let seed = set.trailing_zeros();
        let mut comp = 1u32 << seed;
        let mut frontier = comp;
        while frontier != 0 {
            let p = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let grow = adj[p] & set & !comp;
            comp |= grow;
            frontier |= grow;
        }
        set &= !comp;
        if comp & touch != 0 {
            count += 1;
        }
    }
    count
}

fn neighborhood_3d(grid: &[bool], dims: Dims, i: usize) -> u32 {
    let (sy, sz) = (dims.w as isize, (dims.w * dims.h) as isize);
    let mut bits = 0u32;
    for p in 0..27 {
        let c = cube_pos(p);
        let j = i as isize + c[0] as isize + c[1] as isize * sy + c[2] as isize * sz;
        if grid[j as usize] {
            bits |= 1 << p;
        }
    }
    bits & !(1 << 13)
}

fn is_simple_3d(nb: u32) -> bool {
    let t = tables_3d();
    let fg = nb & t.n26;
    if count_components(fg, &t.adj26, u32::MAX) != 1 {
        return false;
    }
    let bg = !nb & t.n18;
    count_components(bg, &t.adj6_n18, t.faces) == 1
}

fn thin_3d(grid: &mut [bool], dims: Dims) {
    let (sx, sy, sz) = (1isize, dims.w as isize, (dims.w * dims.h) as isize);
    let directions = [-sy, sy, sx, -sx, sz, -sz];
    let mut fg: Vec<usize> = (0..grid.len()).filter(|&i| grid[i]).collect();
    let mut candidates = Vec::new();

    let mut unchanged = 0;
    while unchanged < directions.len() {
        unchanged = 0;
        for &dir in &directions {
            candidates.clear();
            for &i in &fg {
                if !grid[i] || grid[(i as isize + dir) as usize] {
                    continue;
                }
                let nb = neighborhood_3d(grid, dims, i);
                if nb.count_ones() == 1 {
                    continue;
                }
                if is_simple_3d(nb) {
                    candidates.push(i);
                }
            }
            let mut changed = false;
            for &i in &candidates {
                if is_simple_3d(neighborhood_3d(grid, dims, i)) {
                    grid[i] = false;
                    changed = true;
                }
            }
            if changed {
                fg.retain(|&i| grid[i]);
            } else {
                unchanged += 1;
            }
        }
    }
}

fn neighborhood_2d(grid: &[bool], dims: Dims, i: usize) -> u32 {
    let sy = dims.w as isize;
    let mut bits = 0u32;
    for p in 0..9 {
        let (dx, dy) = ((p % 3) as isize - 1, (p / 3) as isize - 1);
        if grid[(i as isize + dx + dy * sy) as usize] {
            bits |= 1 << p;
        }
    }
    bits & !(1 << 4)
}

fn is_simple_2d(nb: u32) -> bool {
    let t = tables_2d();
    let fg = nb & t.n8;
    if count_components(fg, &t.adj8, u32::MAX) != 1 {
        return false;
    }
    let bg = !nb & t.n8;
    count_components(bg, &t.adj4, t.edges) == 1
}

fn thin_2d(grid: &mut [bool], dims: Dims) {
    let sy = dims.w as isize;
    let directions = [-sy, sy, 1, -1];
    let mut fg: Vec<usize> = (0..grid.len()).filter(|&i| grid[i]).collect();
    let mut candidates = Vec::new();

    let mut unchanged = 0;
    while unchanged < directions.len() {
        unchanged = 0;
        for &dir in &directions {
            candidates.clear();
            for &i in &fg {
                if !grid[i] || grid[(i as isize + dir) as usize] {
                    continue;
                }
                let nb = neighborhood_2d(grid, dims, i);
                if nb.count_ones() == 1 {
                    continue;
                }
                if is_simple_2d(nb) {
                    candidates.push(i);
                }
            }
            let mut changed = false;
            for &i in &candidates {
                if is_simple_2d(neighborhood_2d(grid, dims, i)) {
                    grid[i] = false;
                    changed = true;
                }
            }
            if changed {
                fg.retain(|&i| grid[i]);
            } else {
                unchanged += 1;
            }
        }
    }
}
