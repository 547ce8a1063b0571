//! Distance kernels shared by the coverage estimators.
//!
//! All kernels split the targets into fixed blocks processed in parallel and
//! reduce per-block results in block order, so outputs do not depend on the
//! number of worker threads.

use rayon::prelude::*;

use crate::geometry::Design;

const TARGET_BLOCK: usize = 64;
const POINT_TILE: usize = 512;
const LANES: usize = 8;

/// Squared distance, abandoned (returning a value `> bound`) once the partial
/// sum exceeds `bound`. When the result is `<= bound` it is the full sum,
/// always accumulated in the same order.
#[inline]
fn sq_dist_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    let mut s = 0.0;
    for (ca, cb) in a.chunks(LANES).zip(b.chunks(LANES)) {
        let mut part = 0.0;
        for (x, y) in ca.iter().zip(cb) {
            let t = x - y;
            part += t * t;
        }
        s += part;
        if s > bound {
            return s;
        }
    }
    s
}

/// Squared distance with the same accumulation order as the bounded kernel.
#[inline]
pub(crate) fn sq_dist_blocked(a: &[f64], b: &[f64]) -> f64 {
    sq_dist_bounded(a, b, f64::INFINITY)
}

/// For each target row, the squared distance to its nearest design point.
pub(crate) fn min_sq_distances(design: &Design, targets: &[f64]) -> Vec<f64> {
    let d = design.dim();
    if d <= 3 && design.len() >= 256 {
        let index = SortedIndex::new(design);
        return targets.par_chunks(TARGET_BLOCK * d).flat_map_iter(|block| {
            block.chunks_exact(d).map(|t| index.min_sq(t)).collect::<Vec<_>>()
        }).collect();
    }
    let pts = design.as_flat();
    targets
        .par_chunks(TARGET_BLOCK * d)
        .flat_map_iter(|block| {
            let rows: Vec<&[f64]> = block.chunks_exact(d).collect();
            let mut best = vec![f64::INFINITY; rows.len()];
            for tile in pts.chunks(POINT_TILE * d) {
                for (t, b) in rows.iter().zip(best.iter_mut()) {
                    for x in tile.chunks_exact(d) {
                        let s = sq_dist_bounded(t, x, *b);
                        if s < *b {
                            *b = s;
                        }
                    }
                }
            }
            best
        })
        .collect()
}

/// Number of targets within squared distance `r2` of some design point.
pub(crate) fn count_covered(design: &Design, targets: &[f64], r2: f64) -> u64 {
    let d = design.dim();
    let pts = design.as_flat();
    let counts: Vec<u64> = targets
        .par_chunks(TARGET_BLOCK * d)
        .map(|block| {
            block
                .chunks_exact(d)
                .filter(|t| pts.chunks_exact(d).any(|x| sq_dist_bounded(t, x, r2) <= r2))
                .count() as u64
        })
        .collect();
    counts.iter().sum()
}

/// Updates first-hit indices: for every target still unhit, scans design
/// points `from..design.len()` and records the first index within `r2`.
pub(crate) fn first_hits(design: &Design, from: usize, targets: &[f64], r2: f64, hits: &mut [Option<usize>]) {
    let d = design.dim();
    let pts = &design.as_flat()[from * d..];
    targets
        .par_chunks(TARGET_BLOCK * d)
        .zip(hits.par_chunks_mut(TARGET_BLOCK))
        .for_each(|(block, h)| {
            for (t, slot) in block.chunks_exact(d).zip(h.iter_mut()) {
                if slot.is_none() {
                    *slot = pts
                        .chunks_exact(d)
                        .position(|x| sq_dist_bounded(t, x, r2) <= r2)
                        .map(|k| from + k);
                }
            }
        });
}

/// Points sorted along the first axis; nearest-neighbour queries sweep
/// outwards from the target's position and stop once the axis gap alone
/// exceeds the best distance. Effective in low dimension.
struct SortedIndex {
    dim: usize,
    keys: Vec<f64>,
    rows: Vec<f64>,
}

impl SortedIndex {
    fn new(design: &Design) -> Self {
        let d = design.dim();
        let mut order: Vec<usize> = (0..design.len()).collect();
        order.sort_by(|&a, &b| design.point(a)[0].total_cmp(&design.point(b)[0]));
        let mut rows = Vec::with_capacity(design.as_flat().len());
        for &i in &order {
            rows.extend_from_slice(design.point(i));
        }
        let keys = order.iter().map(|&i| design.point(i)[0]).collect();
        SortedIndex { dim: d, keys, rows }
    }

    fn min_sq(&self, t: &[f64]) -> f64 {
        let d = self.dim;
        let n = self.keys.len();
        let start = self.keys.partition_point(|&k| k < t[0]);
        let mut best = f64::INFINITY;
        let mut up = start;
        let mut down = start;
        loop {
            let mut progressed = false;
            if up < n {
                let gap = self.keys[up] - t[0];
                if gap * gap <= best {
                    best = best.min(sq_dist_blocked(t, &self.rows[up * d..(up + 1) * d]));
                    up += 1;
                    progressed = true;
                } else {
                    up = n;
                }
            }
            if down > 0 {
                let gap = t[0] - self.keys[down - 1];
                if gap * gap <= best {
                    best = best.min(sq_dist_blocked(t, &self.rows[(down - 1) * d..down * d]));
                    down -= 1;
                    progressed = true;
                } else {
                    down = 0;
                }
            }
            if !progressed {
                return best;
            }
        }
    }
}
