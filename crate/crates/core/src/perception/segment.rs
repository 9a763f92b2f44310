use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::projection::RangeImage;

/// Per-cell segment labels: 0 is background, `1..=segment_count` segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLabeling {
    pub rows: usize,
    pub cols: usize,
    pub labels: Vec<u32>,
    pub segment_count: u32,
}

impl SegmentLabeling {
    pub fn background(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            labels: vec![0; rows * cols],
            segment_count: 0,
        }
    }

    /// Cell indices of every segment, indexed by `label - 1`.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.segment_count as usize];
        for (idx, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                out[l as usize - 1].push(idx);
            }
        }
        out
    }

    /// Relabels to `1..=n` in order of first appearance, keeping 0 as 0.
    pub fn compacted(labels: Vec<u32>, rows: usize, cols: usize) -> Self {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut next = 0u32;
        let labels = labels
            .into_iter()
            .map(|l| {
                if l == 0 {
                    0
                } else {
                    *map.entry(l).or_insert_with(|| {
                        next += 1;
                        next
                    })
                }
            })
            .collect();
        Self {
            rows,
            cols,
            labels,
            segment_count: next,
        }
    }

    /// Checks the partition invariant against an image: filled cells carry a
    /// label in `1..=segment_count`, empty cells carry 0, and every label is used.
    pub fn is_partition_of(&self, image: &RangeImage) -> bool {
        if self.rows != image.rows()
            || self.cols != image.cols()
            || self.labels.len() != image.len()
        {
            return false;
        }
        let mut used = vec![false; self.segment_count as usize];
        for (cell, &l) in image.cells().iter().zip(&self.labels) {
            match (cell, l) {
                (None, 0) => {}
                (Some(_), l) if l >= 1 && l <= self.segment_count => used[l as usize - 1] = true,
                _ => return false,
            }
        }
        used.into_iter().all(|u| u)
    }
}

/// Breadth-first flood fill over the 4-neighbourhood. Azimuth wraps, rings
/// do not. Neighbours connect when their ranges differ by less than
/// `range_threshold`.
pub fn bfs_segment(image: &RangeImage, range_threshold: f64) -> SegmentLabeling {
    let (rows, cols) = (image.rows(), image.cols());
    let cells = image.cells();
    let mut labels = vec![0u32; cells.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();

    for start in 0..cells.len() {
        if cells[start].is_none() || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let range = cells[idx].as_ref().map_or(0.0, |c| c.range);
            let (row, col) = (idx / cols, idx % cols);
            let left = if col == 0 { cols - 1 } else { col - 1 };
            let right = if col + 1 == cols { 0 } else { col + 1 };
            let mut neighbours = [None; 4];
            neighbours[0] = Some(row * cols + left);
            neighbours[1] = Some(row * cols + right);
            if row > 0 {
                neighbours[2] = Some((row - 1) * cols + col);
            }
            if row + 1 < rows {
                neighbours[3] = Some((row + 1) * cols + col);
            }
            for n in neighbours.into_iter().flatten() {
                if labels[n] != 0 {
                    continue;
                }
                if let Some(c) = &cells[n] {
                    if (c.range - range).abs() < range_threshold {
                        labels[n] = next;
                        queue.push_back(n);
                    }
                }
            }
        }
    }

    SegmentLabeling {
        rows,
        cols,
        labels,
        segment_count: next,
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so the result never depends on visiting order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

type VoxelKey = (i64, i64, i64);

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Single-linkage merge: two segments join when any pair of their points is
/// closer than `merge_distance` in 3D. Applied to a fixed point, so chains of
/// close segments collapse into one. Labels are re-compacted.
pub fn agglomerative_merge(
    image: &RangeImage,
    labeling: &SegmentLabeling,
    merge_distance: f64,
) -> SegmentLabeling {
    let n = labeling.segment_count as usize;
    if n < 2 {
        return SegmentLabeling::compacted(labeling.labels.clone(), labeling.rows, labeling.cols);
    }

    // voxel hash with edge = merge_distance; any close pair sits in adjacent voxels
    let key = |p: &[f64; 3]| -> (i64, i64, i64) {
        (
            (p[0] / merge_distance).floor() as i64,
            (p[1] / merge_distance).floor() as i64,
            (p[2] / merge_distance).floor() as i64,
        )
    };
    let mut grid: HashMap<VoxelKey, Vec<(usize, [f64; 3])>> = HashMap::new();
    let mut points = Vec::new();
    for (cell, &label) in image.cells().iter().zip(&labeling.labels) {
        if let (Some(c), true) = (cell, label > 0) {
            let seg = label as usize - 1;
            grid.entry(key(&c.xyz)).or_default().push((seg, c.xyz));
            points.push((seg, c.xyz));
        }
    }

    let limit = merge_distance * merge_distance;
    let mut sets = DisjointSet::new(n);
    for (seg, p) in &points {
        let (kx, ky, kz) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&(kx + dx, ky + dy, kz + dz)) else {
                        continue;
                    };
                    for (other, q) in bucket {
                        if other != seg
                            && dist_sq(p, q) < limit
                            && sets.find(*seg) != sets.find(*other)
                        {
                            sets.union(*seg, *other);
                        }
                    }
                }
            }
        }
    }

    let merged = labeling
        .labels
        .iter()
        .map(|&l| {
            if l == 0 {
                0
            } else {
                sets.find(l as usize - 1) as u32 + 1
            }
        })
        .collect();
    SegmentLabeling::compacted(merged, labeling.rows, labeling.cols)
}
