//! Reference implementations used as oracles. None of them calls the code
//! they check.

#![allow(dead_code)]

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

#[derive(Debug, Clone)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec4,
    pub cov: Mat4,
}

fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Textbook GM-PHD prediction: constant velocity, white acceleration with
/// standard deviation `sigma_a`, births appended.
pub fn textbook_predict(
    mixture: &[Component],
    births: &[Component],
    p_s: f64,
    sigma_a: f64,
    dt: f64,
) -> Vec<Component> {
    let f: Mat4 = [
        [1.0, 0.0, dt, 0.0],
        [0.0, 1.0, 0.0, dt],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let q2 = sigma_a * sigma_a;
    let (a, b, c) = (q2 * dt.powi(4) / 4.0, q2 * dt.powi(3) / 2.0, q2 * dt * dt);
    let q: Mat4 = [
        [a, 0.0, b, 0.0],
        [0.0, a, 0.0, b],
        [b, 0.0, c, 0.0],
        [0.0, b, 0.0, c],
    ];
    let mut out: Vec<Component> = mixture
        .iter()
        .map(|comp| {
            let m = comp.mean;
            let mean = [m[0] + dt * m[2], m[1] + dt * m[3], m[2], m[3]];
            let fp = mat_mul(&f, &comp.cov);
            let mut cov = mat_mul(&fp, &transpose(&f));
            for i in 0..4 {
                for j in 0..4 {
                    cov[i][j] += q[i][j];
                }
            }
            Component {
                weight: p_s * comp.weight,
                mean,
                cov,
            }
        })
        .collect();
    out.extend(births.iter().cloned());
    out
}

/// Textbook GM-PHD update with H = [I 0], R = σ²I: missed-detection terms
/// first, then one term per (detection, component).
pub fn textbook_update(
    predicted: &[Component],
    detections: &[[f64; 2]],
    p_d: f64,
    clutter: f64,
    sigma_r: f64,
) -> Vec<Component> {
    let mut out: Vec<Component> = predicted
        .iter()
        .map(|c| Component {
            weight: (1.0 - p_d) * c.weight,
            ..c.clone()
        })
        .collect();
    for z in detections {
        let mut terms = Vec::new();
        for c in predicted {
            let p = &c.cov;
            // S = H P Hᵀ + R: the top-left 2×2 block plus noise.
            let s = [
                [p[0][0] + sigma_r * sigma_r, p[0][1]],
                [p[1][0], p[1][1] + sigma_r * sigma_r],
            ];
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            let s_inv = [
                [s[1][1] / det, -s[0][1] / det],
                [-s[1][0] / det, s[0][0] / det],
            ];
            // K = P Hᵀ S⁻¹: P's first two columns times S⁻¹.
            let mut k = [[0.0; 2]; 4];
            for i in 0..4 {
                for j in 0..2 {
                    k[i][j] = p[i][0] * s_inv[0][j] + p[i][1] * s_inv[1][j];
                }
            }
            let nu = [z[0] - c.mean[0], z[1] - c.mean[1]];
            let mahal = nu[0] * (s_inv[0][0] * nu[0] + s_inv[0][1] * nu[1])
                + nu[1] * (s_inv[1][0] * nu[0] + s_inv[1][1] * nu[1]);
            let q = (-0.5 * mahal).exp() / (2.0 * std::f64::consts::PI * det.sqrt());
            let mut mean = c.mean;
            for i in 0..4 {
                mean[i] += k[i][0] * nu[0] + k[i][1] * nu[1];
            }
            // P ← (I − K H) P.
            let mut cov = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    cov[i][j] = p[i][j] - (k[i][0] * p[0][j] + k[i][1] * p[1][j]);
                }
            }
            terms.push(Component {
                weight: p_d * c.weight * q,
                mean,
                cov,
            });
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        for t in &mut terms {
            t.weight /= clutter + total;
        }
        out.extend(terms);
    }
    out
}

/// Connected components of the points under "distance < cutoff", by
/// union-find over every pair. Labels are 1-based in first-appearance order.
pub fn connected_components_3d(points: &[[f64; 3]], cutoff: f64) -> Vec<u32> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let c2 = cutoff * cutoff;
    for i in 0..n {
        for j in i + 1..n {
            let d2: f64 = (0..3).map(|k| (points[i][k] - points[j][k]).powi(2)).sum();
            if d2 < c2 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut ids = std::collections::HashMap::new();
    (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            let next = ids.len() as u32 + 1;
            *ids.entry(root).or_insert(next)
        })
        .collect()
}

/// True when the two labelings induce the same partition.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    use std::collections::HashMap;
    let mut ab: HashMap<u32, u32> = HashMap::new();
    let mut ba: HashMap<u32, u32> = HashMap::new();
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(&x, &y)| *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x)
}

/// Closest approach of two constant-velocity points by sampling
/// `t = 0, step, 2·step, …, horizon`. Returns (min distance, time of min).
pub fn sampled_cpa(
    p_a: [f64; 2],
    v_a: [f64; 2],
    p_b: [f64; 2],
    v_b: [f64; 2],
    step: f64,
    horizon: f64,
) -> (f64, f64) {
    let samples = (horizon / step).ceil() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=samples {
        let t = k as f64 * step;
        let dx = (p_b[0] + v_b[0] * t) - (p_a[0] + v_a[0] * t);
        let dy = (p_b[1] + v_b[1] * t) - (p_a[1] + v_a[1] * t);
        let d = (dx * dx + dy * dy).sqrt();
        if d < best.0 {
            best = (d, t);
        }
    }
    best
}

/// Indices of the vectors no other vector dominates, in input order.
pub fn brute_force_front(vectors: &[[f64; 4]]) -> Vec<usize> {
    let dominates = |a: &[f64; 4], b: &[f64; 4]| {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    };
    (0..vectors.len())
        .filter(|&i| !vectors.iter().any(|other| dominates(other, &vectors[i])))
        .collect()
}

/// Smallest distance between a moving point and the edge of a moving disc,
/// sampled every `step` seconds up to `horizon`.
pub fn simulated_disc_clearance(
    p_ego: [f64; 2],
    v_ego: [f64; 2],
    p_disc: [f64; 2],
    v_disc: [f64; 2],
    radius: f64,
    step: f64,
    horizon: f64,
) -> f64 {
    sampled_cpa(p_ego, v_ego, p_disc, v_disc, step, horizon).0 - radius
}

/// East/north velocity of a compass heading (radians clockwise from north).
pub fn compass_velocity(heading: f64, speed: f64) -> [f64; 2] {
    [speed * heading.sin(), speed * heading.cos()]
}
