//! Lloyd's k-means with k-means++ seeding and best-of-restarts selection.

use serde::{Deserialize, Serialize};

use super::{sq_dist, DataMatrix};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            tol: 1e-6,
            max_iter: 300,
            restarts: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub d: usize,
    /// `k x d` row-major.
    pub centroids: Vec<f64>,
    pub inertia: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Cluster index per training row.
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step of the winning run.
    pub inertia_history: Vec<f64>,
}

impl KMeansModel {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.d..(c + 1) * self.d]
    }

    /// Nearest centroid, ties to the lowest index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        nearest(row, &self.centroids, self.d).0
    }

    pub fn predict(&self, x: &DataMatrix) -> Vec<usize> {
        x.rows().map(|r| self.predict_row(r)).collect()
    }
}

fn nearest(row: &[f64], centroids: &[f64], d: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.chunks_exact(d).enumerate() {
        let dist = sq_dist(row, cen);
        if dist < best.1 {
            best = (c, dist);
        }
    }
    best
}

/// k-means++ seeding: first centroid uniform, later ones drawn with
/// probability proportional to squared distance to the nearest chosen centroid.
pub fn kmeans_pp_init(x: &DataMatrix, k: usize, rng: &mut SplitMix64) -> Result<Vec<f64>> {
    let n = x.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    let mut chosen = vec![false; n];
    let first = rng.below(n);
    chosen[first] = true;
    let mut centroids = x.row(first).to_vec();
    let mut d2: Vec<f64> = x.rows().map(|r| sq_dist(r, x.row(first))).collect();

    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                if acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Round-off can leave `target` at the very end of the range.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // Every remaining row duplicates a centroid; choose among unused rows.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.below(free.len())]
        };
        chosen[pick] = true;
        let row = x.row(pick);
        centroids.extend_from_slice(row);
        for (i, r) in x.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, row));
        }
    }
    Ok(centroids)
}

fn assign(x: &DataMatrix, centroids: &[f64]) -> (Vec<usize>, Vec<f64>) {
    x.rows().map(|r| nearest(r, centroids, x.d())).unzip()
}

struct Run {
    centroids: Vec<f64>,
    assignments: Vec<usize>,
    inertia: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn lloyd(x: &DataMatrix, mut centroids: Vec<f64>, k: usize, tol: f64, max_iter: usize) -> Run {
    let d = x.d();
    let (mut labels, mut dists) = assign(x, &centroids);
    let mut history = vec![dists.iter().sum()];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (row, &c) in x.rows().zip(&labels) {
            counts[c] += 1;
            for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(row) {
                *s += v;
            }
        }
        let mut next = vec![0.0; k * d];
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    next[c * d + j] = sums[c * d + j] / counts[c] as f64;
                }
            }
        }
        // Empty clusters take the point farthest from its centroid.
        let mut taken = vec![false; x.n()];
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..x.n())
                    .filter(|&i| !taken[i])
                    .fold(None::<usize>, |best, i| match best {
                        Some(b) if dists[b] >= dists[i] => Some(b),
                        _ => Some(i),
                    })
                    .expect("k <= n leaves a free row");
                taken[far] = true;
                next[c * d..(c + 1) * d].copy_from_slice(x.row(far));
                dists[far] = 0.0;
            }
        }
        let shift = next
            .chunks_exact(d)
            .zip(centroids.chunks_exact(d))
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        let (new_labels, new_dists) = assign(x, &centroids);
        history.push(new_dists.iter().sum());
        let stable = new_labels == labels;
        labels = new_labels;
        dists = new_dists;
        if stable && shift < tol {
            break;
        }
    }
    Run {
        inertia: dists.iter().sum(),
        centroids,
        assignments: labels,
        iterations,
        history,
    }
}

/// Best of `restarts` seeded Lloyd runs, by inertia (ties keep the earliest).
pub fn kmeans_fit(x: &DataMatrix, cfg: &KMeansConfig) -> Result<KMeansModel> {
    let k = cfg.k;
    if k == 0 || k > x.n() {
        return Err(Error::invalid(format!("k = {k} must be in 1..={}", x.n())));
    }
    if cfg.restarts == 0 || cfg.max_iter == 0 || !(cfg.tol >= 0.0) {
        return Err(Error::invalid("restarts and max_iter must be >= 1, tol >= 0"));
    }
    let mut best: Option<Run> = None;
    for r in 0..cfg.restarts {
        let mut rng = SplitMix64::derive(cfg.seed, r as u64);
        let init = kmeans_pp_init(x, k, &mut rng)?;
        let run = lloyd(x, init, k, cfg.tol, cfg.max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    Ok(KMeansModel {
        k,
        d: x.d(),
        centroids: run.centroids,
        inertia: run.inertia,
        iterations: run.iterations,
        seed: cfg.seed,
        assignments: run.assignments,
        inertia_history: run.history,
    })
}
