//! Fuzzy c-means by alternating membership and centroid updates.

use serde::{Deserialize, Serialize};

use super::kmeans::kmeans_pp_init;
use super::{sq_dist, DataMatrix};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmConfig {
    pub c: usize,
    pub fuzzifier: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl FcmConfig {
    pub fn new(c: usize, seed: u64) -> Self {
        Self {
            c,
            fuzzifier: 2.0,
            tol: 1e-6,
            max_iter: 300,
            seed,
        }
    }
}

/// State recorded after each membership update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmIteration {
    pub objective: f64,
    /// Largest `|sum_j u_ij - 1|` over rows.
    pub max_row_sum_error: f64,
    pub max_membership_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyModel {
    pub c: usize,
    pub d: usize,
    /// `c x d` row-major.
    pub centroids: Vec<f64>,
    /// `n x c` row-major.
    pub memberships: Vec<f64>,
    pub fuzzifier: f64,
    pub objective: f64,
    pub iterations: usize,
    pub history: Vec<FcmIteration>,
}

impl FuzzyModel {
    pub fn membership_row(&self, i: usize) -> &[f64] {
        &self.memberships[i * self.c..(i + 1) * self.c]
    }

    pub fn memberships_for(&self, row: &[f64]) -> Vec<f64> {
        memberships(row, &self.centroids, self.d, self.fuzzifier)
    }

    /// Index of the largest membership per training row (ties to lowest).
    pub fn hard_assignments(&self) -> Vec<usize> {
        self.memberships
            .chunks_exact(self.c)
            .map(argmax)
            .collect()
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// `u_j = 1 / sum_l (D_j / D_l)^(1/(m-1))` with squared distances `D`.
/// Rows coinciding with one or more centroids split membership among them.
fn memberships(row: &[f64], centroids: &[f64], d: usize, m: f64) -> Vec<f64> {
    let dists: Vec<f64> = centroids.chunks_exact(d).map(|c| sq_dist(row, c)).collect();
    let zeros = dists.iter().filter(|&&v| v == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return dists.iter().map(|&v| if v == 0.0 { share } else { 0.0 }).collect();
    }
    let p = 1.0 / (m - 1.0);
    let logs: Vec<f64> = dists.iter().map(|v| v.ln()).collect();
    let mut u: Vec<f64> = logs
        .iter()
        .map(|&lj| 1.0 / logs.iter().map(|&ll| ((lj - ll) * p).exp()).sum::<f64>())
        .collect();
    // Renormalize so rows sum to 1 to working precision.
    let s: f64 = u.iter().sum();
    u.iter_mut().for_each(|v| *v /= s);
    u
}

fn objective(x: &DataMatrix, u: &[f64], centroids: &[f64], c: usize, m: f64) -> f64 {
    let d = x.d();
    x.rows()
        .enumerate()
        .map(|(i, row)| {
            (0..c)
                .map(|j| u[i * c + j].powf(m) * sq_dist(row, &centroids[j * d..(j + 1) * d]))
                .sum::<f64>()
        })
        .sum()
}

pub fn fcm_fit(x: &DataMatrix, cfg: &FcmConfig) -> Result<FuzzyModel> {
    let (n, d, c, m) = (x.n(), x.d(), cfg.c, cfg.fuzzifier);
    if c < 2 || c > n {
        return Err(Error::invalid(format!("c = {c} must be in 2..={n}")));
    }
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::invalid(format!("fuzzifier must be > 1, got {m}")));
    }
    if cfg.max_iter == 0 || !(cfg.tol >= 0.0) {
        return Err(Error::invalid("max_iter must be >= 1 and tol >= 0"));
    }

    let mut rng = SplitMix64::new(cfg.seed);
    let mut centroids = kmeans_pp_init(x, c, &mut rng)?;
    let compute_u = |centroids: &[f64]| -> Vec<f64> {
        x.rows().flat_map(|r| memberships(r, centroids, d, m)).collect()
    };
    let row_sum_error = |u: &[f64]| -> f64 {
        u.chunks_exact(c)
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    };

    let mut u = compute_u(&centroids);
    let mut history = vec![FcmIteration {
        objective: objective(x, &u, &centroids, c, m),
        max_row_sum_error: row_sum_error(&u),
        max_membership_change: f64::NAN,
    }];
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        // Centroid update: weighted means with weights u^m.
        let mut next = vec![0.0; c * d];
        for j in 0..c {
            let mut wsum = 0.0;
            for (i, row) in x.rows().enumerate() {
                let w = u[i * c + j].powf(m);
                wsum += w;
                for (acc, v) in next[j * d..(j + 1) * d].iter_mut().zip(row) {
                    *acc += w * v;
                }
            }
            if wsum > 0.0 {
                next[j * d..(j + 1) * d].iter_mut().for_each(|v| *v /= wsum);
            } else {
                next[j * d..(j + 1) * d].copy_from_slice(&centroids[j * d..(j + 1) * d]);
            }
        }
        centroids = next;
        let new_u = compute_u(&centroids);
        let delta = new_u
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        u = new_u;
        history.push(FcmIteration {
            objective: objective(x, &u, &centroids, c, m),
            max_row_sum_error: row_sum_error(&u),
            max_membership_change: delta,
        });
        if delta < cfg.tol {
            break;
        }
    }
    Ok(FuzzyModel {
        c,
        d,
        objective: history.last().unwrap().objective,
        centroids,
        memberships: u,
        fuzzifier: m,
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_point_splits_evenly() {
        let u = memberships(&[0.0], &[-1.0, 1.0], 1, 2.0);
        assert_eq!(u, vec![0.5, 0.5]);
    }

    #[test]
    fn coincident_point_gets_full_membership() {
        let u = memberships(&[1.0], &[1.0, 5.0, 1.0], 1, 2.0);
        assert_eq!(u, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn two_points() {
        let x = DataMatrix::new(2, 1, vec![0.0, 10.0]).unwrap();
        let model = fcm_fit(&x, &FcmConfig::new(2, 4)).unwrap();
        let mut c = model.centroids.clone();
        c.sort_by(f64::total_cmp);
        assert!((c[0] - 0.0).abs() < 1e-3 && (c[1] - 10.0).abs() < 1e-3);
        for i in 0..2 {
            let best = model.membership_row(i).iter().cloned().fold(0.0, f64::max);
            assert!(best > 1.0 - 1e-3);
        }
    }

    #[test]
    fn invalid_parameters() {
        let x = DataMatrix::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(fcm_fit(&x, &FcmConfig::new(1, 0)).is_err());
        assert!(fcm_fit(&x, &FcmConfig::new(4, 0)).is_err());
        let mut cfg = FcmConfig::new(2, 0);
        cfg.fuzzifier = 1.0;
        assert!(fcm_fit(&x, &cfg).is_err());
    }
}
