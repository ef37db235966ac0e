//! Cluster-count selection by sweeping k over a range.

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_fit, KMeansConfig, KMeansModel};
use super::{sq_dist, DataMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KCriterion {
    /// Spherical Gaussian, shared variance; higher is better.
    Bic,
    /// Mean sample silhouette; higher is better.
    Silhouette,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelection {
    pub chosen: usize,
    pub criterion: KCriterion,
    /// `(k, score)` for every k in the sweep.
    pub scores: Vec<(usize, f64)>,
    /// Set when every row is identical and no k is meaningful.
    pub degenerate: bool,
}

/// Log-likelihood minus the BIC penalty for a hard k-means partition.
pub fn bic_score(x: &DataMatrix, model: &KMeansModel) -> f64 {
    let (n, d, k) = (x.n() as f64, x.d() as f64, model.k);
    if x.n() <= k {
        return f64::NEG_INFINITY;
    }
    let variance = model.inertia / (d * (n - k as f64));
    if !(variance > 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut sizes = vec![0usize; k];
    for &a in &model.assignments {
        sizes[a] += 1;
    }
    let loglik: f64 = sizes
        .iter()
        .filter(|&&r| r > 0)
        .map(|&r| {
            let r = r as f64;
            r * (r / n).ln() - r * d / 2.0 * (2.0 * std::f64::consts::PI * variance).ln()
        })
        .sum::<f64>()
        - d * (n - k as f64) / 2.0;
    let params = (k as f64 - 1.0) + k as f64 * d + 1.0;
    loglik - params / 2.0 * n.ln()
}

/// Mean silhouette with Euclidean distances; singleton clusters score 0.
pub fn silhouette_score(x: &DataMatrix, assignments: &[usize], k: usize) -> f64 {
    let n = x.n();
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = assignments[i];
        if sizes[own] <= 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if i != j {
                sums[assignments[j]] += sq_dist(x.row(i), x.row(j)).sqrt();
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if b.is_finite() {
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    total / n as f64
}

/// Runs k-means for every k in `k_min..=k_max` and picks the best score.
/// Ties go to the smaller k.
pub fn select_k(
    x: &DataMatrix,
    k_min: usize,
    k_max: usize,
    criterion: KCriterion,
    seed: u64,
) -> Result<KSelection> {
    if k_min < 1 || k_min > k_max {
        return Err(Error::invalid(format!("invalid k range {k_min}..={k_max}")));
    }
    if k_max > x.n() {
        return Err(Error::invalid(format!("k_max = {k_max} exceeds {} rows", x.n())));
    }
    let first = x.row(0);
    if x.rows().all(|r| r == first) {
        return Ok(KSelection {
            chosen: k_min,
            criterion,
            scores: Vec::new(),
            degenerate: true,
        });
    }
    let mut scores = Vec::new();
    for k in k_min..=k_max {
        let model = kmeans_fit(x, &KMeansConfig::new(k, seed))?;
        let score = match criterion {
            KCriterion::Bic => bic_score(x, &model),
            KCriterion::Silhouette => {
                if k < 2 {
                    0.0
                } else {
                    silhouette_score(x, &model.assignments, k)
                }
            }
        };
        scores.push((k, score));
    }
    let chosen = scores
        .iter()
        .fold(None::<(usize, f64)>, |best, &(k, s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((k, s)),
        })
        .map(|(k, _)| k)
        .unwrap_or(k_min);
    Ok(KSelection {
        chosen,
        criterion,
        scores,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn blobs(centers: &[[f64; 2]], per: usize, sigma: f64, seed: u64) -> DataMatrix {
        let mut rng = SplitMix64::new(seed);
        let rows: Vec<Vec<f64>> = centers
            .iter()
            .flat_map(|c| {
                (0..per)
                    .map(|_| vec![c[0] + sigma * rng.normal(), c[1] + sigma * rng.normal()])
                    .collect::<Vec<_>>()
            })
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn four_unit_square_blobs() {
        let x = blobs(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], 50, 0.05, 7);
        for crit in [KCriterion::Bic, KCriterion::Silhouette] {
            let sel = select_k(&x, 2, 5, crit, 1).unwrap();
            assert_eq!(sel.chosen, 4, "{crit:?}: {:?}", sel.scores);
            assert_eq!(sel.scores.len(), 4);
        }
    }

    #[test]
    fn identical_points_are_degenerate() {
        let x = DataMatrix::from_rows(&vec![vec![3.0, 3.0]; 10]).unwrap();
        let sel = select_k(&x, 2, 5, KCriterion::Bic, 0).unwrap();
        assert_eq!(sel.chosen, 2);
        assert!(sel.degenerate);
    }

    #[test]
    fn range_errors() {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(select_k(&x, 2, 5, KCriterion::Bic, 0).is_err());
        assert!(select_k(&x, 3, 2, KCriterion::Bic, 0).is_err());
    }
}
