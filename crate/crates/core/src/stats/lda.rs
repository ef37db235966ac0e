//! Fisher linear discriminant analysis.

use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, lower_inverse, matmul, symmetric_eigen, transpose};
use super::{sq_dist, DataMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub d: usize,
    pub k: usize,
    /// `d x k` row-major projection basis, scaled so each axis has unit
    /// within-class variance (`w' Sw w = 1`).
    pub basis: Vec<f64>,
    /// Class indices present in training, ascending.
    pub classes: Vec<usize>,
    /// Per-class mean in input space (`classes.len() x d`).
    pub class_means: Vec<f64>,
    /// Per-class mean in projected space (`classes.len() x k`).
    pub projected_means: Vec<f64>,
    /// Generalized eigenvalues (between/within scatter ratio) of the axes.
    pub eigenvalues: Vec<f64>,
}

impl LdaModel {
    pub fn project_row(&self, row: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|j| (0..self.d).map(|r| row[r] * self.basis[r * self.k + j]).sum())
            .collect()
    }

    pub fn axis(&self, j: usize) -> Vec<f64> {
        (0..self.d).map(|r| self.basis[r * self.k + j]).collect()
    }

    /// Nearest projected class mean; ties to the lower class index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let p = self.project_row(row);
        let (mut best, mut best_d) = (self.classes[0], f64::INFINITY);
        for (ci, &class) in self.classes.iter().enumerate() {
            let dist = sq_dist(&p, &self.projected_means[ci * self.k..(ci + 1) * self.k]);
            if dist < best_d {
                best = class;
                best_d = dist;
            }
        }
        best
    }

    pub fn predict(&self, x: &DataMatrix) -> Vec<usize> {
        x.rows().map(|r| self.predict_row(r)).collect()
    }
}

/// Fits `k` discriminant axes maximizing between- over within-class scatter.
///
/// Each diagonal entry of the within-class scatter is inflated by a factor
/// `1 + 1e-6` (zero entries get `1e-6 * trace / d`);
/// the generalized problem is reduced to a symmetric one through its
/// Cholesky factor. Axes come out whitened, so projected distances are
/// Mahalanobis distances under the pooled within-class covariance.
pub fn lda_fit(x: &DataMatrix, labels: &[usize], k: usize) -> Result<LdaModel> {
    let (n, d) = (x.n(), x.d());
    if labels.len() != n {
        return Err(Error::ShapeMismatch(format!("{} labels for {n} rows", labels.len())));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::invalid("LDA needs at least 2 classes"));
    }
    if k == 0 || k > classes.len() - 1 {
        return Err(Error::invalid(format!(
            "k = {k} must be in 1..={}",
            classes.len() - 1
        )));
    }
    if k > d {
        return Err(Error::invalid(format!("k = {k} exceeds feature count {d}")));
    }
    let nc = classes.len();
    let class_pos = |l: usize| classes.binary_search(&l).unwrap();
    let mut counts = vec![0usize; nc];
    let mut means = vec![0.0; nc * d];
    for (row, &l) in x.rows().zip(labels) {
        let c = class_pos(l);
        counts[c] += 1;
        for (m, v) in means[c * d..(c + 1) * d].iter_mut().zip(row) {
            *m += v;
        }
    }
    if let Some(c) = counts.iter().position(|&n| n < 2) {
        return Err(Error::invalid(format!("class {} has fewer than 2 samples", classes[c])));
    }
    for c in 0..nc {
        means[c * d..(c + 1) * d].iter_mut().for_each(|v| *v /= counts[c] as f64);
    }
    let grand = x.column_means();

    let mut sw = vec![0.0; d * d];
    for (row, &l) in x.rows().zip(labels) {
        let c = class_pos(l);
        let diff: Vec<f64> = (0..d).map(|j| row[j] - means[c * d + j]).collect();
        for i in 0..d {
            for j in 0..d {
                sw[i * d + j] += diff[i] * diff[j];
            }
        }
    }
    let mut sb = vec![0.0; d * d];
    for c in 0..nc {
        let diff: Vec<f64> = (0..d).map(|j| means[c * d + j] - grand[j]).collect();
        for i in 0..d {
            for j in 0..d {
                sb[i * d + j] += counts[c] as f64 * diff[i] * diff[j];
            }
        }
    }
    // Relative ridge: scales with each feature, so diagonal rescaling of the
    // inputs leaves the fitted classifier unchanged.
    let trace: f64 = (0..d).map(|i| sw[i * d + i]).sum();
    for i in 0..d {
        let own = sw[i * d + i];
        sw[i * d + i] += 1e-6 * if own > 0.0 { own } else { trace / d as f64 };
    }

    let l = cholesky(&sw, d).map_err(|_| Error::Singular("within-class scatter".into()))?;
    let li = lower_inverse(&l, d);
    let lit = transpose(&li, d, d);
    let mut sym = matmul(&matmul(&li, &sb, d, d, d), &lit, d, d, d);
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (sym[i * d + j] + sym[j * d + i]);
            sym[i * d + j] = avg;
            sym[j * d + i] = avg;
        }
    }
    let (vals, vecs) = symmetric_eigen(&sym, d)?;
    // Back-transform: w = L^-T v.
    let w_all = matmul(&lit, &vecs, d, d, d);
    let mut basis = vec![0.0; d * k];
    for j in 0..k {
        let col: Vec<f64> = (0..d).map(|r| w_all[r * d + j]).collect();
        let big = col.iter().cloned().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d {
            basis[r * k + j] = sign * col[r];
        }
    }

    let mut model = LdaModel {
        d,
        k,
        basis,
        classes: classes.clone(),
        class_means: means.clone(),
        projected_means: Vec::new(),
        eigenvalues: vals[..k].to_vec(),
    };
    model.projected_means = means.chunks_exact(d).flat_map(|m| model.project_row(m)).collect();
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn one_dimensional_two_classes() {
        let rows: Vec<Vec<f64>> = [-1.2, -1.0, -0.8, 0.8, 1.0, 1.2].iter().map(|&v| vec![v]).collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let m = lda_fit(&x, &[0, 0, 0, 1, 1, 1], 1).unwrap();
        assert!(m.basis[0] > 0.0);
        assert_eq!(m.predict(&x), vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn axis_aligned_separation() {
        let mut rng = SplitMix64::new(4);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for c in 0..2 {
            for _ in 0..200 {
                // Classes differ only along axis 0; axis 1 is shared noise.
                rows.push(vec![c as f64 * 3.0 + rng.normal() * 0.5, rng.normal() * 2.0]);
                labels.push(c);
            }
        }
        // Symmetrize the within-class noise so the optimum is exactly axis 0.
        let n = rows.len();
        for i in 0..n {
            let mirrored = vec![rows[i][0], -rows[i][1]];
            rows.push(mirrored);
            labels.push(labels[i]);
        }
        let x = DataMatrix::from_rows(&rows).unwrap();
        let m = lda_fit(&x, &labels, 1).unwrap();
        let axis = m.axis(0);
        let angle = axis[1].atan2(axis[0]).abs();
        assert!(angle < 1e-6, "angle {angle}");
    }

    #[test]
    fn errors() {
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert!(lda_fit(&x, &[0, 0, 0], 1).is_err());
        assert!(lda_fit(&x, &[0, 0, 1], 1).is_err());
        assert!(lda_fit(&x, &[0, 1], 1).is_err());
        let x = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(lda_fit(&x, &[0, 0, 1, 1], 2).is_err());
        let flat = DataMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        assert!(matches!(lda_fit(&flat, &[0, 0, 1, 1], 1), Err(Error::Singular(_))));
    }
}
