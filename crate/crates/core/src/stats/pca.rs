use serde::{Deserialize, Serialize};

use super::linalg::symmetric_eigen;
use super::DataMatrix;
use crate::error::{Error, Result};

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentSelector {
    Fixed(usize),
    /// Smallest k whose cumulative explained variance reaches the fraction.
    VarianceFraction(f64),
}

/// PCA on standardized columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    /// Population sd per column; zero-variance columns use 1.
    pub scales: Vec<f64>,
    /// `d x k` row-major; column j is the j-th component.
    pub components: Vec<f64>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Every eigenvalue of the standardized covariance (length d).
    pub all_eigenvalues: Vec<f64>,
    pub d: usize,
    pub k: usize,
}

impl PcaModel {
    /// Fraction of the total variance carried by each retained component.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.all_eigenvalues.iter().sum();
        self.eigenvalues
            .iter()
            .map(|l| if total > 0.0 { l / total } else { 0.0 })
            .collect()
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        (0..self.d).map(|r| self.components[r * self.k + j]).collect()
    }

    pub fn standardize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.d {
            return Err(Error::ShapeMismatch(format!("row of {} for PCA on {}", row.len(), self.d)));
        }
        let z = self.standardize_row(row);
        Ok((0..self.k)
            .map(|j| (0..self.d).map(|r| z[r] * self.components[r * self.k + j]).sum())
            .collect())
    }

    pub fn transform(&self, x: &DataMatrix) -> Result<DataMatrix> {
        let rows = x.rows().map(|r| self.transform_row(r)).collect::<Result<Vec<_>>>()?;
        DataMatrix::from_rows(&rows)
    }

    /// Maps scores back to standardized feature space.
    pub fn inverse_transform_row(&self, scores: &[f64]) -> Vec<f64> {
        (0..self.d)
            .map(|r| (0..self.k).map(|j| scores[j] * self.components[r * self.k + j]).sum())
            .collect()
    }
}

pub fn pca_fit(x: &DataMatrix, selector: ComponentSelector) -> Result<PcaModel> {
    let (n, d) = (x.n(), x.d());
    if n < 2 {
        return Err(Error::invalid(format!("PCA needs at least 2 rows, got {n}")));
    }
    let means = x.column_means();
    let scales: Vec<f64> = (0..d)
        .map(|j| {
            let var = x.rows().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n as f64;
            if var > 0.0 { var.sqrt() } else { 1.0 }
        })
        .collect();

    let mut cov = vec![0.0; d * d];
    for row in x.rows() {
        let z: Vec<f64> = (0..d).map(|j| (row[j] - means[j]) / scales[j]).collect();
        for i in 0..d {
            for j in i..d {
                cov[i * d + j] += z[i] * z[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i * d + j] /= n as f64;
            cov[j * d + i] = cov[i * d + j];
        }
    }

    let (mut vals, vecs) = symmetric_eigen(&cov, d)?;
    // Covariance is PSD; clip round-off negatives.
    vals.iter_mut().for_each(|v| *v = v.max(0.0));

    let k = match selector {
        ComponentSelector::Fixed(k) => {
            if k == 0 || k > d {
                return Err(Error::invalid(format!("k = {k} outside 1..={d}")));
            }
            k
        }
        ComponentSelector::VarianceFraction(theta) => {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(Error::invalid(format!("variance fraction {theta} outside (0, 1]")));
            }
            let total: f64 = vals.iter().sum();
            if total <= 0.0 {
                1
            } else {
                let mut acc = 0.0;
                let mut k = d;
                for (i, v) in vals.iter().enumerate() {
                    acc += v;
                    if acc / total >= theta - 1e-12 {
                        k = i + 1;
                        break;
                    }
                }
                k
            }
        }
    };

    let mut components = vec![0.0; d * k];
    for r in 0..d {
        components[r * k..(r + 1) * k].copy_from_slice(&vecs[r * d..r * d + k]);
    }
    Ok(PcaModel {
        means,
        scales,
        components,
        eigenvalues: vals[..k].to_vec(),
        all_eigenvalues: vals,
        d,
        k,
    })
}
