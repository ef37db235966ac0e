use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ShapeLabel;

/// `counts[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        Self {
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if k == 0 || counts.iter().any(|r| r.len() != k) {
            return Err(Error::ShapeMismatch("confusion matrix must be square and nonempty".into()));
        }
        Ok(Self { counts })
    }

    pub fn from_labels(actual: &[ShapeLabel], predicted: &[ShapeLabel]) -> Result<Self> {
        let a: Vec<usize> = actual.iter().map(|l| l.ordinal()).collect();
        let p: Vec<usize> = predicted.iter().map(|l| l.ordinal()).collect();
        confusion_matrix(&a, &p, ShapeLabel::ALL.len())
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual][predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.counts[i][i]).sum()
    }

    /// Support of class `c`.
    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    /// Number of predictions of class `c`.
    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    /// Simultaneous row/column permutation: new class `i` is old class `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            counts: perm
                .iter()
                .map(|&r| perm.iter().map(|&c| self.counts[r][c]).collect())
                .collect(),
        }
    }
}

pub fn confusion_matrix(actual: &[usize], predicted: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} actual labels vs {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(k);
    for (&a, &p) in actual.iter().zip(predicted) {
        if a >= k || p >= k {
            return Err(Error::invalid(format!("label pair ({a}, {p}) outside 0..{k}")));
        }
        cm.counts[a][p] += 1;
    }
    Ok(cm)
}
