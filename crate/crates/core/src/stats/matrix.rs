use crate::anthro::DatasetTable;
use crate::error::{Error, Result};

/// Dense `n x d` sample matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!("data matrix must be non-empty, got {n}x{d}")));
        }
        if values.len() != n * d {
            return Err(Error::ShapeMismatch(format!("{} values for {n}x{d}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("data matrix entry {v}")));
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(format!("ragged row of length {}", bad.len())));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn from_table(table: &DatasetTable) -> Result<Self> {
        Self::from_rows(table.rows())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for row in self.rows() {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    /// Applies `f` to every entry, keeping the shape.
    pub fn map(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let d = self.d;
        Self {
            n: self.n,
            d,
            values: self.values.iter().enumerate().map(|(i, &v)| f(i % d, v)).collect(),
        }
    }
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
