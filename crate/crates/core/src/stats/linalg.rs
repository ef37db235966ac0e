//! Small dense symmetric linear algebra: cyclic Jacobi eigendecomposition and
//! Cholesky factorization. Matrices are row-major `d x d` slices.

use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm at which the Jacobi iteration stops.
pub const JACOBI_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of a row-major `d x d` matrix. Each eigenvector is oriented so
/// that its largest-magnitude entry is positive.
pub fn symmetric_eigen(a: &[f64], d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != d * d || d == 0 {
        return Err(Error::ShapeMismatch(format!("{} entries for a {d}x{d} matrix", a.len())));
    }
    for i in 0..d {
        for j in 0..i {
            let (x, y) = (a[i * d + j], a[j * d + i]);
            if (x - y).abs() > 1e-9 * (1.0 + x.abs().max(y.abs())) {
                return Err(Error::invalid("matrix is not symmetric"));
            }
        }
    }
    if let Some(v) = a.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("matrix entry {v}")));
    }

    let mut m = a.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let frob = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[i * d + j] * m[i * d + j];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        let off = off_norm(&m);
        // The relative floor covers matrices whose scale makes the absolute
        // tolerance unreachable in double precision.
        if off < JACOBI_TOL || off <= 1e-15 * frob {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[p * d + p], m[q * d + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (mkp, mkq) = (m[k * d + p], m[k * d + q]);
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let (mpk, mqk) = (m[p * d + k], m[q * d + k]);
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                for k in 0..d {
                    let (vkp, vkq) = (v[k * d + p], v[k * d + q]);
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[j * d + j].total_cmp(&m[i * d + i]).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| m[i * d + i]).collect();
    let mut vectors = vec![0.0; d * d];
    for (col, &src) in order.iter().enumerate() {
        let mut best = 0usize;
        for r in 0..d {
            if v[r * d + src].abs() > v[best * d + src].abs() {
                best = r;
            }
        }
        let sign = if v[best * d + src] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d {
            vectors[r * d + col] = sign * v[r * d + src];
        }
    }
    Ok((values, vectors))
}

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
pub fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::Singular(format!("non-positive pivot {s} at {i}")));
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &[f64], d: usize) -> Vec<f64> {
    let mut inv = vec![0.0; d * d];
    for col in 0..d {
        for i in col..d {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[i * d + k] * inv[k * d + col];
            }
            inv[i * d + col] = s / l[i * d + i];
        }
    }
    inv
}

/// `C = A B` for row-major `A: r x m`, `B: m x c`.
pub fn matmul(a: &[f64], b: &[f64], r: usize, m: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..c {
                out[i * c + j] += aik * b[k * c + j];
            }
        }
    }
    out
}

pub fn transpose(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_symmetric(d: usize, rng: &mut SplitMix64) -> Vec<f64> {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let v = rng.uniform(-5.0, 5.0);
                a[i * d + j] = v;
                a[j * d + i] = v;
            }
        }
        a
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = SplitMix64::new(17);
        for d in 1..9 {
            let a = random_symmetric(d, &mut rng);
            let (vals, vecs) = symmetric_eigen(&a, d).unwrap();
            assert!(vals.windows(2).all(|w| w[0] >= w[1]));
            // V^T V = I
            let vtv = matmul(&transpose(&vecs, d, d), &vecs, d, d, d);
            for i in 0..d {
                for j in 0..d {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv[i * d + j] - e).abs() < 1e-10);
                }
            }
            // A v = lambda v
            let av = matmul(&a, &vecs, d, d, d);
            for i in 0..d {
                for j in 0..d {
                    assert!((av[i * d + j] - vals[j] * vecs[i * d + j]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn eigen_sign_convention() {
        let a = [2.0, 1.0, 1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&a, 2).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        for col in 0..2 {
            let c = [vecs[col], vecs[2 + col]];
            let big = if c[0].abs() >= c[1].abs() { c[0] } else { c[1] };
            assert!(big > 0.0);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(symmetric_eigen(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
    }

    #[test]
    fn cholesky_and_inverse() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        let llt = matmul(&l, &transpose(&l, 3, 3), 3, 3, 3);
        for (x, y) in llt.iter().zip(&a) {
            assert!((x - y).abs() < 1e-12);
        }
        let li = lower_inverse(&l, 3);
        let id = matmul(&li, &l, 3, 3, 3);
        for i in 0..3 {
            for j in 0..3 {
                assert!((id[i * 3 + j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(cholesky(&[0.0], 1).is_err());
    }
}
