//! Sobel edge magnitude and separable Gaussian blur, both with edge replication.

use super::GrayImage;
use crate::error::{Error, Result};

/// Gradient magnitude with the 3x3 Sobel kernels, normalized by its maximum.
pub fn sobel_edges(img: &GrayImage) -> Result<GrayImage> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::invalid(format!("sobel needs at least 3x3, got {w}x{h}")));
    }
    let mut mag = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            mag.push((gx * gx + gy * gy).sqrt());
        }
    }
    let max = mag.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        mag.iter_mut().for_each(|v| *v /= max);
    }
    Ok(GrayImage::from_raw(w, h, mag))
}

/// Normalized 1-D Gaussian weights over `[-r, r]`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let r = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    Ok(k)
}

pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    let kernel = gaussian_kernel(sigma)?;
    let r = (kernel.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());

    let mut horiz = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let v: f64 = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * img.get_clamped(x + k as isize - r, y))
                .sum();
            horiz.push(v);
        }
    }
    let tmp = GrayImage::from_raw(w, h, horiz);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let v: f64 = kernel
                .iter()
                .enumerate()
                .map(|(k, wt)| wt * tmp.get_clamped(x, y + k as isize - r))
                .sum();
            out.push(v.clamp(0.0, 1.0));
        }
    }
    Ok(GrayImage::from_raw(w, h, out))
}
