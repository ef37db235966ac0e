use super::{GrayImage, Mask};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    Nearest,
    Bilinear,
}

/// Resampling to a new size. Both sample grids use pixel-center alignment.
pub trait Resize: Sized {
    fn resize(&self, width: usize, height: usize, method: Resample) -> Result<Self>;
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("target size {width}x{height}")));
    }
    Ok(())
}

#[inline]
fn nearest_index(dst: usize, dst_len: usize, src_len: usize) -> usize {
    (((dst as f64 + 0.5) * src_len as f64 / dst_len as f64).floor() as usize).min(src_len - 1)
}

impl Resize for GrayImage {
    fn resize(&self, width: usize, height: usize, method: Resample) -> Result<Self> {
        check_dims(width, height)?;
        if width == self.width() && height == self.height() {
            return Ok(self.clone());
        }
        let mut out = Vec::with_capacity(width * height);
        match method {
            Resample::Nearest => {
                let xs: Vec<usize> = (0..width).map(|x| nearest_index(x, width, self.width())).collect();
                for y in 0..height {
                    let sy = nearest_index(y, height, self.height());
                    out.extend(xs.iter().map(|&sx| self.get(sx, sy)));
                }
            }
            Resample::Bilinear => {
                let sx_scale = self.width() as f64 / width as f64;
                let sy_scale = self.height() as f64 / height as f64;
                for y in 0..height {
                    let fy = ((y as f64 + 0.5) * sy_scale - 0.5).max(0.0);
                    let y0 = (fy.floor() as usize).min(self.height() - 1);
                    let y1 = (y0 + 1).min(self.height() - 1);
                    let ty = fy - y0 as f64;
                    for x in 0..width {
                        let fx = ((x as f64 + 0.5) * sx_scale - 0.5).max(0.0);
                        let x0 = (fx.floor() as usize).min(self.width() - 1);
                        let x1 = (x0 + 1).min(self.width() - 1);
                        let tx = fx - x0 as f64;
                        let top = self.get(x0, y0) * (1.0 - tx) + self.get(x1, y0) * tx;
                        let bottom = self.get(x0, y1) * (1.0 - tx) + self.get(x1, y1) * tx;
                        out.push((top * (1.0 - ty) + bottom * ty).clamp(0.0, 1.0));
                    }
                }
            }
        }
        Ok(GrayImage::from_raw(width, height, out))
    }
}

impl Resize for Mask {
    /// Bilinear resampling of a mask is thresholded at 0.5 to stay binary.
    fn resize(&self, width: usize, height: usize, method: Resample) -> Result<Self> {
        check_dims(width, height)?;
        if width == self.width() && height == self.height() {
            return Ok(self.clone());
        }
        match method {
            Resample::Nearest => {
                let mut out = Mask::zeros(width, height);
                for y in 0..height {
                    let sy = nearest_index(y, height, self.height());
                    for x in 0..width {
                        let sx = nearest_index(x, width, self.width());
                        out.set(x, y, self.get(sx, sy));
                    }
                }
                Ok(out)
            }
            Resample::Bilinear => Ok(self.to_gray().resize(width, height, method)?.threshold(0.5)),
        }
    }
}
