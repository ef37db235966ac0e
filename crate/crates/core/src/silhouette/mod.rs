//! Mask I/O, silhouette synthesis, augmentation, filters and measurement
//! extraction.

mod augment;
mod filter;
mod generate;
mod manifest;
mod measure;
mod pgm;
mod resize;

pub use augment::{augment_mask, augment_plan, flip_horizontal, rotate, top_up_class, MAX_ROTATION_DEG};
pub use filter::{gaussian_blur, gaussian_kernel, sobel_edges};
pub use generate::{
    balanced_corpus, generate_corpus, generate_silhouette, generate_with_canvas, sample_seed, GeneratedSample,
    DEFAULT_CANVAS, DEFAULT_NOISE_SIGMA,
};
pub use manifest::{read_manifest, write_manifest, ManifestEntry};
pub use measure::{band_rows, extract_measurements, width_profile, Band, MIN_STATURE_ROWS};
pub use pgm::{decode_pgm, encode_pgm, load_mask, save_mask};
pub use resize::{Resample, Resize};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary foreground grid, row-major, `0` = background and `1` = foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl Mask {
    pub fn new(width: usize, height: usize, cells: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("mask dimensions {width}x{height}")));
        }
        if cells.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} cells for a {width}x{height} mask",
                cells.len()
            )));
        }
        if let Some(v) = cells.iter().find(|&&c| c > 1) {
            return Err(Error::invalid(format!("mask cell value {v} is not binary")));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    /// All-background mask. Panics on zero dimensions.
    pub fn zeros(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be nonzero");
        Self {
            width,
            height,
            cells: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.cells[y * self.width + x] = on as u8;
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.cells[y * self.width..(y + 1) * self.width]
    }

    pub fn foreground_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    /// A mask is usable when it has at least one foreground pixel.
    pub fn is_usable(&self) -> bool {
        self.cells.iter().any(|&c| c != 0)
    }

    /// Foreground centroid `(x, y)` in pixel-center coordinates.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            values: self.cells.iter().map(|&c| c as f64).collect(),
        }
    }
}

/// Real-valued single-channel image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image dimensions {width}x{height}")));
        }
        if values.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {width}x{height} image",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::invalid(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub(crate) fn from_raw(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self {
            width,
            height,
            values,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub(crate) fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Binarizes with `value > threshold` as foreground.
    pub fn threshold(&self, threshold: f64) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            cells: self.values.iter().map(|&v| (v > threshold) as u8).collect(),
        }
    }
}

/// Linear body measurements sharing one unit (pixels for mask-derived values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyMeasurements {
    pub bust: f64,
    pub waist: f64,
    pub hip: f64,
    pub shoulder: f64,
    pub stature: f64,
}

impl BodyMeasurements {
    pub const FIELDS: [&'static str; 5] = ["bust", "waist", "hip", "shoulder", "stature"];

    pub fn new(bust: f64, waist: f64, hip: f64, shoulder: f64, stature: f64) -> Result<Self> {
        let m = Self {
            bust,
            waist,
            hip,
            shoulder,
            stature,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::FIELDS.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
            if v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.bust, self.waist, self.hip, self.shoulder, self.stature]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            bust: a[0],
            waist: a[1],
            hip: a[2],
            shoulder: a[3],
            stature: a[4],
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * factor))
    }
}

/// Parameters of one synthetic silhouette. Widths and height are in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteParams {
    pub canvas_width: usize,
    pub canvas_height: usize,
    pub bust_w: f64,
    pub waist_w: f64,
    pub hip_w: f64,
    pub shoulder_w: f64,
    pub body_height: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SilhouetteParams {
    /// The generator's ground-truth widths as measurements.
    pub fn measurements(&self) -> BodyMeasurements {
        BodyMeasurements {
            bust: self.bust_w,
            waist: self.waist_w,
            hip: self.hip_w,
            shoulder: self.shoulder_w,
            stature: self.body_height as f64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cw = self.canvas_width as f64;
        for (name, w) in [
            ("bust_w", self.bust_w),
            ("waist_w", self.waist_w),
            ("hip_w", self.hip_w),
            ("shoulder_w", self.shoulder_w),
        ] {
            if !(w >= 4.0 && w < cw) {
                return Err(Error::invalid(format!(
                    "{name} = {w} outside [4, {cw})"
                )));
            }
        }
        if self.body_height > self.canvas_height {
            return Err(Error::invalid("body_height exceeds canvas height"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::invalid("noise_sigma must be >= 0"));
        }
        Ok(())
    }
}
