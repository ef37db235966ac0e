//! Geometric augmentation (rotation, horizontal flip) and class top-up planning.

use super::Mask;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::ShapeLabel;

/// Rotations are limited to `[-MAX_ROTATION_DEG, MAX_ROTATION_DEG]`.
pub const MAX_ROTATION_DEG: f64 = 45.0;

/// Nearest-neighbor rotation about the foreground centroid.
///
/// Output keeps the input dimensions; pixels rotated off the canvas are dropped.
pub fn rotate(mask: &Mask, degrees: f64) -> Result<Mask> {
    if !(degrees.abs() <= MAX_ROTATION_DEG) {
        return Err(Error::invalid(format!(
            "rotation {degrees} outside [-{MAX_ROTATION_DEG}, {MAX_ROTATION_DEG}]"
        )));
    }
    if degrees == 0.0 {
        return Ok(mask.clone());
    }
    let Some((cx, cy)) = mask.centroid() else {
        return Ok(mask.clone());
    };
    let (sin, cos) = degrees.to_radians().sin_cos();
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let mut out = Mask::zeros(mask.width(), mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            // Inverse map the output pixel center into the source.
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let sx = (cos * dx + sin * dy + cx).round() as isize;
            let sy = (-sin * dx + cos * dy + cy).round() as isize;
            if (0..w).contains(&sx) && (0..h).contains(&sy) && mask.get(sx as usize, sy as usize) {
                out.set(x, y, true);
            }
        }
    }
    Ok(out)
}

pub fn flip_horizontal(mask: &Mask) -> Mask {
    let w = mask.width();
    let mut out = Mask::zeros(w, mask.height());
    for y in 0..mask.height() {
        for x in 0..w {
            out.set(w - 1 - x, y, mask.get(x, y));
        }
    }
    out
}

/// One random augmentation: uniform rotation in the allowed range, then a
/// horizontal flip with probability 0.5.
pub fn augment_mask(mask: &Mask, rng: &mut SplitMix64) -> Mask {
    let degrees = rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG);
    let rotated = rotate(mask, degrees).expect("sampled angle is in range");
    if rng.bernoulli(0.5) {
        flip_horizontal(&rotated)
    } else {
        rotated
    }
}

/// How many augmented samples each class needs to reach `target`.
pub fn augment_plan(
    class_counts: &[(ShapeLabel, usize)],
    target: usize,
) -> Result<Vec<(ShapeLabel, usize)>> {
    class_counts
        .iter()
        .map(|&(label, count)| {
            if count == 0 {
                return Err(Error::invalid(format!("class {label} has no samples")));
            }
            if count > target {
                return Err(Error::invalid(format!(
                    "target {target} is below the {count} samples of class {label}"
                )));
            }
            Ok((label, target - count))
        })
        .collect()
}

/// Produces `needed` augmented copies drawn round-robin from `members`.
pub fn top_up_class(members: &[Mask], needed: usize, seed: u64) -> Result<Vec<Mask>> {
    if members.is_empty() && needed > 0 {
        return Err(Error::invalid("cannot augment an empty class"));
    }
    let mut rng = SplitMix64::new(seed);
    Ok((0..needed)
        .map(|i| augment_mask(&members[i % members.len()], &mut rng))
        .collect())
}
