//! Width profiles and band-based measurement extraction.

use std::ops::Range;

use super::{BodyMeasurements, Mask};
use crate::error::{Error, Result};

/// Masks need at least this many foreground rows to be measured.
pub const MIN_STATURE_ROWS: usize = 32;

/// Vertical bands, as fractions of stature measured from the top of the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Shoulder,
    Bust,
    Waist,
    Hip,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Shoulder, Band::Bust, Band::Waist, Band::Hip];

    pub fn fractions(self) -> (f64, f64) {
        match self {
            Band::Shoulder => (0.15, 0.25),
            Band::Bust => (0.25, 0.40),
            Band::Waist => (0.40, 0.55),
            Band::Hip => (0.55, 0.70),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Shoulder => "shoulder",
            Band::Bust => "bust",
            Band::Waist => "waist",
            Band::Hip => "hip",
        }
    }
}

/// Row offsets (relative to the top of the body) covered by `band`.
///
/// Bands are half-open so that adjacent bands tile the torso without overlap.
pub fn band_rows(stature: usize, band: Band) -> Range<usize> {
    let (lo, hi) = band.fractions();
    let s = stature as f64;
    (lo * s).floor() as usize..(hi * s).floor() as usize
}

/// Per-row foreground extent between the topmost and bottommost foreground rows.
pub fn width_profile(mask: &Mask) -> Result<Vec<(usize, usize)>> {
    let widths: Vec<usize> = (0..mask.height())
        .map(|y| {
            let row = mask.row(y);
            match (row.iter().position(|&c| c != 0), row.iter().rposition(|&c| c != 0)) {
                (Some(l), Some(r)) => r - l + 1,
                _ => 0,
            }
        })
        .collect();
    let top = widths.iter().position(|&w| w > 0).ok_or(Error::EmptyMask)?;
    let bottom = widths.iter().rposition(|&w| w > 0).ok_or(Error::EmptyMask)?;
    Ok((top..=bottom).map(|y| (y, widths[y])).collect())
}

pub fn extract_measurements(mask: &Mask) -> Result<BodyMeasurements> {
    let profile = width_profile(mask)?;
    let stature = profile.len();
    if stature < MIN_STATURE_ROWS {
        return Err(Error::MaskTooSmall(format!(
            "{stature} foreground rows, need at least {MIN_STATURE_ROWS}"
        )));
    }
    let band_widths = |band: Band| -> Result<Vec<usize>> {
        let ws: Vec<usize> = profile[band_rows(stature, band)]
            .iter()
            .map(|&(_, w)| w)
            .filter(|&w| w > 0)
            .collect();
        if ws.is_empty() {
            return Err(Error::EmptyBand(band.name()));
        }
        Ok(ws)
    };
    let max_of = |band| band_widths(band).map(|ws| *ws.iter().max().unwrap() as f64);
    let min_of = |band| band_widths(band).map(|ws| *ws.iter().min().unwrap() as f64);

    BodyMeasurements::new(
        max_of(Band::Bust)?,
        min_of(Band::Waist)?,
        max_of(Band::Hip)?,
        max_of(Band::Shoulder)?,
        stature as f64,
    )
}
