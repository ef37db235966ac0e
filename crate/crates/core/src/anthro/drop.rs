//! Drop values and the interval rules built on population statistics.

use serde::{Deserialize, Serialize};

use super::DatasetTable;
use crate::error::{Error, Result};
use crate::silhouette::BodyMeasurements;
use crate::ShapeLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropValues {
    pub hip_minus_bust: f64,
    pub bust_minus_waist: f64,
}

pub fn drop_values(m: &BodyMeasurements) -> DropValues {
    DropValues {
        hip_minus_bust: m.hip - m.bust,
        bust_minus_waist: m.bust - m.waist,
    }
}

/// Summary of one drop dimension; `sd` uses divisor n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimStats {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl DimStats {
    fn fit(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // Rounding can push the mean a hair outside [min, max] for near-constant data.
        Self {
            mean: mean.clamp(min, max),
            sd,
            min,
            max,
        }
    }

    fn is_valid(&self) -> bool {
        [self.mean, self.sd, self.min, self.max].iter().all(|v| v.is_finite())
            && self.sd >= 0.0
            && self.min <= self.mean
            && self.mean <= self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub hip_minus_bust: DimStats,
    pub bust_minus_waist: DimStats,
    pub n: usize,
}

impl PopulationStats {
    pub fn fit(measurements: &[BodyMeasurements]) -> Result<Self> {
        if measurements.len() < 2 {
            return Err(Error::invalid(format!(
                "population statistics need at least 2 rows, got {}",
                measurements.len()
            )));
        }
        for m in measurements {
            m.validate()?;
        }
        let (hb, bw): (Vec<f64>, Vec<f64>) = measurements
            .iter()
            .map(|m| {
                let d = drop_values(m);
                (d.hip_minus_bust, d.bust_minus_waist)
            })
            .unzip();
        Ok(Self {
            hip_minus_bust: DimStats::fit(&hb),
            bust_minus_waist: DimStats::fit(&bw),
            n: measurements.len(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.hip_minus_bust.is_valid() || !self.bust_minus_waist.is_valid() {
            return Err(Error::invalid("population statistics are not fitted"));
        }
        Ok(())
    }
}

pub fn fit_population_stats(table: &DatasetTable) -> Result<PopulationStats> {
    PopulationStats::fit(&table.measurements()?)
}

#[derive(Clone, Copy)]
struct Interval {
    label: ShapeLabel,
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

/// Rule-based label from drop values.
///
/// 1. `hip - bust < 0` gives InvertedTriangle.
/// 2. `hip - bust` in `(mean, max]` gives Triangle.
/// 3. Otherwise `d = bust - waist` decides: `(mean, max]` Hourglass,
///    `[mean - 3 sd, mean]` Rectangle, `[min, mean - 3 sd)` Apple.
/// 4. A `d` outside every interval takes the nearest non-empty interval by
///    boundary distance, ties going to Rectangle.
pub fn classify_drop(m: &BodyMeasurements, stats: &PopulationStats) -> Result<ShapeLabel> {
    stats.validate()?;
    let drops = drop_values(m);
    let hb = drops.hip_minus_bust;
    if !hb.is_finite() || !drops.bust_minus_waist.is_finite() {
        return Err(Error::NonFinite("drop value".into()));
    }
    if hb < 0.0 {
        return Ok(ShapeLabel::InvertedTriangle);
    }
    let s_hb = &stats.hip_minus_bust;
    if hb > s_hb.mean && hb <= s_hb.max {
        return Ok(ShapeLabel::Triangle);
    }

    let s = &stats.bust_minus_waist;
    let cut = s.mean - 3.0 * s.sd;
    // Rectangle first so that it wins distance ties.
    let intervals = [
        Interval {
            label: ShapeLabel::Rectangle,
            lo: cut,
            hi: s.mean,
            lo_closed: true,
            hi_closed: true,
        },
        Interval {
            label: ShapeLabel::Hourglass,
            lo: s.mean,
            hi: s.max,
            lo_closed: false,
            hi_closed: true,
        },
        Interval {
            label: ShapeLabel::Apple,
            lo: s.min,
            hi: cut,
            lo_closed: true,
            hi_closed: false,
        },
    ];
    let d = drops.bust_minus_waist;
    if let Some(hit) = intervals.iter().find(|iv| !iv.is_empty() && iv.contains(d)) {
        return Ok(hit.label);
    }
    let nearest = intervals
        .iter()
        .filter(|iv| !iv.is_empty())
        .fold(None::<(f64, ShapeLabel)>, |best, iv| {
            let dist = iv.distance(d);
            match best {
                Some((bd, _)) if bd <= dist => best,
                _ => Some((dist, iv.label)),
            }
        });
    Ok(nearest.map(|(_, l)| l).unwrap_or(ShapeLabel::Rectangle))
}
