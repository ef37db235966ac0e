//! Parametric silhouette synthesis.
//!
//! A silhouette is drawn row by row from a width profile: an elliptical head,
//! a neck, four torso bands (shoulder, bust, waist, hip) whose widths encode
//! the class, and two tapering legs. Band boundaries coincide with the bands
//! used by [`extract_measurements`](super::extract_measurements), and the
//! transitions between bands are placed so that each band's extremum equals
//! the generating width.

use super::measure::{band_rows, Band};
use super::{Mask, SilhouetteParams};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::ShapeLabel;

/// Default canvas `(width, height)`.
pub const DEFAULT_CANVAS: (usize, usize) = (128, 256);
pub const DEFAULT_NOISE_SIGMA: f64 = 0.6;

const MIN_CANVAS_WIDTH: usize = 16;
const MIN_CANVAS_HEIGHT: usize = 40;

/// Generates a silhouette on the default 128x256 canvas.
pub fn generate_silhouette(label: ShapeLabel, seed: u64) -> (Mask, SilhouetteParams) {
    let (w, h) = DEFAULT_CANVAS;
    generate_with_canvas(label, seed, w, h, DEFAULT_NOISE_SIGMA)
        .expect("default canvas is always valid")
}

/// One member of a generated corpus.
#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub label: ShapeLabel,
    /// Position within its class.
    pub index: usize,
    pub mask: Mask,
    pub params: SilhouetteParams,
}

/// Per-sample seed of the `index`-th member of a corpus seeded with `seed`.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    SplitMix64::derive(seed, index as u64).next_u64()
}

/// `count` silhouettes per listed class on the default canvas, ordered by
/// class then index.
pub fn generate_corpus(counts: &[(ShapeLabel, usize)], seed: u64) -> Vec<GeneratedSample> {
    counts
        .iter()
        .flat_map(|&(label, count)| {
            (0..count).map(move |index| {
                let (mask, params) = generate_silhouette(label, sample_seed(seed, index));
                GeneratedSample {
                    label,
                    index,
                    mask,
                    params,
                }
            })
        })
        .collect()
}

/// `per_class` silhouettes of every class.
pub fn balanced_corpus(per_class: usize, seed: u64) -> Vec<GeneratedSample> {
    let counts: Vec<_> = ShapeLabel::ALL.iter().map(|&l| (l, per_class)).collect();
    generate_corpus(&counts, seed)
}

pub fn generate_with_canvas(
    label: ShapeLabel,
    seed: u64,
    canvas_width: usize,
    canvas_height: usize,
    noise_sigma: f64,
) -> Result<(Mask, SilhouetteParams)> {
    if canvas_width < MIN_CANVAS_WIDTH || canvas_height < MIN_CANVAS_HEIGHT {
        return Err(Error::invalid(format!(
            "canvas {canvas_width}x{canvas_height} is smaller than \
             {MIN_CANVAS_WIDTH}x{MIN_CANVAS_HEIGHT}"
        )));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::invalid("noise_sigma must be finite and >= 0"));
    }
    let mut rng = SplitMix64::derive(seed, label.ordinal() as u64 + 1);
    let (bust_w, waist_w, hip_w, shoulder_w) = sample_widths(label, canvas_width as f64, &mut rng);
    let body_height = ((rng.uniform(0.85, 0.95) * canvas_height as f64).round() as usize)
        .clamp(MIN_CANVAS_HEIGHT - 8, canvas_height);
    let params = SilhouetteParams {
        canvas_width,
        canvas_height,
        bust_w,
        waist_w,
        hip_w,
        shoulder_w,
        body_height,
        noise_sigma,
        seed,
    };
    params.validate()?;
    let mask = render(&params, &mut rng);
    Ok((mask, params))
}

/// Draws `(bust, waist, hip, shoulder)` inside the label's width-ratio band.
fn sample_widths(label: ShapeLabel, canvas_width: f64, rng: &mut SplitMix64) -> (f64, f64, f64, f64) {
    let base = rng.uniform(0.45, 0.60) * canvas_width;
    let (bust, waist, hip) = match label {
        ShapeLabel::Hourglass => {
            let bust = rng.uniform(0.90, 1.00) * base;
            let hip = rng.uniform(0.95, 1.05) * bust;
            let waist = rng.uniform(0.65, 0.75) * bust;
            (bust, waist, hip)
        }
        ShapeLabel::Rectangle => {
            // The waist and hip bands alone allow a 1.05/0.92 spread, so draw
            // until the three widths are within 8% of each other.
            let bust = base;
            loop {
                let waist = rng.uniform(0.92, 1.00) * bust;
                let hip = rng.uniform(0.95, 1.05) * bust;
                let hi = bust.max(waist).max(hip);
                let lo = bust.min(waist).min(hip);
                if hi / lo <= 1.08 {
                    break (bust, waist, hip);
                }
            }
        }
        ShapeLabel::Apple => {
            let bust = base;
            let waist = rng.uniform(1.05, 1.20) * bust;
            let hip = rng.uniform(0.85, 0.95) * bust;
            (bust, waist, hip)
        }
        ShapeLabel::Triangle => {
            let bust = base;
            let hip = rng.uniform(1.15, 1.35) * bust;
            let waist = rng.uniform(0.80, 0.90) * bust;
            (bust, waist, hip)
        }
        ShapeLabel::InvertedTriangle => {
            let hip = base;
            let bust = rng.uniform(1.15, 1.35) * hip;
            let waist = rng.uniform(0.80, 0.90) * hip;
            (bust, waist, hip)
        }
    };
    let shoulder = match label {
        ShapeLabel::InvertedTriangle => rng.uniform(1.05, 1.15) * bust,
        _ => rng.uniform(0.95, 1.10) * bust,
    };
    (bust, waist, hip, shoulder)
}

#[derive(Clone, Copy)]
enum Ramp {
    /// Ramp occupies the rows just before the boundary.
    Before,
    /// Ramp occupies the rows just after the boundary.
    After,
    /// Ramp is centered on the boundary.
    Straddle,
    /// Hard step at the boundary.
    Step,
}

fn apply_ramp(widths: &mut [f64], boundary: usize, from: f64, to: f64, len: usize, ramp: Ramp) {
    let start = match ramp {
        Ramp::Step => return,
        Ramp::Before => boundary.saturating_sub(len),
        Ramp::After => boundary,
        Ramp::Straddle => boundary.saturating_sub(len / 2),
    };
    let end = (start + len).min(widths.len());
    for (j, row) in (start..end).enumerate() {
        let t = (j + 1) as f64 / (len + 1) as f64;
        widths[row] = from + (to - from) * t;
    }
}

/// Per-row body width in pixels, plus the leg-gap width.
fn body_profile(p: &SilhouetteParams) -> (Vec<f64>, Vec<f64>) {
    let s = p.body_height;
    let sf = s as f64;
    let shoulder = band_rows(s, Band::Shoulder);
    let bust = band_rows(s, Band::Bust);
    let waist = band_rows(s, Band::Waist);
    let hip = band_rows(s, Band::Hip);
    let head_end = (0.11 * sf).floor() as usize;

    let head_w = (0.30 * p.shoulder_w).max(2.0);
    let neck_w = (0.18 * p.shoulder_w).max(2.0);
    let mut widths = vec![0.0; s];
    let mut gaps = vec![0.0; s];

    let radius = head_end as f64 / 2.0;
    for (i, w) in widths.iter_mut().enumerate().take(head_end) {
        let dy = (i as f64 + 0.5 - radius) / radius;
        *w = (head_w * (1.0 - dy * dy).max(0.0).sqrt()).max(2.0);
    }
    widths[head_end..shoulder.start].fill(neck_w);
    widths[shoulder.clone()].fill(p.shoulder_w);
    widths[bust.clone()].fill(p.bust_w);
    widths[waist.clone()].fill(p.waist_w);
    widths[hip.clone()].fill(p.hip_w);

    let leg_top = 0.95 * p.hip_w;
    let leg_bottom = 0.55 * p.hip_w;
    let legs = hip.end..s;
    let leg_len = (legs.len().max(2) - 1) as f64;
    let split = (0.78 * sf).floor() as usize;
    for (j, row) in legs.clone().enumerate() {
        widths[row] = leg_top + (leg_bottom - leg_top) * j as f64 / leg_len;
        if row >= split {
            let t = (row - split) as f64 / (s - split).max(1) as f64;
            gaps[row] = 2.0 + (0.14 * p.hip_w - 2.0) * t;
        }
    }

    // Transitions. A max-band may only see values <= its width and a
    // min-band only values >= its width.
    let t = ((0.04 * sf).round() as usize).max(2);
    let neck_len = shoulder.start - head_end;
    apply_ramp(&mut widths, shoulder.start, neck_w, p.shoulder_w, neck_len / 2, Ramp::Before);
    let sb = if p.shoulder_w > p.bust_w { Ramp::Before } else { Ramp::After };
    apply_ramp(&mut widths, bust.start, p.shoulder_w, p.bust_w, t, sb);
    let bw = if p.waist_w <= p.bust_w { Ramp::Straddle } else { Ramp::Step };
    apply_ramp(&mut widths, waist.start, p.bust_w, p.waist_w, t, bw);
    let wh = if p.hip_w >= p.waist_w { Ramp::Straddle } else { Ramp::Step };
    apply_ramp(&mut widths, hip.start, p.waist_w, p.hip_w, t, wh);
    apply_ramp(&mut widths, legs.start, p.hip_w, leg_top, t, Ramp::After);

    (widths, gaps)
}

fn render(p: &SilhouetteParams, rng: &mut SplitMix64) -> Mask {
    let (widths, gaps) = body_profile(p);
    let cw = p.canvas_width;
    let top = rng.below(p.canvas_height - p.body_height + 1);
    let cx = cw as f64 / 2.0 + rng.uniform(-2.0, 2.0);
    let mut mask = Mask::zeros(cw, p.canvas_height);
    let clamp_col = |v: f64| v.round().clamp(0.0, cw as f64) as usize;
    for (i, (&w, &gap)) in widths.iter().zip(&gaps).enumerate() {
        let left = cx - w / 2.0 + p.noise_sigma * rng.normal();
        let right = cx + w / 2.0 + p.noise_sigma * rng.normal();
        let (x0, mut x1) = (clamp_col(left), clamp_col(right));
        if x1 <= x0 {
            x1 = (x0 + 1).min(cw);
        }
        let (g0, g1) = if gap > 0.0 {
            (clamp_col(cx - gap / 2.0), clamp_col(cx + gap / 2.0))
        } else {
            (0, 0)
        };
        let y = top + i;
        for x in x0..x1 {
            if !(g0..g1).contains(&x) {
                mask.set(x, y, true);
            }
        }
    }
    mask
}
