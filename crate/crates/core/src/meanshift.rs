//! Uniform-kernel mean-shift filtering in the joint spatial-range domain and
//! the outer loop that repeats it until a stopping criterion fires.
//!
//! One outer iteration is a complete filtering pass over the image. Within a
//! pass every pixel runs its own mode search starting from `(x, y, value)`;
//! the window is the disc of radius `hs` (clipped at the borders) intersected
//! with the gray-level band `|value - y_range| <= hr`. Gray levels are
//! compared as plain integers, never modulo `n`; ring arithmetic only enters
//! through the stopping criterion.

use std::fmt;

use rayon::prelude::*;

use crate::entropy::{entropy, nu, nu_hat};
use crate::error::{Result, RingError};
use crate::ring::RingImage;

/// Bandwidths and per-pixel convergence controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanShiftParams {
    /// Spatial bandwidth in pixels.
    pub hs: f64,
    /// Range bandwidth in gray levels.
    pub hr: f64,
    /// A pixel's mode search stops once its joint shift drops below this.
    pub pixel_tol: f64,
    pub pixel_max_iters: usize,
}

impl MeanShiftParams {
    pub const DEFAULT_HS: f64 = 15.0;
    pub const DEFAULT_HR: f64 = 12.0;
    pub const DEFAULT_PIXEL_TOL: f64 = 0.01;
    pub const DEFAULT_PIXEL_MAX_ITERS: usize = 100;

    pub fn new(hs: f64, hr: f64) -> Self {
        Self {
            hs,
            hr,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hs > 0.0 && self.hs.is_finite()) {
            return Err(param_error(format!("hs must be positive, got {}", self.hs)));
        }
        if !(self.hr >= 0.0 && self.hr.is_finite()) {
            return Err(param_error(format!(
                "hr must be non-negative, got {}",
                self.hr
            )));
        }
        if self.pixel_tol.is_nan() || self.pixel_tol <= 0.0 {
            return Err(param_error(format!(
                "pixel_tol must be positive, got {}",
                self.pixel_tol
            )));
        }
        if self.pixel_max_iters == 0 {
            return Err(param_error("pixel_max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for MeanShiftParams {
    fn default() -> Self {
        Self {
            hs: Self::DEFAULT_HS,
            hr: Self::DEFAULT_HR,
            pixel_tol: Self::DEFAULT_PIXEL_TOL,
            pixel_max_iters: Self::DEFAULT_PIXEL_MAX_ITERS,
        }
    }
}

/// Which quantity is compared against the threshold after each pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    /// `|E(A_k) - E(A_{k-1})|`.
    EntropyDiff,
    /// `E(A_k + (-A_{k-1}))`.
    RingEntropyDistance,
}

impl CriterionKind {
    pub fn default_epsilon(self) -> f64 {
        match self {
            CriterionKind::EntropyDiff => 0.0175,
            CriterionKind::RingEntropyDistance => 0.9,
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionKind::EntropyDiff => "EntropyDiff",
            CriterionKind::RingEntropyDistance => "RingEntropyDistance",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionConfig {
    pub kind: CriterionKind,
    pub epsilon: f64,
    pub max_outer_iters: usize,
}

impl CriterionConfig {
    pub const DEFAULT_MAX_OUTER_ITERS: usize = 50;

    /// Threshold and cap defaults for `kind`.
    pub fn for_kind(kind: CriterionKind) -> Self {
        Self {
            kind,
            epsilon: kind.default_epsilon(),
            max_outer_iters: Self::DEFAULT_MAX_OUTER_ITERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(param_error(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if self.max_outer_iters == 0 {
            return Err(param_error("max_outer_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// Outer iteration index, starting at 1.
    pub k: usize,
    pub criterion_value: f64,
    /// Entropy of `A_k` in bits.
    pub entropy_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    ThresholdMet,
    MaxItersReached,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::ThresholdMet => "ThresholdMet",
            StopReason::MaxItersReached => "MaxItersReached",
        })
    }
}

impl std::str::FromStr for StopReason {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ThresholdMet" => Ok(StopReason::ThresholdMet),
            "MaxItersReached" => Ok(StopReason::MaxItersReached),
            other => Err(format!("unknown stop reason {other:?}")),
        }
    }
}

/// Per-iteration criterion values and entropies of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub entries: Vec<TraceEntry>,
    pub stopped_reason: StopReason,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.entries.len()
    }

    pub fn last(&self) -> &TraceEntry {
        self.entries.last().expect("trace is never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub final_image: RingImage,
    pub trace: IterationTrace,
    pub params: MeanShiftParams,
    pub criterion: CriterionConfig,
}

fn param_error(msg: String) -> RingError {
    RingError::InvalidParameter(msg)
}

/// One full mean-shift filtering pass.
///
/// Pixels are processed in parallel; each reads only the input image, so the
/// output does not depend on scheduling.
pub fn mean_shift_filter_pass(image: &RingImage, params: &MeanShiftParams) -> Result<RingImage> {
    params.validate()?;
    let values: Vec<f64> = image.pixels().iter().map(|&v| f64::from(v)).collect();
    let window = Window {
        values: &values,
        width: image.width(),
        height: image.height(),
        params,
    };
    let max_level = image.modulus() - 1;
    let pixels = (0..image.len())
        .into_par_iter()
        .map(|i| {
            let start = [
                (i % window.width) as f64,
                (i / window.width) as f64,
                values[i],
            ];
            let mode = window.seek_mode(start);
            round_to_level(mode[2], max_level)
        })
        .collect();
    Ok(image.with_pixels(pixels))
}

struct Window<'a> {
    values: &'a [f64],
    width: usize,
    height: usize,
    params: &'a MeanShiftParams,
}

impl Window<'_> {
    fn seek_mode(&self, start: [f64; 3]) -> [f64; 3] {
        let mut y = start;
        for _ in 0..self.params.pixel_max_iters {
            let Some(mean) = self.mean_at(y) else {
                break;
            };
            let shift =
                ((mean[0] - y[0]).powi(2) + (mean[1] - y[1]).powi(2) + (mean[2] - y[2]).powi(2))
                    .sqrt();
            y = mean;
            if shift < self.params.pixel_tol {
                break;
            }
        }
        y
    }

    // Mean of all samples inside the uniform kernel centred at `y`, or None
    // when the window is empty.
    fn mean_at(&self, y: [f64; 3]) -> Option<[f64; 3]> {
        let hs = self.params.hs;
        let hr = self.params.hr;
        let hs2 = hs * hs;
        let x0 = (y[0] - hs).ceil().max(0.0) as usize;
        let x1 = ((y[0] + hs).floor() as isize).min(self.width as isize - 1);
        let y0 = (y[1] - hs).ceil().max(0.0) as usize;
        let y1 = ((y[1] + hs).floor() as isize).min(self.height as isize - 1);
        if x1 < 0 || y1 < 0 {
            return None;
        }
        let (x1, y1) = (x1 as usize, y1 as usize);

        let (mut sx, mut sy, mut sv) = (0.0, 0.0, 0.0);
        let mut count = 0usize;
        for row in y0..=y1 {
            let dy = row as f64 - y[1];
            let dy2 = dy * dy;
            let line = &self.values[row * self.width..(row + 1) * self.width];
            for (col, &v) in line.iter().enumerate().take(x1 + 1).skip(x0) {
                let dx = col as f64 - y[0];
                if dx * dx + dy2 <= hs2 && (v - y[2]).abs() <= hr {
                    sx += col as f64;
                    sy += row as f64;
                    sv += v;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return None;
        }
        let c = count as f64;
        Some([sx / c, sy / c, sv / c])
    }
}

// Round half up, then keep inside [0, max_level].
fn round_to_level(v: f64, max_level: u32) -> u32 {
    let r = (v + 0.5).floor();
    if r <= 0.0 {
        0
    } else if r >= f64::from(max_level) {
        max_level
    } else {
        r as u32
    }
}

/// Value of the chosen stopping criterion for two consecutive iterates.
pub fn criterion_value(
    kind: CriterionKind,
    current: &RingImage,
    previous: &RingImage,
) -> Result<f64> {
    current.check_compatible(previous)?;
    match kind {
        CriterionKind::EntropyDiff => nu(current, previous),
        CriterionKind::RingEntropyDistance => nu_hat(current, previous),
    }
}

/// Iterated filtering until the criterion drops to `epsilon` or the cap is hit.
pub fn segment(
    image: &RingImage,
    params: &MeanShiftParams,
    criterion: &CriterionConfig,
) -> Result<SegmentationResult> {
    segment_with(image, params, criterion, |_, _| {})
}

/// Like [`segment`], calling `on_iterate(k, &A_k)` after every pass.
pub fn segment_with(
    image: &RingImage,
    params: &MeanShiftParams,
    criterion: &CriterionConfig,
    mut on_iterate: impl FnMut(usize, &RingImage),
) -> Result<SegmentationResult> {
    params.validate()?;
    criterion.validate()?;

    let mut previous = image.clone();
    let mut entries = Vec::new();
    for k in 1..=criterion.max_outer_iters {
        let current = mean_shift_filter_pass(&previous, params)?;
        let value = criterion_value(criterion.kind, &current, &previous)?;
        entries.push(TraceEntry {
            k,
            criterion_value: value,
            entropy_after: entropy(&current).bits,
        });
        on_iterate(k, &current);
        let met = value <= criterion.epsilon;
        if met || k == criterion.max_outer_iters {
            let stopped_reason = if met {
                StopReason::ThresholdMet
            } else {
                StopReason::MaxItersReached
            };
            return Ok(SegmentationResult {
                final_image: current,
                trace: IterationTrace {
                    entries,
                    stopped_reason,
                },
                params: *params,
                criterion: *criterion,
            });
        }
        previous = current;
    }
    unreachable!("max_outer_iters >= 1 guarantees a return inside the loop")
}
