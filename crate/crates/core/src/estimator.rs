//! Histogram-method spectrum estimation.
//!
//! Each occupied box of the natural measure gets a concentration
//! `alpha = ln(mu) / ln(eps_l)`. The observed alpha range is split into `A`
//! equal bins and every non-empty bin `j` holding `N_j` boxes yields the
//! point `(midpoint_j, ln N_j / ln B)`. A single box size is used per
//! spectrum; [`sweep_boxes`] repeats the estimate over several sizes.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dust::{cover, CantorDust, NaturalMeasure};
use crate::error::{Error, Result};

/// Slack allowed above `f = 1` when validating externally supplied spectra.
pub const F_UPPER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub box_index: usize,
    pub alpha: f64,
}

/// Concentrations of the occupied boxes of a natural measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaField {
    entries: Vec<AlphaEntry>,
    box_count: usize,
}

impl AlphaField {
    pub fn new(box_count: usize, entries: Vec<AlphaEntry>) -> Result<Self> {
        if box_count < 2 {
            return Err(Error::BadBoxCount(box_count));
        }
        if entries.is_empty() {
            return Err(Error::InvalidSpectrum(
                "alpha field has no occupied boxes".into(),
            ));
        }
        if let Some(e) = entries
            .iter()
            .find(|e| !(e.alpha.is_finite() && e.alpha >= 0.0))
        {
            return Err(Error::InvalidSpectrum(format!(
                "box {} has invalid concentration {}",
                e.box_index, e.alpha
            )));
        }
        Ok(Self { entries, box_count })
    }

    pub fn entries(&self) -> &[AlphaEntry] {
        &self.entries
    }

    pub fn box_count(&self) -> usize {
        self.box_count
    }

    pub fn box_length(&self) -> f64 {
        1.0 / self.box_count as f64
    }
}

/// Concentration `ln(mu_i) / ln(1/B)` of every occupied box.
pub fn alpha_field(measure: &NaturalMeasure) -> AlphaField {
    let log_eps = measure.box_length().ln();
    let entries = measure
        .occupied()
        .map(|i| {
            let mu = measure.mu(i);
            // ln 1 / ln eps would give -0.0
            let alpha = if mu == 1.0 { 0.0 } else { mu.ln() / log_eps };
            AlphaEntry {
                box_index: i,
                alpha,
            }
        })
        .collect();
    AlphaField {
        entries,
        box_count: measure.box_count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub f: f64,
}

impl SpectrumPoint {
    pub fn new(alpha: f64, f: f64) -> Self {
        Self { alpha, f }
    }
}

/// Estimation parameters recorded with a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    /// `S`
    pub sample_size: usize,
    /// `B`
    pub boxes: usize,
    /// `A`
    pub bins: usize,
    /// Width of one alpha bin; zero when every box shares one concentration.
    pub epsilon_alpha: f64,
    pub sizing: SizingVerdict,
}

/// A finite singularity spectrum: points sorted by strictly increasing alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    points: Vec<SpectrumPoint>,
    params: Option<SpectrumParams>,
}

impl Spectrum {
    /// Validates and sorts a point list. Every `f` must lie in `[0, 1]` and
    /// alphas must be distinct.
    pub fn from_points(mut points: Vec<SpectrumPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSpectrum("no points".into()));
        }
        for p in &points {
            if !(p.alpha.is_finite() && p.f.is_finite()) {
                return Err(Error::InvalidSpectrum(format!(
                    "non-finite point ({}, {})",
                    p.alpha, p.f
                )));
            }
            if p.f < 0.0 || p.f > 1.0 + F_UPPER_SLACK {
                return Err(Error::InvalidSpectrum(format!(
                    "f = {} at alpha = {} is outside [0, 1]",
                    p.f, p.alpha
                )));
            }
        }
        points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        if let Some(w) = points.windows(2).find(|w| w[0].alpha == w[1].alpha) {
            return Err(Error::InvalidSpectrum(format!(
                "duplicate alpha {}",
                w[0].alpha
            )));
        }
        Ok(Self {
            points,
            params: None,
        })
    }

    pub fn with_params(mut self, params: SpectrumParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn points(&self) -> &[SpectrumPoint] {
        &self.points
    }

    pub fn params(&self) -> Option<&SpectrumParams> {
        self.params.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Bins the alpha field into `bins` equal-width intervals over its observed
/// range. Empty bins produce no point.
pub fn histogram_spectrum(field: &AlphaField, bins: usize) -> Result<Spectrum> {
    histogram_with_width(field, bins).map(|(spectrum, _)| spectrum)
}

fn histogram_with_width(field: &AlphaField, bins: usize) -> Result<(Spectrum, f64)> {
    if bins == 0 {
        return Err(Error::BadBinCount(bins));
    }
    let log_scale = (field.box_count() as f64).ln();
    let dimension = |n: usize| (n as f64).ln() / log_scale;

    let (lo, hi) = field
        .entries()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.alpha), hi.max(e.alpha))
        });

    if lo == hi {
        let n = field.entries().len();
        let spectrum = Spectrum {
            points: vec![SpectrumPoint::new(lo, dimension(n))],
            params: None,
        };
        return Ok((spectrum, 0.0));
    }

    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for e in field.entries() {
        let j = ((e.alpha - lo) / width).floor() as usize;
        counts[j.min(bins - 1)] += 1;
    }

    // Midpoints can coincide when the range is a few ulps wide; merge them
    // so alphas stay strictly increasing and no box is lost.
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(bins);
    for (j, &n) in counts.iter().enumerate().filter(|(_, &n)| n > 0) {
        let mid = lo + (j as f64 + 0.5) * width;
        match merged.last_mut() {
            Some((alpha, total)) if *alpha >= mid => *total += n,
            _ => merged.push((mid, n)),
        }
    }
    let points = merged
        .into_iter()
        .map(|(alpha, n)| SpectrumPoint::new(alpha, dimension(n)))
        .collect();
    Ok((
        Spectrum {
            points,
            params: None,
        },
        width,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SizingStatus {
    Ok,
    Warning,
    Violation,
}

impl fmt::Display for SizingStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "Ok",
            Self::Warning => "Warning",
            Self::Violation => "Violation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingVerdict {
    pub status: SizingStatus,
    pub messages: Vec<String>,
}

/// Checks the scale separation `S >= B^2 >= A^4`.
///
/// The box rule alone is relaxed to a warning for `sqrt(S) < B <= 2 sqrt(S)`.
/// Everything else outside the rule is a violation.
pub fn validate_sizing(sample_size: usize, boxes: usize, bins: usize) -> SizingVerdict {
    let (s, b, a) = (sample_size as u128, boxes as u128, bins as u128);
    let mut status = SizingStatus::Ok;
    let mut messages = Vec::new();

    if b * b > s {
        if b * b <= 4 * s {
            status = SizingStatus::Warning;
            messages.push(format!(
                "S >= B^2 fails (B = {boxes}, B^2 = {}, S = {sample_size}); \
                 B is within 2*sqrt(S), spectrum smoothness at risk",
                b * b
            ));
        } else {
            status = SizingStatus::Violation;
            messages.push(format!(
                "S >= B^2 violated: B = {boxes} exceeds 2*sqrt(S) for S = {sample_size}"
            ));
        }
    }
    if a * a > b {
        status = SizingStatus::Violation;
        messages.push(format!(
            "B >= A^2 violated: A = {bins}, A^2 = {}, B = {boxes}",
            a * a
        ));
    }
    SizingVerdict { status, messages }
}

/// Default box and bin counts for a sample: `B = floor(sqrt(S))`,
/// `A = max(3, floor(sqrt(B)) - 1)`.
pub fn auto_size(sample_size: usize) -> Result<(usize, usize)> {
    if sample_size < 16 {
        return Err(Error::TooFewSamples(sample_size));
    }
    let boxes = sample_size.isqrt();
    Ok((boxes, default_bins(boxes)))
}

/// Bin count paired with a box count: one less than `floor(sqrt(B))`, at least 3.
pub fn default_bins(boxes: usize) -> usize {
    boxes.isqrt().saturating_sub(1).max(3)
}

/// Whether [`estimate`] refuses inputs that violate the sizing rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizingPolicy {
    #[default]
    Enforce,
    Override,
}

/// Full pipeline: cover, concentrations, histogram. The sizing verdict is
/// attached to the output parameters.
pub fn estimate(
    dust: &CantorDust,
    boxes: usize,
    bins: usize,
    policy: SizingPolicy,
) -> Result<Spectrum> {
    if boxes < 2 {
        return Err(Error::BadBoxCount(boxes));
    }
    if bins == 0 {
        return Err(Error::BadBinCount(bins));
    }
    let sizing = validate_sizing(dust.sample_size(), boxes, bins);
    if sizing.status == SizingStatus::Violation && policy == SizingPolicy::Enforce {
        return Err(Error::SizingViolation(sizing));
    }
    let measure = cover(dust, boxes)?;
    let (spectrum, epsilon_alpha) = histogram_with_width(&alpha_field(&measure), bins)?;
    Ok(spectrum.with_params(SpectrumParams {
        sample_size: dust.sample_size(),
        boxes,
        bins,
        epsilon_alpha,
        sizing,
    }))
}

/// Estimates the same dust at several box counts. Entries fail
/// independently; results follow the order of `box_counts`.
pub fn sweep_boxes(
    dust: &CantorDust,
    box_counts: &[usize],
    bins: usize,
    policy: SizingPolicy,
) -> Vec<Result<Spectrum>> {
    box_counts
        .par_iter()
        .map(|&boxes| estimate(dust, boxes, bins, policy))
        .collect()
}
