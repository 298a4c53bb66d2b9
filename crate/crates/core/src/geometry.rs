//! Spectrum shape analysis and regime classification.
//!
//! A spectrum is read in three ways: its summary features (extent, peak,
//! distance to the bisectrix `f = alpha`), whether a long run of points sits
//! on one straight line (constant slope `q = f'(alpha)`), and whether it
//! breaks into pieces separated by wide alpha gaps. [`classify`] combines
//! these into one of the regimes below.
//!
//! "Cap-shaped" here means unimodal: `f` rises to a single peak and then
//! falls. Discrete curvature is not tested.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{Spectrum, SpectrumPoint};

/// Default tolerance for the constant-slope run, in units of `f`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 0.02;
/// Default tolerance for the single-peak test, in units of `f`.
pub const DEFAULT_CAP_TOL: f64 = 0.02;
/// Default gap threshold is this multiple of the median alpha spacing.
pub const GAP_MEDIAN_MULTIPLE: f64 = 3.0;
/// Shortest run that can count as a segment.
pub const MIN_SEGMENT_RUN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumFeatures {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Alpha at which `f` peaks; ties go to the smallest alpha.
    #[serde(rename = "alpha_M")]
    pub alpha_m: f64,
    pub f_max: f64,
    pub delta_alpha: f64,
    /// `min(alpha - f)` over the points.
    pub bisectrix_gap: f64,
}

pub fn features(spectrum: &Spectrum) -> SpectrumFeatures {
    let points = spectrum.points();
    let peak = peak_index(points);
    let alpha_min = points[0].alpha;
    let alpha_max = points[points.len() - 1].alpha;
    SpectrumFeatures {
        alpha_min,
        alpha_max,
        alpha_m: points[peak].alpha,
        f_max: points[peak].f,
        delta_alpha: alpha_max - alpha_min,
        bisectrix_gap: points
            .iter()
            .map(|p| p.alpha - p.f)
            .fold(f64::INFINITY, f64::min),
    }
}

// First index of the maximum f; points are sorted by alpha.
fn peak_index(points: &[SpectrumPoint]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate().skip(1) {
        if p.f > points[best].f {
            best = i;
        }
    }
    best
}

/// Signed change `later - earlier` of the tracked features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureDelta {
    pub alpha_min: f64,
    #[serde(rename = "alpha_M")]
    pub alpha_m: f64,
    pub f_max: f64,
    pub bisectrix_gap: f64,
}

impl FeatureDelta {
    fn between(earlier: &SpectrumFeatures, later: &SpectrumFeatures) -> Self {
        Self {
            alpha_min: later.alpha_min - earlier.alpha_min,
            alpha_m: later.alpha_m - earlier.alpha_m,
            f_max: later.f_max - earlier.f_max,
            bisectrix_gap: later.bisectrix_gap - earlier.bisectrix_gap,
        }
    }
}

/// How a spectrum moves as the box count grows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTrend {
    /// One delta per consecutive pair.
    pub steps: Vec<FeatureDelta>,
    /// Last minus first.
    pub total: FeatureDelta,
    /// `alpha_min` strictly decreases at every step.
    pub left_shift: bool,
    /// `alpha_M` strictly decreases at every step.
    pub cusp_left: bool,
    /// `f_max` strictly increases at every step.
    pub cusp_up: bool,
    /// `bisectrix_gap` strictly decreases at every step.
    pub approaching_bisectrix: bool,
}

/// Compares feature sets ordered by increasing box count.
pub fn compare_sweep(features: &[SpectrumFeatures]) -> Result<SweepTrend> {
    if features.len() < 2 {
        return Err(Error::NeedsSweep);
    }
    let steps: Vec<FeatureDelta> = features
        .windows(2)
        .map(|w| FeatureDelta::between(&w[0], &w[1]))
        .collect();
    let all = |pred: fn(&FeatureDelta) -> bool| steps.iter().all(pred);
    Ok(SweepTrend {
        total: FeatureDelta::between(&features[0], &features[features.len() - 1]),
        left_shift: all(|d| d.alpha_min < 0.0),
        cusp_left: all(|d| d.alpha_m < 0.0),
        cusp_up: all(|d| d.f_max > 0.0),
        approaching_bisectrix: all(|d| d.bisectrix_gap < 0.0),
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapCheck {
    pub is_cap: bool,
    pub peak_index: usize,
    /// Indices of the troughs that break the single peak.
    pub violations: Vec<usize>,
    /// Peak sits at either end, so the cap is one-sided.
    pub degenerate: bool,
}

/// Single-peak test: `f` may not drop by more than `tol` before the peak nor
/// rise by more than `tol` after it.
pub fn cap_shape_check(spectrum: &Spectrum, tol: f64) -> Result<CapCheck> {
    let points = spectrum.points();
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let peak = peak_index(points);
    let mut violations = Vec::new();
    for i in 0..points.len() - 1 {
        let (here, next) = (points[i].f, points[i + 1].f);
        if i < peak && next < here - tol {
            violations.push(i + 1);
        } else if i >= peak && next > here + tol {
            violations.push(i);
        }
    }
    violations.dedup();
    Ok(CapCheck {
        is_cap: violations.is_empty(),
        peak_index: peak,
        violations,
        degenerate: peak == 0 || peak == points.len() - 1,
    })
}

/// Least-squares line through a set of points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute vertical deviation of a point from the line.
    pub max_residual: f64,
}

/// Fits `f = slope * alpha + intercept`. Needs two or more distinct alphas.
pub fn fit_line(points: &[SpectrumPoint]) -> LineFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.alpha).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.f).sum::<f64>() / n;
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), p| {
        let dx = p.alpha - mean_x;
        (sxx + dx * dx, sxy + dx * (p.f - mean_y))
    });
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let max_residual = points
        .iter()
        .map(|p| (p.f - (slope * p.alpha + intercept)).abs())
        .fold(0.0, f64::max);
    LineFit {
        slope,
        intercept,
        max_residual,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub found: bool,
    /// Inclusive index range of the run.
    pub run: Option<(usize, usize)>,
    /// Fitted `f'(alpha)` over the run, the collapsed Lagrangian coordinate.
    pub slope: Option<f64>,
    pub residual: Option<f64>,
}

impl SegmentReport {
    fn not_found() -> Self {
        Self {
            found: false,
            run: None,
            slope: None,
            residual: None,
        }
    }
}

/// Default run length for an `n`-point spectrum: half the points, at least 4.
pub fn default_min_run(n: usize) -> usize {
    n.div_ceil(2).max(MIN_SEGMENT_RUN)
}

/// Longest run of at least `min_run` consecutive points whose least-squares
/// line leaves no point farther than `residual_tol`. Equal-length runs are
/// ranked by residual, then position. `min_run` below 4 is raised to 4.
pub fn detect_segment(spectrum: &Spectrum, residual_tol: f64, min_run: usize) -> SegmentReport {
    let points = spectrum.points();
    let min_run = min_run.max(MIN_SEGMENT_RUN);
    for len in (min_run..=points.len()).rev() {
        let best = (0..=points.len() - len)
            .map(|start| (start, fit_line(&points[start..start + len])))
            .filter(|(_, fit)| fit.max_residual <= residual_tol)
            .min_by(|a, b| a.1.max_residual.total_cmp(&b.1.max_residual));
        if let Some((start, fit)) = best {
            return SegmentReport {
                found: true,
                run: Some((start, start + len - 1)),
                slope: Some(fit.slope),
                residual: Some(fit.max_residual),
            };
        }
    }
    SegmentReport::not_found()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fragment {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
}

impl Fragment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsolatedPoint {
    pub index: usize,
    pub alpha: f64,
    pub f: f64,
    /// `f = 0`: a single box carries this concentration.
    pub on_axis: bool,
    /// Off-axis singleton split from the rest of the spectrum: a second
    /// spectrum reduced to one point.
    pub embryonic_spectrum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragmentReport {
    pub fragments: Vec<Fragment>,
    /// Alpha gap between each consecutive pair of fragments.
    pub gaps: Vec<f64>,
    pub isolated_points: Vec<IsolatedPoint>,
}

impl FragmentReport {
    pub fn count(&self) -> usize {
        self.fragments.len()
    }
}

/// `3 x` the median spacing between consecutive alphas; infinite for
/// fewer than two points.
pub fn default_gap_threshold(spectrum: &Spectrum) -> f64 {
    let mut spacings: Vec<f64> = spectrum
        .points()
        .windows(2)
        .map(|w| w[1].alpha - w[0].alpha)
        .collect();
    if spacings.is_empty() {
        return f64::INFINITY;
    }
    spacings.sort_by(f64::total_cmp);
    let mid = spacings.len() / 2;
    let median = if spacings.len() % 2 == 1 {
        spacings[mid]
    } else {
        0.5 * (spacings[mid - 1] + spacings[mid])
    };
    GAP_MEDIAN_MULTIPLE * median
}

/// Splits the spectrum wherever consecutive alphas are more than
/// `gap_threshold` apart.
pub fn detect_fragments(spectrum: &Spectrum, gap_threshold: f64) -> FragmentReport {
    let points = spectrum.points();
    let mut fragments = Vec::new();
    let mut gaps = Vec::new();
    let mut start = 0;
    for i in 1..points.len() {
        let gap = points[i].alpha - points[i - 1].alpha;
        if gap > gap_threshold {
            fragments.push(Fragment { start, end: i - 1 });
            gaps.push(gap);
            start = i;
        }
    }
    fragments.push(Fragment {
        start,
        end: points.len() - 1,
    });

    let split = fragments.len() > 1;
    let isolated_points = fragments
        .iter()
        .filter(|frag| frag.len() == 1)
        .map(|frag| {
            let p = points[frag.start];
            let on_axis = p.f == 0.0;
            IsolatedPoint {
                index: frag.start,
                alpha: p.alpha,
                f: p.f,
                on_axis,
                embryonic_spectrum: split && !on_axis,
            }
        })
        .collect();
    FragmentReport {
        fragments,
        gaps,
        isolated_points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    PreCrisis,
    Crisis,
    PostCrisisBiMultifractal,
    Indeterminate,
}

/// Thresholds for [`classify`]. `None` picks the data-dependent default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub residual_tol: f64,
    pub min_run: Option<usize>,
    pub gap_threshold: Option<f64>,
    pub cap_tol: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            residual_tol: DEFAULT_RESIDUAL_TOL,
            min_run: None,
            gap_threshold: None,
            cap_tol: DEFAULT_CAP_TOL,
        }
    }
}

/// Thresholds actually applied to one spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub residual_tol: f64,
    pub min_run: usize,
    /// Serialized as `null` when unbounded.
    pub gap_threshold: f64,
    pub cap_tol: f64,
}

impl ClassifyConfig {
    pub fn resolve(&self, spectrum: &Spectrum) -> Thresholds {
        Thresholds {
            residual_tol: self.residual_tol,
            min_run: self
                .min_run
                .unwrap_or_else(|| default_min_run(spectrum.len()))
                .max(MIN_SEGMENT_RUN),
            gap_threshold: self
                .gap_threshold
                .unwrap_or_else(|| default_gap_threshold(spectrum)),
            cap_tol: self.cap_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub features: SpectrumFeatures,
    pub segment: SegmentReport,
    pub fragmentation: FragmentReport,
    /// `None` when the spectrum has fewer than 3 points.
    pub cap_shape: Option<CapCheck>,
    pub thresholds: Thresholds,
}

/// Decision rule, first match wins:
/// two or more fragments: post-crisis; one fragment with a constant-slope
/// run: crisis; one cap-shaped fragment: pre-crisis; else indeterminate.
pub fn classify(spectrum: &Spectrum, config: &ClassifyConfig) -> RegimeReport {
    let thresholds = config.resolve(spectrum);
    let fragmentation = detect_fragments(spectrum, thresholds.gap_threshold);
    let segment = detect_segment(spectrum, thresholds.residual_tol, thresholds.min_run);
    let cap_shape = cap_shape_check(spectrum, thresholds.cap_tol).ok();

    let regime = if fragmentation.count() >= 2 {
        Regime::PostCrisisBiMultifractal
    } else if segment.found {
        Regime::Crisis
    } else if cap_shape.as_ref().is_some_and(|c| c.is_cap) {
        Regime::PreCrisis
    } else {
        Regime::Indeterminate
    };

    RegimeReport {
        regime,
        features: features(spectrum),
        segment,
        fragmentation,
        cap_shape,
        thresholds,
    }
}
