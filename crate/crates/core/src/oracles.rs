//! Synthetic dusts with known multifractal structure, and their theoretical
//! spectra.
//!
//! A two-map self-similar cascade splits an interval into a left child of
//! relative length `r1` and a right child of relative length `r2`, flush with
//! the ends, carrying probabilities `p1` and `p2`. Samples walk `depth` levels
//! of the cascade and land on the midpoint of the final interval.
//!
//! The theoretical spectrum follows from `sum_i p_i^q r_i^(-tau) = 1`, with
//! `alpha = tau'(q)` and `f = q alpha - tau`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dust::CantorDust;
use crate::error::{Error, Result};

/// Largest grid step accepted for finite-difference `alpha(q)`.
pub const MAX_Q_STEP: f64 = 0.05;
/// Residual target for the `tau(q)` root.
pub const ROOT_TOLERANCE: f64 = 1e-12;

// Final cascade intervals must stay above the spacing of doubles near 1.
const MAX_LOG_SHRINK: f64 = 52.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarSpec {
    pub probabilities: [f64; 2],
    pub ratios: [f64; 2],
    pub depth: u32,
    #[serde(default)]
    pub sample_size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SelfSimilarSpec {
    /// Symmetric-ratio cascade with weights `(p, 1 - p)`.
    pub fn binomial(p: f64, ratio: f64, depth: u32, sample_size: usize, seed: u64) -> Self {
        Self {
            probabilities: [p, 1.0 - p],
            ratios: [ratio, ratio],
            depth,
            sample_size,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [p1, p2] = self.probabilities;
        let [r1, r2] = self.ratios;
        if !(p1 > 0.0 && p2 > 0.0) {
            return Err(Error::Spec(format!(
                "probabilities must be positive, got ({p1}, {p2})"
            )));
        }
        if (p1 + p2 - 1.0).abs() > 1e-12 {
            return Err(Error::Spec(format!(
                "probabilities sum to {}, not 1",
                p1 + p2
            )));
        }
        if !(r1 > 0.0 && r2 > 0.0) {
            return Err(Error::Spec(format!(
                "ratios must be positive, got ({r1}, {r2})"
            )));
        }
        if r1 + r2 > 1.0 {
            return Err(Error::Spec(format!(
                "ratios ({r1}, {r2}) overlap: sum exceeds 1"
            )));
        }
        if self.depth == 0 {
            return Err(Error::Spec("depth must be at least 1".into()));
        }
        if self.sample_size == 0 {
            return Err(Error::Spec("sample size must be at least 1".into()));
        }
        let smallest = r1.min(r2);
        if f64::from(self.depth) * (1.0 / smallest).ln() > MAX_LOG_SHRINK {
            return Err(Error::DepthTooLarge {
                depth: self.depth,
                ratio: smallest,
            });
        }
        Ok(())
    }

    fn equal_ratios(&self) -> bool {
        self.ratios[0] == self.ratios[1]
    }
}

fn sample_cascade(spec: &SelfSimilarSpec, count: usize, seed: u64) -> Vec<f64> {
    let [p1, _] = spec.probabilities;
    let [r1, r2] = spec.ratios;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (mut lo, mut len) = (0.0f64, 1.0f64);
            for _ in 0..spec.depth {
                if rng.random::<f64>() < p1 {
                    len *= r1;
                } else {
                    lo += len * (1.0 - r2);
                    len *= r2;
                }
            }
            lo + 0.5 * len
        })
        .collect()
}

/// Draws `sample_size` i.i.d. points from the depth-limited cascade measure.
pub fn gen_selfsimilar(spec: &SelfSimilarSpec) -> Result<CantorDust> {
    spec.validate()?;
    CantorDust::new(sample_cascade(spec, spec.sample_size, spec.seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OraclePoint {
    pub q: f64,
    pub tau: f64,
    pub alpha: f64,
    pub f: f64,
}

/// Theoretical `(alpha(q), f(q))` curve sampled on a q grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub curve: Vec<OraclePoint>,
}

impl OracleSpectrum {
    pub fn q_grid(&self) -> impl Iterator<Item = f64> + '_ {
        self.curve.iter().map(|p| p.q)
    }

    /// `f` at `alpha` by linear interpolation along the curve; `None`
    /// outside the sampled alpha range.
    pub fn f_at(&self, alpha: f64) -> Option<f64> {
        let mut pts: Vec<(f64, f64)> = self.curve.iter().map(|p| (p.alpha, p.f)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (first, last) = (pts.first()?, pts.last()?);
        if alpha < first.0 || alpha > last.0 {
            return None;
        }
        let i = pts.partition_point(|p| p.0 < alpha);
        if i == 0 {
            return Some(pts[0].1);
        }
        let (a0, f0) = pts[i - 1];
        let (a1, f1) = pts[i];
        if a1 == a0 {
            return Some(f0.max(f1));
        }
        Some(f0 + (f1 - f0) * (alpha - a0) / (a1 - a0))
    }
}

/// Evenly spaced grid from `start` to `end` inclusive.
pub fn q_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).round() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Theoretical spectrum of the cascade in `spec`.
///
/// Equal ratios use the closed form. Unequal ratios solve `tau(q)` by
/// bisection and differentiate it along the grid, which must be strictly
/// increasing with at least three points and steps of at most
/// [`MAX_Q_STEP`].
pub fn oracle_spectrum(spec: &SelfSimilarSpec, q_grid: &[f64]) -> Result<OracleSpectrum> {
    spec.validate()?;
    if q_grid.iter().any(|q| !q.is_finite()) {
        return Err(Error::Spec("q grid has non-finite entries".into()));
    }
    if spec.equal_ratios() {
        Ok(closed_form(spec, q_grid))
    } else {
        numeric(spec, q_grid)
    }
}

fn closed_form(spec: &SelfSimilarSpec, q_grid: &[f64]) -> OracleSpectrum {
    let [p1, p2] = spec.probabilities;
    let log_r = spec.ratios[0].ln();
    let curve = q_grid
        .iter()
        .map(|&q| {
            let (w1, w2) = (p1.powf(q), p2.powf(q));
            let sum = w1 + w2;
            let alpha = (w1 * p1.ln() + w2 * p2.ln()) / (sum * log_r);
            let tau = sum.ln() / log_r;
            OraclePoint {
                q,
                tau,
                alpha,
                f: q * alpha - tau,
            }
        })
        .collect();
    OracleSpectrum { curve }
}

fn numeric(spec: &SelfSimilarSpec, q_grid: &[f64]) -> Result<OracleSpectrum> {
    if q_grid.len() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 3 q values, got {}",
            q_grid.len()
        )));
    }
    for w in q_grid.windows(2) {
        let step = w[1] - w[0];
        if step <= 0.0 {
            return Err(Error::GridTooCoarse(
                "q grid must be strictly increasing".into(),
            ));
        }
        if step > MAX_Q_STEP + 1e-12 {
            return Err(Error::GridTooCoarse(format!(
                "step {step} between q = {} and q = {} exceeds {MAX_Q_STEP}",
                w[0], w[1]
            )));
        }
    }
    let taus: Vec<f64> = q_grid.iter().map(|&q| solve_tau(spec, q)).collect();
    let slopes = derivative(q_grid, &taus);
    let curve = q_grid
        .iter()
        .zip(taus)
        .zip(slopes)
        .map(|((&q, tau), alpha)| OraclePoint {
            q,
            tau,
            alpha,
            f: q * alpha - tau,
        })
        .collect();
    Ok(OracleSpectrum { curve })
}

/// `sum_i p_i^q r_i^(-tau) - 1`; increasing in `tau`.
pub fn partition_residual(spec: &SelfSimilarSpec, q: f64, tau: f64) -> f64 {
    spec.probabilities
        .iter()
        .zip(spec.ratios)
        .map(|(p, r)| p.powf(q) * r.powf(-tau))
        .sum::<f64>()
        - 1.0
}

/// Root of [`partition_residual`] in `tau` for fixed `q`, by bracketed
/// bisection down to adjacent doubles.
pub fn solve_tau(spec: &SelfSimilarSpec, q: f64) -> f64 {
    let g = |tau| partition_residual(spec, q, tau);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while g(lo) > 0.0 {
        lo *= 2.0;
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = g(mid);
        if value == 0.0 {
            return mid;
        }
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

// Three-point derivative on a non-uniform grid: centered inside, one-sided
// second order at the ends.
fn derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let three_point = |i: usize, at: usize| {
        let (x0, x1, x2) = (x[i], x[i + 1], x[i + 2]);
        let (y0, y1, y2) = (y[i], y[i + 1], y[i + 2]);
        let t = x[at];
        // derivative of the interpolating parabola through the three points
        y0 * (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1))
    };
    (0..n)
        .map(|i| match i {
            0 => three_point(0, 0),
            i if i == n - 1 => three_point(n - 3, n - 1),
            i => three_point(i - 1, i),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Both components span the whole segment.
    #[default]
    Overlapping,
    /// First component squeezed into `[0, 0.5)`, second into `[0.5, 1]`.
    Disjoint,
}

/// Two cascades sharing one dust. Component sample counts come from `mix`
/// and `sample_size`; each component keeps its own parameters and seed, and
/// its own `sample_size` is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperposedSpec {
    pub a: SelfSimilarSpec,
    pub b: SelfSimilarSpec,
    /// Fraction of samples drawn from `a`.
    pub mix: f64,
    pub sample_size: usize,
    #[serde(default)]
    pub placement: Placement,
}

impl SuperposedSpec {
    /// Sample counts drawn from `a` and `b`.
    pub fn split(&self) -> Result<(usize, usize)> {
        if !(self.mix > 0.0 && self.mix < 1.0) {
            return Err(Error::Spec(format!(
                "mix must lie in (0, 1), got {}",
                self.mix
            )));
        }
        let from_a = (self.mix * self.sample_size as f64).round() as usize;
        let from_b = self.sample_size.saturating_sub(from_a);
        if from_a == 0 || from_b == 0 {
            return Err(Error::Spec(format!(
                "mix {} of {} samples leaves a component empty",
                self.mix, self.sample_size
            )));
        }
        Ok((from_a, from_b))
    }
}

pub fn gen_superposed(spec: &SuperposedSpec) -> Result<CantorDust> {
    let (from_a, from_b) = spec.split()?;
    SelfSimilarSpec {
        sample_size: from_a,
        ..spec.a
    }
    .validate()?;
    SelfSimilarSpec {
        sample_size: from_b,
        ..spec.b
    }
    .validate()?;
    let a = sample_cascade(&spec.a, from_a, spec.a.seed);
    let b = sample_cascade(&spec.b, from_b, spec.b.seed);
    let points = match spec.placement {
        Placement::Overlapping => a.into_iter().chain(b).collect(),
        Placement::Disjoint => a
            .into_iter()
            .map(|x| 0.5 * x)
            .chain(b.into_iter().map(|x| 0.5 + 0.5 * x))
            .collect(),
    };
    CantorDust::new(points)
}

/// Reduced fractions `p/q` in `[0, 1]` with `q <= max_denominator`, in
/// increasing order, built by repeated mediant insertion.
pub fn farey_fractions(max_denominator: u64) -> Result<Vec<(u64, u64)>> {
    if max_denominator < 2 {
        return Err(Error::Spec(format!(
            "maximum denominator must be at least 2, got {max_denominator}"
        )));
    }
    enum Step {
        Split((u64, u64), (u64, u64)),
        Emit((u64, u64)),
    }
    let mut out = vec![(0, 1)];
    let mut stack = vec![Step::Split((0, 1), (1, 1))];
    while let Some(step) = stack.pop() {
        match step {
            Step::Emit(frac) => out.push(frac),
            Step::Split(left, right) => {
                let mediant = (left.0 + right.0, left.1 + right.1);
                if mediant.1 > max_denominator {
                    continue;
                }
                stack.push(Step::Split(mediant, right));
                stack.push(Step::Emit(mediant));
                stack.push(Step::Split(left, mediant));
            }
        }
    }
    out.push((1, 1));
    Ok(out)
}

/// Farey fractions of bounded denominator as a dust, one sample each.
pub fn gen_farey(max_denominator: u64) -> Result<CantorDust> {
    let points = farey_fractions(max_denominator)?
        .into_iter()
        .map(|(p, q)| p as f64 / q as f64)
        .collect();
    CantorDust::new(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniformMode {
    Equispaced,
    Random,
}

/// Equispaced points `(k + 0.5)/S`, or `S` i.i.d. uniform draws.
pub fn gen_uniform(sample_size: usize, mode: UniformMode, seed: u64) -> Result<CantorDust> {
    if sample_size == 0 {
        return Err(Error::Spec("sample size must be at least 1".into()));
    }
    let s = sample_size as f64;
    let points = match mode {
        UniformMode::Equispaced => (0..sample_size).map(|k| (k as f64 + 0.5) / s).collect(),
        UniformMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..sample_size).map(|_| rng.random::<f64>()).collect()
        }
    };
    CantorDust::new(points)
}
