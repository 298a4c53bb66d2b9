//! Point sets on the unit segment and their box-counting natural measure.

use crate::error::{Error, Result};

/// A finite point set in `[0, 1]`, kept sorted. Repeated points are kept:
/// each occurrence is one sample and counts toward the measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorDust {
    points: Vec<f64>,
}

impl CantorDust {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDust);
        }
        if let Some(&value) = points.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::PointOutOfRange { value });
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of samples, `S`.
    pub fn sample_size(&self) -> usize {
        self.points.len()
    }

    pub fn into_points(self) -> Vec<f64> {
        self.points
    }
}

/// Index of the box containing `point` when `[0, 1]` is split into `boxes`
/// equal boxes `[i/B, (i+1)/B)`, the last one closed.
///
/// The comparison against the box edges is exact for the binary value of
/// `point`, so refining by any integer factor nests boxes consistently.
pub fn box_index(point: f64, boxes: usize) -> usize {
    let b = boxes as f64;
    let mut index = (point * b).floor();
    // fma keeps the sign of point*B - edge exact.
    if index > 0.0 && point.mul_add(b, -index) < 0.0 {
        index -= 1.0;
    } else if point.mul_add(b, -(index + 1.0)) >= 0.0 {
        index += 1.0;
    }
    (index.max(0.0) as usize).min(boxes - 1)
}

/// Equal-box cover of the unit segment with per-box sample proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalMeasure {
    counts: Vec<u64>,
    sample_size: u64,
}

impl NaturalMeasure {
    /// Number of boxes, `B`.
    pub fn box_count(&self) -> usize {
        self.counts.len()
    }

    /// Box length `1/B`.
    pub fn box_length(&self) -> f64 {
        1.0 / self.counts.len() as f64
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    /// Raw sample counts per box.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Probability carried by box `i`.
    pub fn mu(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.sample_size as f64
    }

    /// Per-box probabilities, one per box.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.mu(i)).collect()
    }

    /// Indices of boxes with positive measure.
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
    }
}

/// Covers the unit segment with `boxes` equal boxes and counts the dust in each.
pub fn cover(dust: &CantorDust, boxes: usize) -> Result<NaturalMeasure> {
    if boxes < 2 {
        return Err(Error::BadBoxCount(boxes));
    }
    let mut counts = vec![0u64; boxes];
    for &p in dust.points() {
        counts[box_index(p, boxes)] += 1;
    }
    Ok(NaturalMeasure {
        counts,
        sample_size: dust.sample_size() as u64,
    })
}
