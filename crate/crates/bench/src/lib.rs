//! Shared fixtures for the benchmarks.

use mfk_core::{estimate, gen_selfsimilar, CantorDust, SelfSimilarSpec, SizingPolicy, Spectrum};

/// The binomial cascade used throughout: weights (0.3, 0.7), dyadic split.
pub fn cascade_spec(sample_size: usize) -> SelfSimilarSpec {
    SelfSimilarSpec::binomial(0.3, 0.5, 13, sample_size, 7)
}

pub fn cascade_dust(sample_size: usize) -> CantorDust {
    gen_selfsimilar(&cascade_spec(sample_size)).expect("valid cascade spec")
}

pub fn cascade_spectrum(boxes: usize, bins: usize) -> Spectrum {
    estimate(&cascade_dust(10_000), boxes, bins, SizingPolicy::Override).expect("estimate")
}
