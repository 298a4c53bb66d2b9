//! Multifractal spectra of point sets on the unit segment.
//!
//! The pipeline takes a finite point set (a "Cantor dust"), covers `[0, 1]`
//! with `B` equal boxes to get the natural measure, computes each occupied
//! box's concentration `alpha = ln(mu) / ln(1/B)`, and histograms those into
//! `A` bins to read off `f(alpha) = ln N_alpha / ln B`. The resulting
//! spectrum is then classified by shape:
//!
//! * one cap-shaped piece: pre-crisis,
//! * one piece containing a long straight run: crisis,
//! * two or more pieces separated by gaps: post-crisis bi-multifractal.
//!
//! Reliable estimates need well separated scales, `S >= B^2 >= A^4` for `S`
//! samples; see [`validate_sizing`] and [`auto_size`].
//!
//! [`oracles`] generates dusts with known theoretical spectra for testing.

pub mod dust;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod io;
pub mod oracles;
pub mod signal;

pub use dust::{box_index, cover, CantorDust, NaturalMeasure};
pub use error::{Error, Result};
pub use estimator::{
    alpha_field, auto_size, default_bins, estimate, histogram_spectrum, sweep_boxes,
    validate_sizing, AlphaEntry, AlphaField, SizingPolicy, SizingStatus, SizingVerdict, Spectrum,
    SpectrumParams, SpectrumPoint,
};
pub use geometry::{
    cap_shape_check, classify, compare_sweep, detect_fragments, detect_segment, features, CapCheck,
    ClassifyConfig, FragmentReport, Regime, RegimeReport, SegmentReport, SpectrumFeatures,
    SweepTrend,
};
pub use oracles::{
    gen_farey, gen_selfsimilar, gen_superposed, gen_uniform, oracle_spectrum, OracleSpectrum,
    Placement, SelfSimilarSpec, SuperposedSpec, UniformMode,
};
pub use signal::{normalize_signal, EventSignal, ExperimentMeta};
