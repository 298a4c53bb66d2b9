//! Raw contact-event signals and their projection onto the unit segment.

use serde::{Deserialize, Serialize};

use crate::dust::CantorDust;
use crate::error::{Error, Result};

/// Experiment metadata carried alongside a signal. Informational only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    /// Forcing acceleration, in units of g.
    pub kappa: Option<f64>,
    /// Forcing frequency, Hz.
    pub nu: Option<f64>,
}

/// Timestamped events observed inside a window `[start, end]` (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct EventSignal {
    events: Vec<f64>,
    start: f64,
    end: f64,
    pub meta: ExperimentMeta,
}

impl EventSignal {
    /// Validates and wraps an event list. Events must be finite, strictly
    /// increasing and contained in the window; duplicates are rejected.
    pub fn new(events: Vec<f64>, window: (f64, f64), meta: ExperimentMeta) -> Result<Self> {
        let (start, end) = window;
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::BadWindow { start, end });
        }
        if events.is_empty() {
            return Err(Error::EmptySignal);
        }
        for (index, &time) in events.iter().enumerate() {
            if !(time >= start && time <= end) {
                return Err(Error::EventOutsideWindow { index, time });
            }
            if index > 0 && time <= events[index - 1] {
                return Err(Error::NonIncreasingEvents { index, time });
            }
        }
        Ok(Self {
            events,
            start,
            end,
            meta,
        })
    }

    /// Builds a signal whose window is spanned by its first and last event.
    pub fn spanning(events: Vec<f64>, meta: ExperimentMeta) -> Result<Self> {
        let (Some(&first), Some(&last)) = (events.first(), events.last()) else {
            return Err(Error::EmptySignal);
        };
        Self::new(events, (first, last), meta)
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn window(&self) -> (f64, f64) {
        (self.start, self.end)
    }
}

/// Maps event times affinely onto `[0, 1]`: `(t - start) / (end - start)`.
pub fn normalize_signal(signal: &EventSignal) -> Result<CantorDust> {
    let (start, end) = signal.window();
    let span = end - start;
    let points = signal
        .events()
        .iter()
        .map(|&t| ((t - start) / span).clamp(0.0, 1.0))
        .collect();
    CantorDust::new(points)
}
