//! Plain-text file formats.
//!
//! Event files hold one time (seconds) per line; `#` lines may carry
//! whitespace-separated `key=value` pairs (`kappa`, `nu`, `t_start`,
//! `t_end`). Dust files hold one real in `[0, 1]` per line. Spectrum files
//! are CSV with an `alpha,f` header preceded by `#` parameter lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dust::CantorDust;
use crate::error::{Error, Result};
use crate::estimator::{SizingStatus, SizingVerdict, Spectrum, SpectrumParams, SpectrumPoint};
use crate::signal::{EventSignal, ExperimentMeta};

/// Shortest round-trip decimal, always with a fractional part (`1.0`, not `1`).
pub fn fmt_real(x: f64) -> String {
    let s = x.to_string();
    if x.is_finite() && !s.contains('.') {
        s + ".0"
    } else {
        s
    }
}

/// `#` header pairs and numeric data lines of a text file.
struct Parsed {
    header: HashMap<String, String>,
    notes: Vec<String>,
    rows: Vec<(usize, String)>,
}

fn split_lines(text: &str) -> Parsed {
    let mut header = HashMap::new();
    let mut notes = Vec::new();
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(note) = comment.strip_prefix("note:") {
                notes.push(note.trim().to_owned());
                continue;
            }
            for token in comment.split_whitespace() {
                if let Some((k, v)) = token.split_once('=') {
                    header.insert(k.to_owned(), v.to_owned());
                }
            }
        } else {
            rows.push((i + 1, line.to_owned()));
        }
    }
    Parsed {
        header,
        notes,
        rows,
    }
}

fn parse_real(line: usize, text: &str) -> Result<f64> {
    let value: f64 = text.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a number, found {text:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {text:?}"),
        });
    }
    Ok(value)
}

fn header_real(header: &HashMap<String, String>, key: &str) -> Result<Option<f64>> {
    header
        .get(key)
        .map(|v| {
            v.parse::<f64>().map_err(|_| Error::Parse {
                line: 0,
                message: format!("header {key}={v} is not a number"),
            })
        })
        .transpose()
}

/// Parses an event file. Without `t_start`/`t_end` headers the window spans
/// the first and last event.
pub fn parse_events(text: &str) -> Result<EventSignal> {
    let parsed = split_lines(text);
    let events = parsed
        .rows
        .iter()
        .map(|(line, s)| parse_real(*line, s))
        .collect::<Result<Vec<_>>>()?;
    let meta = ExperimentMeta {
        kappa: header_real(&parsed.header, "kappa")?,
        nu: header_real(&parsed.header, "nu")?,
    };
    let start = header_real(&parsed.header, "t_start")?;
    let end = header_real(&parsed.header, "t_end")?;
    match (start, end) {
        (None, None) => EventSignal::spanning(events, meta),
        (start, end) => {
            let first = events.first().copied().ok_or(Error::EmptySignal)?;
            let last = events.last().copied().ok_or(Error::EmptySignal)?;
            EventSignal::new(events, (start.unwrap_or(first), end.unwrap_or(last)), meta)
        }
    }
}

pub fn parse_dust(text: &str) -> Result<CantorDust> {
    let parsed = split_lines(text);
    let mut points = Vec::with_capacity(parsed.rows.len());
    for (line, s) in &parsed.rows {
        let value = parse_real(*line, s)?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Parse {
                line: *line,
                message: format!("dust point {value} lies outside [0, 1]"),
            });
        }
        points.push(value);
    }
    CantorDust::new(points)
}

/// Dust file text; each header line is written after a `# `.
pub fn write_dust(dust: &CantorDust, header: &[String]) -> String {
    let mut out = String::with_capacity(dust.sample_size() * 20);
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for &p in dust.points() {
        let _ = writeln!(out, "{}", fmt_real(p));
    }
    out
}

pub fn write_spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::new();
    if let Some(p) = spectrum.params() {
        let _ = writeln!(
            out,
            "# sizing={} B={} A={}",
            p.sizing.status, p.boxes, p.bins
        );
        let _ = writeln!(out, "# S={}", p.sample_size);
        let _ = writeln!(out, "# epsilon_alpha={}", fmt_real(p.epsilon_alpha));
        let _ = writeln!(out, "# binning=equal-width");
        for m in &p.sizing.messages {
            let _ = writeln!(out, "# note: {m}");
        }
    }
    out.push_str("alpha,f\n");
    for pt in spectrum.points() {
        let _ = writeln!(out, "{},{}", fmt_real(pt.alpha), fmt_real(pt.f));
    }
    out
}

fn parse_status(s: &str) -> Result<SizingStatus> {
    match s {
        "Ok" => Ok(SizingStatus::Ok),
        "Warning" => Ok(SizingStatus::Warning),
        "Violation" => Ok(SizingStatus::Violation),
        other => Err(Error::Parse {
            line: 0,
            message: format!("unknown sizing status {other:?}"),
        }),
    }
}

/// Parses a spectrum CSV. Parameters are attached only when the `sizing`,
/// `B`, `A` and `S` headers are all present.
pub fn parse_spectrum_csv(text: &str) -> Result<Spectrum> {
    let parsed = split_lines(text);
    let mut rows = parsed.rows.iter();
    match rows.next() {
        Some((_, h)) if h.replace(' ', "") == "alpha,f" => {}
        Some((line, h)) => {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected header \"alpha,f\", found {h:?}"),
            })
        }
        None => return Err(Error::InvalidSpectrum("no data".into())),
    }
    let mut points = Vec::new();
    for (line, row) in rows {
        let (a, f) = row.split_once(',').ok_or_else(|| Error::Parse {
            line: *line,
            message: format!("expected two columns, found {row:?}"),
        })?;
        if f.contains(',') {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected two columns, found {row:?}"),
            });
        }
        points.push(SpectrumPoint::new(
            parse_real(*line, a)?,
            parse_real(*line, f)?,
        ));
    }
    let spectrum = Spectrum::from_points(points)?;

    let h = &parsed.header;
    let params = match (h.get("sizing"), h.get("B"), h.get("A"), h.get("S")) {
        (Some(status), Some(b), Some(a), Some(s)) => {
            let int = |key: &str, v: &str| {
                v.parse::<usize>().map_err(|_| Error::Parse {
                    line: 0,
                    message: format!("header {key}={v} is not a count"),
                })
            };
            Some(SpectrumParams {
                sample_size: int("S", s)?,
                boxes: int("B", b)?,
                bins: int("A", a)?,
                epsilon_alpha: header_real(h, "epsilon_alpha")?.unwrap_or(f64::NAN),
                sizing: SizingVerdict {
                    status: parse_status(status)?,
                    messages: parsed.notes.clone(),
                },
            })
        }
        _ => None,
    };
    Ok(match params {
        Some(p) => spectrum.with_params(p),
        None => spectrum,
    })
}
