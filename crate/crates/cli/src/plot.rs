//! SVG rendering of one or more spectra over the bisectrix `f = alpha`.

use std::fmt::Write as _;

use mfk_core::geometry::default_gap_threshold;
use mfk_core::{detect_fragments, Spectrum};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 140.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub spectrum: Spectrum,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(series: &[Series]) -> Self {
        let pts = || series.iter().flat_map(|s| s.spectrum.points());
        let (mut x0, mut x1) = pts().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.alpha), hi.max(p.alpha))
        });
        let f_top = pts().map(|p| p.f).fold(1.0f64, f64::max);
        let pad = if x1 > x0 { 0.05 * (x1 - x0) } else { 0.05 };
        x0 -= pad;
        x1 += pad;
        Self {
            x: (x0, x1),
            y: (0.0, f_top * 1.05),
        }
    }

    fn sx(&self, alpha: f64) -> f64 {
        LEFT + (alpha - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn sy(&self, f: f64) -> f64 {
        HEIGHT - BOTTOM - (f - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the series. Points closer than the gap threshold (explicit, or
/// the per-spectrum default) are joined; wider gaps split a series into
/// separate fragment groups.
pub fn render(series: &[Series], gap_threshold: Option<f64>) -> String {
    let frame = Frame::fit(series);
    let (px0, py0) = (LEFT, TOP);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<defs><clipPath id="plot-area"><rect x="{px0}" y="{py0}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    let _ = writeln!(svg, r#"<g class="axes" stroke="black" fill="black">"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{px0}" y="{py0}" width="{pw}" height="{ph}" fill="none"/>"#
    );
    for k in 0..=TICKS {
        let t = k as f64 / TICKS as f64;
        let a = frame.x.0 + t * (frame.x.1 - frame.x.0);
        let f = frame.y.0 + t * (frame.y.1 - frame.y.0);
        let (x, y) = (frame.sx(a), frame.sy(f));
        let base = HEIGHT - BOTTOM;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{:.2}"/><text x="{x:.2}" y="{:.2}" stroke="none" text-anchor="middle">{a:.3}</text>"#,
            base + 5.0,
            base + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}"/><text x="{:.2}" y="{:.2}" stroke="none" text-anchor="end">{f:.2}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="middle">&#945;</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" stroke="none" text-anchor="middle" transform="rotate(-90 16 {:.2})">f(&#945;)</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    let _ = writeln!(svg, "</g>");

    let lo = frame.x.0.min(frame.y.0);
    let hi = frame.x.1.max(frame.y.1);
    let _ = writeln!(
        svg,
        r##"<line class="bisectrix" clip-path="url(#plot-area)" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="6 4"/>"##,
        frame.sx(lo),
        frame.sy(lo),
        frame.sx(hi),
        frame.sy(hi)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let label = escape(&s.label);
        let pts = s.spectrum.points();
        let threshold = gap_threshold.unwrap_or_else(|| default_gap_threshold(&s.spectrum));
        let _ = writeln!(
            svg,
            r#"<g class="series" data-label="{label}" stroke="{color}" fill="{color}" clip-path="url(#plot-area)">"#
        );
        if !pts.is_empty() {
            for frag in detect_fragments(&s.spectrum, threshold).fragments {
                let _ = writeln!(svg, r#"<g class="fragment">"#);
                let run = &pts[frag.start..=frag.end];
                if run.len() > 1 {
                    let coords: Vec<String> = run
                        .iter()
                        .map(|p| format!("{:.2},{:.2}", frame.sx(p.alpha), frame.sy(p.f)))
                        .collect();
                    let _ = writeln!(
                        svg,
                        r#"<polyline fill="none" stroke-width="1.5" points="{}"/>"#,
                        coords.join(" ")
                    );
                }
                for p in run {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#,
                        frame.sx(p.alpha),
                        frame.sy(p.f)
                    );
                }
                let _ = writeln!(svg, "</g>");
            }
        }
        let _ = writeln!(svg, "</g>");
    }

    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 14.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{:.2}" r="4" fill="{color}"/><text class="legend-entry" x="{:.2}" y="{y:.2}">{}</text>"#,
            y - 4.0,
            x + 10.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}
