//! Deterministic SVG rendering of dialectograms.

use std::fmt::Write as _;

use dialectoscope_core::dialectogram::{Dialectogram, DialectogramRecord, EcClass};

pub const WIDTH: f64 = 1600.0;
pub const HEIGHT: f64 = 1200.0;
const MARGIN_LEFT: f64 = 140.0;
const MARGIN_RIGHT: f64 = 260.0;
const MARGIN_TOP: f64 = 90.0;
const MARGIN_BOTTOM: f64 = 130.0;
const FONT_SIZE: f64 = 13.0;
/// Rough advance width of one label character at `FONT_SIZE`.
const CHAR_WIDTH: f64 = 7.4;

/// Default number of annotated points.
pub const DEFAULT_LABELS: usize = 80;

fn color(c: EcClass) -> &'static str {
    match c {
        EcClass::Both => "#7b3294",
        EcClass::Only1 => "#d7191c",
        EcClass::Only2 => "#2c7bb6",
        EcClass::Neither => "#a6a6a6",
    }
}

fn legend_text(c: EcClass) -> &'static str {
    match c {
        EcClass::Both => "excess in both corpora",
        EcClass::Only1 => "excess in corpus 1 only",
        EcClass::Only2 => "excess in corpus 2 only",
        EcClass::Neither => "excess in neither",
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn overlaps(&self, o: &Rect) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }
}

/// Shared, symmetric axis range so the diagonal sits at 45°.
fn axis_extent(records: &[DialectogramRecord]) -> f64 {
    let m = records
        .iter()
        .flat_map(|r| [r.alpha1.abs(), r.alpha2.abs()])
        .fold(0.0f64, f64::max);
    if m > 0.0 {
        nice_ceil(m * 1.05)
    } else {
        1.0
    }
}

/// Smallest of {1, 2, 2.5, 5}·10ᵏ at or above `x`.
fn nice_ceil(x: f64) -> f64 {
    let p = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * p)
        .find(|v| *v >= x)
        .unwrap_or(10.0 * p)
}

/// Renders the scatter: x = corpus-1 projection, y = corpus-2 projection,
/// marker area ∝ √(mean frequency), color by excess co-occurrence class,
/// dashed diagonal, and up to `labels` non-overlapping annotations placed
/// greedily in order of |α¹| + |α²|.
pub fn render_dialectogram(d: &Dialectogram, labels: usize) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let ext = axis_extent(&d.records);
    let sx = |v: f64| MARGIN_LEFT + (v + ext) / (2.0 * ext) * plot_w;
    let sy = |v: f64| MARGIN_TOP + (ext - v) / (2.0 * ext) * plot_h;
    let max_freq = d.records.iter().map(|r| r.mean_frequency()).fold(1.0f64, f64::max);
    // Area ∝ √f means radius ∝ f^¼.
    let radius = |r: &DialectogramRecord| 2.0 + 9.0 * (r.mean_frequency() / max_freq).powf(0.25);

    let mut s = String::new();
    writeln!(
        s,
        r##"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<style>
text {{ font-family: sans-serif; font-size: {FONT_SIZE}px; fill: #222222; }}
.title {{ font-size: 22px; }}
.axis-label {{ font-size: 16px; }}
.tick {{ font-size: 12px; fill: #555555; }}
.frame {{ fill: none; stroke: #333333; stroke-width: 1.2; }}
.zero {{ stroke: #888888; stroke-width: 1; }}
.grid {{ stroke: #e6e6e6; stroke-width: 1; }}
.diagonal {{ stroke: #555555; stroke-width: 1.2; stroke-dasharray: 8 6; }}
.point {{ fill-opacity: 0.7; stroke: #ffffff; stroke-width: 0.6; }}
</style>
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    )
    .unwrap();
    writeln!(
        s,
        r##"<text class="title" x="{:.2}" y="48" text-anchor="middle">Dialectogram of “{}” (offset norm {:.4})</text>"##,
        MARGIN_LEFT + plot_w / 2.0,
        escape(&d.focal),
        d.offset_norm
    )
    .unwrap();

    // Grid and ticks.
    for k in -4..=4 {
        let v = ext * k as f64 / 4.0;
        let (x, y) = (sx(v), sy(v));
        let class = if k == 0 { "zero" } else { "grid" };
        writeln!(
            s,
            r##"<line class="{class}" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"##,
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        )
        .unwrap();
        writeln!(
            s,
            r##"<line class="{class}" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        )
        .unwrap();
        let label = format!("{v:.2}");
        writeln!(
            s,
            r##"<text class="tick" x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            MARGIN_TOP + plot_h + 22.0
        )
        .unwrap();
        writeln!(
            s,
            r##"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            MARGIN_LEFT - 10.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r##"<rect class="frame" x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}"/>"##
    )
    .unwrap();
    writeln!(
        s,
        r##"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"##,
        sx(-ext),
        sy(-ext),
        sx(ext),
        sy(ext)
    )
    .unwrap();

    // Axis labels carry the focal word's translations.
    writeln!(
        s,
        r##"<text class="axis-label" x="{:.2}" y="{:.2}" text-anchor="middle">projection in corpus 1 — “{}” translates to “{}” in corpus 2</text>"##,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 50.0,
        escape(&d.focal),
        escape(&d.translation_1to2)
    )
    .unwrap();
    let (lx, ly) = (50.0, MARGIN_TOP + plot_h / 2.0);
    writeln!(
        s,
        r##"<text class="axis-label" x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">projection in corpus 2 — “{}” translates to “{}” in corpus 1</text>"##,
        escape(&d.focal),
        escape(&d.translation_2to1)
    )
    .unwrap();

    // Points: uncolored class first so the informative ones sit on top.
    let order = [EcClass::Neither, EcClass::Both, EcClass::Only2, EcClass::Only1];
    s.push_str("<g>\n");
    for class in order {
        for r in d.records.iter().filter(|r| r.ec_class == class) {
            writeln!(
                s,
                r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{}"/>"##,
                sx(r.alpha1),
                sy(r.alpha2),
                radius(r),
                color(class)
            )
            .unwrap();
        }
    }
    s.push_str("</g>\n");

    // Labels.
    let mut ranked: Vec<&DialectogramRecord> = d.records.iter().collect();
    ranked.sort_by(|a, b| {
        (b.alpha1.abs() + b.alpha2.abs())
            .total_cmp(&(a.alpha1.abs() + a.alpha2.abs()))
            .then_with(|| a.token.cmp(&b.token))
    });
    let bounds = Rect {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        x1: MARGIN_LEFT + plot_w,
        y1: MARGIN_TOP + plot_h,
    };
    let mut placed: Vec<Rect> = Vec::new();
    s.push_str("<g>\n");
    for r in ranked.into_iter().take(labels) {
        let (px, py, pr) = (sx(r.alpha1), sy(r.alpha2), radius(r));
        let w = CHAR_WIDTH * r.token.chars().count() as f64;
        let h = FONT_SIZE + 2.0;
        let gap = pr + 3.0;
        // Right, left, above, below; then the four diagonals.
        let candidates = [
            (px + gap, py - h / 2.0),
            (px - gap - w, py - h / 2.0),
            (px - w / 2.0, py - gap - h),
            (px - w / 2.0, py + gap),
            (px + gap, py - gap - h),
            (px - gap - w, py - gap - h),
            (px + gap, py + gap),
            (px - gap - w, py + gap),
        ];
        let spot = candidates.iter().map(|&(x, y)| Rect {
            x0: x,
            y0: y,
            x1: x + w,
            y1: y + h,
        });
        let spot = spot.into_iter().find(|c| {
            c.x0 >= bounds.x0 && c.x1 <= bounds.x1 && c.y0 >= bounds.y0 && c.y1 <= bounds.y1 && !placed.iter().any(|p| p.overlaps(c))
        });
        if let Some(c) = spot {
            writeln!(
                s,
                r##"<text x="{:.2}" y="{:.2}">{}</text>"##,
                c.x0,
                c.y1 - 4.0,
                escape(&r.token)
            )
            .unwrap();
            placed.push(c);
        }
    }
    s.push_str("</g>\n");

    // Legend.
    let lx = MARGIN_LEFT + plot_w + 25.0;
    let mut ly = MARGIN_TOP + 10.0;
    for class in [EcClass::Only1, EcClass::Only2, EcClass::Both, EcClass::Neither] {
        writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="7" fill="{}"/><text class="legend" x="{:.2}" y="{:.2}">{}</text>"##,
            lx + 7.0,
            ly,
            color(class),
            lx + 22.0,
            ly + 4.5,
            legend_text(class)
        )
        .unwrap();
        ly += 26.0;
    }
    writeln!(
        s,
        r##"<text class="tick" x="{lx:.2}" y="{:.2}">marker area ∝ √(mean frequency)</text>"##,
        ly + 8.0
    )
    .unwrap();
    writeln!(s, r##"<text class="tick" x="{lx:.2}" y="{:.2}">{} words shown</text>"##, ly + 28.0, d.records.len()).unwrap();
    s.push_str("</svg>\n");
    s
}
