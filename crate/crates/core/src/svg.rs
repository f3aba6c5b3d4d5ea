//! Minimal SVG 1.1 plots: stem plots for 1D spectra, intensity maps for 2D grids.

use std::fmt::Write;

use crate::measures::FrequencyGrid;

#[derive(Clone, Debug, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub width: f64,
    pub height: f64,
    pub log_scale: bool,
    /// Floor for the log scale, relative to the maximum.
    pub log_floor: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            title: String::new(),
            width: 800.0,
            height: 400.0,
            log_scale: false,
            log_floor: 1e-6,
        }
    }
}

const MARGIN: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(o: &PlotOptions) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>
<text x="{cx:.1}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{t}</text>"#,
        w = o.width,
        h = o.height,
        cx = o.width / 2.0,
        t = escape(&o.title)
    );
    s
}

/// Maps values to [0, 1], logarithmically when requested.
fn normalizer(max: f64, o: &PlotOptions) -> impl Fn(f64) -> f64 {
    let log = o.log_scale;
    let floor = o.log_floor.max(f64::MIN_POSITIVE);
    move |v: f64| {
        if !(max > 0.0) {
            return 0.0;
        }
        let r = (v / max).max(0.0);
        if log {
            ((r.max(floor)).ln() - floor.ln()) / -floor.ln()
        } else {
            r.min(1.0)
        }
    }
}

/// Vertical stems at `(x, height)` with an optional background curve.
pub fn stem_plot(stems: &[(f64, f64)], curve: Option<(&[f64], &[f64])>, o: &PlotOptions) -> String {
    let mut xs: Vec<f64> = stems.iter().map(|s| s.0).collect();
    if let Some((cx, _)) = curve {
        xs.extend_from_slice(cx);
    }
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
    let max = stems
        .iter()
        .map(|s| s.1)
        .chain(curve.into_iter().flat_map(|(_, y)| y.iter().copied()))
        .fold(0.0, f64::max);
    let norm = normalizer(max, o);
    let (pw, ph) = (o.width - 2.0 * MARGIN, o.height - 2.0 * MARGIN);
    let px = |x: f64| MARGIN + (x - lo) / (hi - lo) * pw;
    let py = |v: f64| o.height - MARGIN - norm(v) * ph;
    let mut s = header(o);
    let base = o.height - MARGIN;
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{base}" x2="{:.2}" y2="{base}" stroke="black"/>"#,
        o.width - MARGIN
    );
    for (v, anchor) in [(lo, "start"), (hi, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{v:.4}</text>"#,
            px(v),
            base + 16.0
        );
    }
    if let Some((cx, cy)) = curve {
        let pts: Vec<String> = cx.iter().zip(cy).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(s, r##"<polyline fill="none" stroke="#999999" stroke-width="0.8" points="{}"/>"##, pts.join(" "));
    }
    for (x, h) in stems {
        let (x, y) = (px(*x), py(*h));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{y:.2}" stroke="#1f4e9c" stroke-width="1.5"/><circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="#1f4e9c"/>"##
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Grey-scale map of `values` on a 2D grid, max-pooled to at most
/// `max_cells` cells per axis.
pub fn intensity_map(grid: &FrequencyGrid, values: &[f64], max_cells: usize, o: &PlotOptions) -> String {
    assert_eq!(grid.dim(), 2, "intensity maps need a 2D grid");
    let (nx, ny) = (grid.resolution[0], grid.resolution[1]);
    let (fx, fy) = (nx.div_ceil(max_cells.max(1)), ny.div_ceil(max_cells.max(1)));
    let (cx, cy) = (nx.div_ceil(fx), ny.div_ceil(fy));
    let mut pooled = vec![0.0f64; cx * cy];
    for (i, v) in values.iter().enumerate() {
        let idx = grid.unflatten(i);
        let c = (idx[0] / fx) + cx * (idx[1] / fy);
        pooled[c] = pooled[c].max(*v);
    }
    let max = pooled.iter().copied().fold(0.0, f64::max);
    let norm = normalizer(max, o);
    let (pw, ph) = (o.width - 2.0 * MARGIN, o.height - 2.0 * MARGIN);
    let (w, h) = (pw / cx as f64, ph / cy as f64);
    let mut s = header(o);
    for j in 0..cy {
        for i in 0..cx {
            let g = (255.0 * (1.0 - norm(pooled[i + cx * j]))).round() as u8;
            // Row 0 is the bottom of the frequency box.
            let y = o.height - MARGIN - (j + 1) as f64 * h;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                MARGIN + i as f64 * w,
                w + 0.05,
                h + 0.05
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
