//! Minimal self-contained SVG 1.1 plots: line panels with shaded bands and
//! a colored-cell heat map on log axes.

use std::fmt::Write as _;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 360.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 52.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(label: &str) -> Self {
        Axis { label: label.into(), log: false }
    }

    pub fn log(label: &str) -> Self {
        Axis { label: label.into(), log: true }
    }
}

/// A median with its 5th and 95th percentiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub x: f64,
    pub mid: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<BandPoint>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinePanel {
    pub title: String,
    pub x: Option<Axis>,
    pub y: Option<Axis>,
    pub series: Vec<Series>,
    /// Dashed reference levels.
    pub hlines: Vec<f64>,
    pub vlines: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatPanel {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
    pub value_label: String,
    /// Overlaid reference curves in data coordinates.
    pub curves: Vec<(String, Vec<(f64, f64)>)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(w: f64, h: f64) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>");
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Maps data values onto a pixel interval.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(min: f64, max: f64, log: bool, p0: f64, p1: f64) -> Self {
        let (mut lo, mut hi) = if log { (min.log10(), max.log10()) } else { (min, max) };
        if !(hi > lo) {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            lo -= pad;
            hi += pad;
        }
        Scale { lo, hi, log, p0, p1 }
    }

    fn usable(&self, v: f64) -> bool {
        v.is_finite() && (!self.log || v > 0.0)
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        self.p0 + (t - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let span = self.hi - self.lo;
            let mults: &[f64] = if span < 1.2 {
                &[1.0, 2.0, 3.0, 5.0, 7.0]
            } else if span < 2.5 {
                &[1.0, 2.0, 5.0]
            } else {
                &[1.0]
            };
            let mut out = Vec::new();
            for e in (self.lo.floor() as i32)..=(self.hi.ceil() as i32) {
                for m in mults {
                    let v = m * 10f64.powi(e);
                    let t = v.log10();
                    if t >= self.lo - 1e-9 && t <= self.hi + 1e-9 {
                        out.push(v);
                    }
                }
            }
            out
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 2.5, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            (first..)
                .map(|k| k as f64 * step)
                .take_while(|v| *v <= self.hi + step * 1e-9)
                .collect()
        }
    }
}

fn extent(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return if log { (0.1, 10.0) } else { (0.0, 1.0) };
    }
    if log {
        (lo, hi)
    } else {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    }
}

fn axes(out: &mut String, sx: &Scale, sy: &Scale, x: &Axis, y: &Axis, title: &str, oy: f64) {
    let (x0, x1, y0, y1) = (sx.p0, sx.p1, sy.p0, sy.p1);
    let _ = writeln!(
        out,
        "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y0 - y1
    );
    for t in sx.ticks() {
        let px = sx.map(t);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{y0:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            y0 + 5.0,
            y0 + 18.0,
            tick_label(t)
        );
    }
    for t in sy.ticks() {
        let py = sy.map(t);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0:.2}\" y2=\"{py:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        y0 + 38.0,
        esc(&x.label)
    );
    let (lx, ly) = (x0 - 54.0, (y0 + y1) / 2.0);
    let _ = writeln!(
        out,
        "<text x=\"{lx:.2}\" y=\"{ly:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 {lx:.2} {ly:.2})\">{}</text>",
        esc(&y.label)
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        (x0 + x1) / 2.0,
        oy + 22.0,
        esc(title)
    );
}

fn line_panel(out: &mut String, panel: &LinePanel, oy: f64) {
    let xa = panel.x.clone().unwrap_or_else(|| Axis::linear("x"));
    let ya = panel.y.clone().unwrap_or_else(|| Axis::linear("y"));
    let pts = || panel.series.iter().flat_map(|s| s.points.iter());
    let (xmin, xmax) = extent(pts().map(|p| p.x).chain(panel.vlines.iter().copied()), xa.log);
    let (ymin, ymax) = extent(
        pts().flat_map(|p| [p.lo, p.mid, p.hi]).chain(panel.hlines.iter().copied()),
        ya.log,
    );
    let sx = Scale::new(xmin, xmax, xa.log, MARGIN_L, PANEL_W - MARGIN_R);
    let sy = Scale::new(ymin, ymax, ya.log, oy + PANEL_H - MARGIN_B, oy + MARGIN_T);
    axes(out, &sx, &sy, &xa, &ya, &panel.title, oy);

    for (k, s) in panel.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let good: Vec<&BandPoint> = s
            .points
            .iter()
            .filter(|p| sx.usable(p.x) && sy.usable(p.mid) && sy.usable(p.lo) && sy.usable(p.hi))
            .collect();
        if good.len() > 1 {
            let mut poly: Vec<String> = good
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx.map(p.x), sy.map(p.hi)))
                .collect();
            poly.extend(good.iter().rev().map(|p| format!("{:.2},{:.2}", sx.map(p.x), sy.map(p.lo))));
            let _ = writeln!(
                out,
                "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"none\"/>",
                poly.join(" ")
            );
        }
        let line: Vec<String> = s
            .points
            .iter()
            .filter(|p| sx.usable(p.x) && sy.usable(p.mid))
            .map(|p| format!("{:.2},{:.2}", sx.map(p.x), sy.map(p.mid)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            line.join(" ")
        );
        let ly = oy + MARGIN_T + 10.0 + 18.0 * k as f64;
        let lx = PANEL_W - MARGIN_R + 12.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
    for &h in &panel.hlines {
        if sy.usable(h) {
            let py = sy.map(h);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
                sx.p0, sx.p1
            );
        }
    }
    for &v in &panel.vlines {
        if sx.usable(v) {
            let px = sx.map(v);
            let _ = writeln!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
                sy.p0, sy.p1
            );
        }
    }
}

/// Line panels stacked vertically in one document.
pub fn line_plot_svg(panels: &[LinePanel]) -> String {
    let mut out = header(PANEL_W, PANEL_H * panels.len().max(1) as f64);
    for (i, p) in panels.iter().enumerate() {
        line_panel(&mut out, p, PANEL_H * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

/// Piecewise-linear blue-to-yellow ramp, `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |u: f64, v: f64| (u + (v - u) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Geometric (log) or arithmetic cell edges around sorted centers.
fn edges(centers: &[f64], log: bool) -> Vec<f64> {
    let f = |v: f64| if log { v.ln() } else { v };
    let g = |v: f64| if log { v.exp() } else { v };
    let c: Vec<f64> = centers.iter().map(|v| f(*v)).collect();
    let mut e = Vec::with_capacity(c.len() + 1);
    if c.len() == 1 {
        let w = if log { 0.2 } else { c[0].abs().max(1.0) * 0.1 };
        return vec![g(c[0] - w), g(c[0] + w)];
    }
    e.push(c[0] - (c[1] - c[0]) / 2.0);
    for w in c.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    e.push(c[c.len() - 1] + (c[c.len() - 1] - c[c.len() - 2]) / 2.0);
    e.into_iter().map(g).collect()
}

/// Colored-cell heat map with a log-scale color legend whose bounds are
/// taken from the finite positive cell values.
pub fn heatmap_svg(panel: &HeatPanel) -> String {
    let mut out = header(PANEL_W, PANEL_H);
    let xe = edges(&panel.xs, panel.x.log);
    let ye = edges(&panel.ys, panel.y.log);
    let sx = Scale::new(xe[0], xe[xe.len() - 1], panel.x.log, MARGIN_L, PANEL_W - MARGIN_R);
    let sy = Scale::new(ye[0], ye[ye.len() - 1], panel.y.log, PANEL_H - MARGIN_B, MARGIN_T);
    let (vmin, vmax) = extent(panel.values.iter().copied(), true);
    let (lmin, lmax) = (vmin.log10(), vmax.log10());
    let frac = |v: f64| {
        if lmax > lmin {
            (v.log10() - lmin) / (lmax - lmin)
        } else {
            0.5
        }
    };
    let nx = panel.xs.len();
    for iy in 0..panel.ys.len() {
        for ix in 0..nx {
            let v = panel.values.get(iy * nx + ix).copied().unwrap_or(f64::NAN);
            let fill = if v.is_finite() && v > 0.0 { ramp(frac(v)) } else { "#bbbbbb".into() };
            let (x0, x1) = (sx.map(xe[ix]), sx.map(xe[ix + 1]));
            let (y0, y1) = (sy.map(ye[iy]), sy.map(ye[iy + 1]));
            let _ = writeln!(
                out,
                "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
                x1 - x0,
                y0 - y1
            );
        }
    }
    axes(&mut out, &sx, &sy, &panel.x, &panel.y, &panel.title, 0.0);
    let _ = writeln!(
        out,
        "<clipPath id=\"plot-area\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\"/></clipPath>",
        sx.p0,
        sy.p1,
        sx.p1 - sx.p0,
        sy.p0 - sy.p1
    );
    const CURVE_COLORS: [&str; 3] = ["white", "#ff4040", "black"];
    for (k, (label, pts)) in panel.curves.iter().enumerate() {
        let color = CURVE_COLORS[k % CURVE_COLORS.len()];
        let line: Vec<String> = pts
            .iter()
            .filter(|(x, y)| sx.usable(*x) && sy.usable(*y))
            .map(|(x, y)| format!("{:.2},{:.2}", sx.map(*x), sy.map(*y)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" stroke-dasharray=\"6 3\" clip-path=\"url(#plot-area)\"/>",
            line.join(" ")
        );
        let ly = PANEL_H - MARGIN_B + 38.0 + 0.0 * k as f64;
        let lx = MARGIN_L + 200.0 * k as f64 + 260.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{}</text>",
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            esc(label)
        );
    }
    // Legend: vertical gradient, top = max.
    let (bx, by0, by1) = (PANEL_W - MARGIN_R + 30.0, MARGIN_T, PANEL_H - MARGIN_B);
    let steps = 40;
    let h = (by1 - by0) / steps as f64;
    for k in 0..steps {
        let t = 1.0 - (k as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{bx:.2}\" y=\"{:.2}\" width=\"18\" height=\"{:.2}\" fill=\"{}\"/>",
            by0 + h * k as f64,
            h + 0.5,
            ramp(t)
        );
    }
    let _ = writeln!(
        out,
        "<rect x=\"{bx:.2}\" y=\"{by0:.2}\" width=\"18\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        by1 - by0
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\">{:.3e}</text><text x=\"{:.2}\" y=\"{:.2}\">{:.3e}</text>",
        bx + 22.0,
        by0 + 10.0,
        vmax,
        bx + 22.0,
        by1,
        vmin
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{} (log scale)</text>",
        bx - 10.0,
        by0 - 8.0,
        esc(&panel.value_label)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_series() -> LinePanel {
        LinePanel {
            title: "a < b & c".into(),
            x: Some(Axis::log("eps")),
            y: Some(Axis::linear("err")),
            series: vec![Series {
                label: "s".into(),
                points: vec![
                    BandPoint { x: 0.01, mid: 0.5, lo: 0.4, hi: 0.6 },
                    BandPoint { x: 0.1, mid: 0.1, lo: 0.0, hi: 0.2 },
                    BandPoint { x: 0.2, mid: f64::NAN, lo: f64::NAN, hi: f64::NAN },
                ],
            }],
            hlines: vec![0.0],
            vlines: vec![],
        }
    }

    #[test]
    fn line_plot_is_well_formed() {
        let s = line_plot_svg(&[one_series(), one_series()]);
        assert!(s.starts_with("<?xml version=\"1.0\""));
        assert_eq!(s.matches("<svg ").count(), 1);
        assert!(s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a &lt; b &amp; c"));
        assert!(!s.contains("NaN"));
        assert_eq!(s.matches("<polygon").count(), 2);
    }

    #[test]
    fn heatmap_legend_prints_bounds() {
        let p = HeatPanel {
            title: "h".into(),
            x: Axis::log("d"),
            y: Axis::log("N"),
            xs: vec![0.1, 0.2],
            ys: vec![1e3, 1e4],
            values: vec![0.01, 0.1, f64::NAN, 1.0],
            value_label: "err".into(),
            curves: vec![("c".into(), vec![(0.1, 1e3), (0.2, 1e4)])],
        };
        let s = heatmap_svg(&p);
        assert!(s.starts_with("<?xml"));
        assert!(s.contains("1.000e0"));
        assert!(s.contains("1.000e-2"));
        assert!(s.contains("#bbbbbb"));
    }

    #[test]
    fn linear_ticks_are_round() {
        let s = Scale::new(0.0, 1.0, false, 0.0, 1.0);
        let labels: Vec<String> = s.ticks().into_iter().map(tick_label).collect();
        assert_eq!(labels, ["0", "0.2", "0.4", "0.6", "0.8", "1"]);
    }
}
