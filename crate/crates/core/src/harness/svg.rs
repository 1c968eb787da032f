//! Minimal SVG plots: line charts, heatmaps and scatter plots.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title)).unwrap();
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let widen = |a: f64, b: f64| if (b - a).abs() < 1e-12 { (a - 1.0, b + 1.0) } else { (a, b) };
        let (x0, x1) = widen(x0, x1);
        let (y0, y1) = widen(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (PAD, W - PAD, PAD, H - PAD);
        writeln!(out, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" stroke="black" fill="none"/>"#).unwrap();
        for k in 0..=4 {
            let fx = self.x0 + (self.x1 - self.x0) * k as f64 / 4.0;
            let fy = self.y0 + (self.y1 - self.y0) * k as f64 / 4.0;
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, self.px(fx), b + 16.0, tick(fx)).unwrap();
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, self.py(fy) + 4.0, tick(fy)).unwrap();
        }
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, escape(xlabel)).unwrap();
        writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        )
        .unwrap();
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// One polyline per `(name, points)` series.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let pts = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let f = Frame::new(x0, x1, y0.min(0.0), y1.max(1.0));
    let mut out = String::new();
    open(&mut out, title);
    f.axes(&mut out, xlabel, ylabel);
    for (i, (name, points)) in series.iter().enumerate() {
        let d: Vec<String> = points.iter().map(|&(x, y)| format!("{:.1},{:.1}", f.px(x), f.py(y))).collect();
        writeln!(out, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#, d.join(" "), color(i)).unwrap();
        let ly = PAD + 14.0 * i as f64;
        writeln!(out, r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#, W - PAD - 150.0, ly - 9.0, color(i)).unwrap();
        writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, W - PAD - 135.0, escape(name)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Square heatmap of integer counts with row and column labels.
pub fn heatmap(title: &str, labels: &[String], counts: &[Vec<u64>]) -> String {
    let n = labels.len().max(1);
    let max = counts.iter().flatten().copied().max().unwrap_or(1).max(1) as f64;
    let cell = (H - 2.0 * PAD) / n as f64;
    let left = PAD + 40.0;
    let mut out = String::new();
    open(&mut out, title);
    for (r, row) in counts.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let shade = 255.0 - 200.0 * v as f64 / max;
            let (x, y) = (left + c as f64 * cell, PAD + r as f64 * cell);
            writeln!(
                out,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{cell:.1}" height="{cell:.1}" fill="rgb({s},{s},255)" stroke="white"/>"#,
                s = shade as u8
            )
            .unwrap();
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v}</text>"#, x + cell / 2.0, y + cell / 2.0 + 4.0).unwrap();
        }
    }
    for (i, name) in labels.iter().enumerate() {
        let mid = PAD + (i as f64 + 0.5) * cell;
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 4.0, mid + 4.0, escape(name)).unwrap();
        let cx = left + (i as f64 + 0.5) * cell;
        writeln!(out, r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#, H - PAD + 14.0, escape(name)).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">predicted</text>"#, left + n as f64 * cell / 2.0, H - 14.0).unwrap();
    out.push_str("</svg>\n");
    out
}

/// Scatter of 2-D points coloured by class; `hollow[i]` draws an open marker.
pub fn scatter(title: &str, points: &[[f64; 2]], classes: &[usize], hollow: &[bool], names: &[String]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if points.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let f = Frame::new(x0, x1, y0, y1);
    let mut out = String::new();
    open(&mut out, title);
    f.axes(&mut out, "t-SNE 1", "t-SNE 2");
    for ((p, &c), &h) in points.iter().zip(classes).zip(hollow) {
        let (fill, stroke) = if h { ("none", color(c)) } else { (color(c), "none") };
        writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{fill}" stroke="{stroke}"/>"#,
            f.px(p[0]),
            f.py(p[1])
        )
        .unwrap();
    }
    for (i, name) in names.iter().enumerate() {
        let ly = PAD + 14.0 * i as f64;
        writeln!(out, r#"<circle cx="{}" cy="{}" r="4" fill="{}"/>"#, W - PAD - 40.0, ly - 4.0, color(i)).unwrap();
        writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, W - PAD - 32.0, escape(name)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}
