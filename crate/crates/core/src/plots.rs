//! Static SVG renderings: line plots, scatter plots and dendrograms.

use std::fmt::Write;

use crate::cluster::Dendrogram;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Markup escaping; control characters XML cannot carry are dropped.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' | '\n' | '\r' => out.push(c),
            c if c.is_control() || matches!(c, '\u{fffe}' | '\u{ffff}') => {}
            c => out.push(c),
        }
    }
    out
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_x: bool,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, log_x: bool) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            let x = if log_x { x.log10() } else { x };
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 <= 0.0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        Frame {
            x0,
            x1,
            y0: y0 - pad,
            y1: y1 + pad,
            log_x,
        }
    }

    fn px(&self, x: f64) -> Option<f64> {
        let x = if self.log_x { x.log10() } else { x };
        x.is_finite()
            .then(|| LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT))
    }

    fn py(&self, y: f64) -> Option<f64> {
        y.is_finite()
            .then(|| H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM))
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (xa, xb, ya, yb) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{xa},{ya} L{xa},{yb} L{xb},{yb}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let label = fmt_tick(if f.log_x { 10f64.powf(xv) } else { xv });
        let x = xa + t * (xb - xa);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{label}</text>"#, yb + 16.0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let y = yb - t * (yb - ya);
        let _ = writeln!(out, r#"<text x="{}" y="{y:.1}" text-anchor="end">{}</text>"#, xa - 6.0, fmt_tick(yv));
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (xa + xb) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (ya + yb) / 2.0,
        (ya + yb) / 2.0,
        escape(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate().take(24) {
        let y = TOP + 14.0 * i as f64;
        let x = W - RIGHT + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 18.0,
            color(i),
            x + 22.0,
            y + 4.0,
            escape(name)
        );
    }
}

/// One polyline per series; non-finite samples break the line.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)], log_x: bool) -> String {
    let frame = Frame::fit(series.iter().flat_map(|(_, p)| p.iter().copied()), log_x);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    for (i, (_, pts)) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in pts {
            match (frame.px(x), frame.py(y)) {
                (Some(px), Some(py)) => {
                    let _ = write!(d, "{}{px:.2},{py:.2} ", if pen_down { "L" } else { "M" });
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        if !d.is_empty() {
            let _ = writeln!(
                out,
                r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                d.trim_end(),
                color(i)
            );
        }
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Points colored by group index.
pub fn scatter_plot(title: &str, points: &[(f64, f64, usize, String)], group_names: &[String]) -> String {
    let frame = Frame::fit(points.iter().map(|p| (p.0, p.1)), false);
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, "z1", "z2");
    for (x, y, g, label) in points {
        if let (Some(px), Some(py)) = (frame.px(*x), frame.py(*y)) {
            let _ = writeln!(
                out,
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="4" fill="{}"><title>{}</title></circle>"#,
                color(*g),
                escape(label)
            );
        }
    }
    let names: Vec<&str> = group_names.iter().map(String::as_str).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Classic dendrogram with leaves ordered by the merge tree; a dashed line
/// marks the cut height.
pub fn dendrogram_svg(dend: &Dendrogram, labels: &[String], cut_height: f64) -> String {
    let n = dend.n_leaves;
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![dend.root()];
    while let Some(x) = stack.pop() {
        match dend.children(x) {
            Some((a, b)) => {
                stack.push(b);
                stack.push(a);
            }
            None => order.push(x),
        }
    }
    let mut xpos = vec![0.0; n + dend.merges.len()];
    let span = W - LEFT - RIGHT;
    for (k, &leaf) in order.iter().enumerate() {
        xpos[leaf] = LEFT + span * (k as f64 + 0.5) / n.max(1) as f64;
    }
    let top = dend.merges.iter().map(|m| m.height).fold(cut_height, f64::max).max(1e-12);
    let y = |h: f64| H - BOTTOM - h / top * (H - TOP - BOTTOM);
    let mut out = String::new();
    header(&mut out, "complete-linkage dendrogram");
    let frame = Frame {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: top,
        log_x: false,
    };
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT},{TOP} L{LEFT},{}" fill="none" stroke="black"/>"#,
        H - BOTTOM
    );
    for k in 0..=4 {
        let v = frame.y1 * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y(v),
            fmt_tick(v)
        );
    }
    let heights: Vec<f64> = (0..n + dend.merges.len()).map(|i| dend.height(i)).collect();
    for m in &dend.merges {
        let (xa, xb) = (xpos[m.a], xpos[m.b]);
        xpos[m.id] = (xa + xb) / 2.0;
        let _ = writeln!(
            out,
            r#"<path d="M{xa:.2},{:.2} L{xa:.2},{:.2} L{xb:.2},{:.2} L{xb:.2},{:.2}" fill="none" stroke="{}"/>"#,
            y(heights[m.a]),
            y(m.height),
            y(m.height),
            y(heights[m.b]),
            if m.height > cut_height { "#888888" } else { "#1f77b4" }
        );
    }
    let cy = y(cut_height);
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT}" y1="{cy:.2}" x2="{}" y2="{cy:.2}" stroke="#d62728" stroke-dasharray="6,4"/>"##,
        W - RIGHT
    );
    for &leaf in &order {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" font-size="8" text-anchor="end" transform="rotate(-90 {:.2} {})">{}</text>"#,
            xpos[leaf],
            H - BOTTOM + 6.0,
            xpos[leaf],
            H - BOTTOM + 6.0,
            escape(labels.get(leaf).map(String::as_str).unwrap_or(""))
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\">"), "a&lt;b &amp; &quot;c&quot;&gt;");
    }

    #[test]
    fn empty_line_plot_is_complete() {
        let svg = line_plot("t", "x", "y", &[], true);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
