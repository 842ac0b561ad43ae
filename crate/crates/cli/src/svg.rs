//! Fixed-style SVG rendering of a [`Plot`].

use std::fmt::Write;

use confusion_core::api::Plot;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;
const MAX_RADIUS: f64 = 8.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render(plot: &Plot) -> String {
    let [x0, x1, y0, y1] = plot.window;
    let inner = SIZE - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * inner;
    let sy = |y: f64| SIZE - MARGIN - (y - y0) / (y1 - y0) * inner;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, SIZE / 2.0, MARGIN / 2.0, escape(&plot.title));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        SIZE - MARGIN / 4.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{0}" y="{1}" text-anchor="middle" transform="rotate(-90 {0} {1})">{2}</text>"#,
        MARGIN / 3.0,
        SIZE / 2.0,
        escape(&plot.y_label)
    );
    for (v, x, y, anchor) in [
        (x0, sx(x0), SIZE - MARGIN + 14.0, "start"),
        (x1, sx(x1), SIZE - MARGIN + 14.0, "end"),
        (y0, MARGIN - 4.0, sy(y0), "end"),
        (y1, MARGIN - 4.0, sy(y1) + 10.0, "end"),
    ] {
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{v}</text>"#);
    }
    for line in &plot.lines {
        let points: Vec<String> = line.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, points.join(" "));
    }
    for &(x, y, w) in &plot.dots {
        let r = MAX_RADIUS * w.clamp(0.0, 1.0).sqrt();
        if r > 0.0 {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="darkorange" fill-opacity="0.7"/>"#, sx(x), sy(y));
        }
    }
    out.push_str("</svg>\n");
    out
}
