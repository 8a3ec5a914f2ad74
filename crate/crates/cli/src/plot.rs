//! Minimal SVG charts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

pub enum Mark {
    Line,
    Dots,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: &'a [(f64, f64)],
    pub mark: Mark,
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let lo = lo.min(0.0);
    if hi - lo < 1e-12 {
        (lo, lo + 1.0)
    } else {
        (lo, hi + (hi - lo) * 0.05)
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn chart(c: &Chart<'_>) -> String {
    let (x0, x1) = range(c.points.iter().map(|p| p.0));
    let (y0, y1) = range(c.points.iter().map(|p| p.1));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    header(&mut s, c.title);
    let _ = writeln!(s, r#"<g stroke="black"><line x1="{PAD}" y1="{}" x2="{}" y2="{}"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}"/></g>"#, H - PAD, W - PAD, H - PAD, H - PAD);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(xv), H - PAD + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, PAD - 6.0, sy(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(c.x_label));
    let _ = writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#, H / 2.0, H / 2.0, escape(c.y_label));
    match c.mark {
        Mark::Line => {
            let pts: Vec<String> = c.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, pts.join(" "));
            for &(x, y) in c.points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
            }
        }
        Mark::Dots => {
            for &(x, y) in c.points {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue" fill-opacity="0.6"/>"#, sx(x), sy(y));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Boxes of a cover of `[0,1]` (stacked bars) or `[0,1]²`.
pub fn boxes(title: &str, sides: &[Vec<(f64, f64)>]) -> String {
    let side = H - 2.0 * PAD;
    let (ox, oy) = ((W - side) / 2.0, PAD);
    let mut s = String::new();
    header(&mut s, title);
    let _ = writeln!(s, r#"<rect x="{ox}" y="{oy}" width="{side}" height="{side}" fill="none" stroke="black"/>"#);
    let n = sides.len().max(1) as f64;
    for (i, b) in sides.iter().enumerate() {
        let hue = (i as f64 * 137.5) % 360.0;
        let (x, w) = (ox + b[0].0 * side, (b[0].1 - b[0].0) * side);
        let (y, h) = match b.get(1) {
            Some(&(lo, hi)) => (oy + (1.0 - hi) * side, (hi - lo) * side),
            None => (oy + i as f64 * side / n, side / n * 0.8),
        };
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="hsl({hue:.0},60%,55%)" fill-opacity="0.35" stroke="hsl({hue:.0},60%,35%)"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}
