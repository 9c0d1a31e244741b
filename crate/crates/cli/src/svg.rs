//! Poincaré-disk figures as plain SVG text.

use std::fmt::Write;

const SIZE: f64 = 480.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn px(u: f64, v: f64) -> (f64, f64) {
    let r = SIZE / 2.0 - 10.0;
    (SIZE / 2.0 + r * u, SIZE / 2.0 - r * v)
}

/// Closed curves drawn inside the unit-circle frame.
pub fn poincare_disk(title: &str, curves: &[Curve]) -> String {
    let mut s = String::new();
    let c = SIZE / 2.0;
    let r = SIZE / 2.0 - 10.0;
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{h}" viewBox="0 0 {SIZE} {h}">"#,
        h = SIZE + 24.0 + 16.0 * curves.len() as f64
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="#444" stroke-width="1"/>"##);
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &(u, v)) in curve.points.iter().enumerate() {
            let (x, y) = px(u, v);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if j == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="8" y="{}" font-family="monospace" font-size="12" fill="{color}">{}</text>"#,
            SIZE + 16.0 * (i + 1) as f64,
            escape(&curve.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
