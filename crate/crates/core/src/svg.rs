//! Static SVG heatmap of a (t, z) energy table.

use std::fmt::Write as _;

/// Five-stop blue→yellow ramp evaluated at s ∈ [0, 1].
fn ramp(s: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.0 };
    let x = s * 4.0;
    let i = (x.floor() as usize).min(3);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + f * (q - p)).round() as u8;
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Heatmap with rows indexed by `row_labels` (drawn bottom to top) and `cols` columns.
/// `marks` are (row, col) cells outlined in red.
pub fn heatmap(title: &str, row_labels: &[f64], values: &[Vec<f64>], marks: &[(usize, usize)]) -> String {
    let rows = values.len();
    let cols = values.first().map_or(0, |r| r.len());
    let (cw, ch) = (8.0, 14.0);
    let (left, top) = (60.0, 40.0);
    let width = left + cw * cols as f64 + 110.0;
    let height = top + ch * rows as f64 + 50.0;
    let finite = values.iter().flatten().filter(|v| v.is_finite());
    let lo = finite.clone().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="14">{}</text>"#, escape(title));
    for (i, row) in values.iter().enumerate() {
        let y = top + ch * (rows - 1 - i) as f64;
        for (j, v) in row.iter().enumerate() {
            let (r, g, b) = ramp((v - lo) / span);
            let x = left + cw * j as f64;
            let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="rgb({r},{g},{b})"/>"#);
        }
        if i % 5 == 0 || i + 1 == rows {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"#,
                left - 4.0,
                y + ch - 3.0,
                row_labels.get(i).copied().unwrap_or(i as f64)
            );
        }
    }
    for &(i, j) in marks {
        let y = top + ch * (rows - 1 - i) as f64;
        let x = left + cw * j as f64;
        let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="none" stroke="red" stroke-width="1.5"/>"#);
    }
    let base = top + ch * rows as f64;
    let _ = writeln!(s, r#"<text x="{}" y="{}">z index</text>"#, left, base + 18.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" transform="rotate(-90 14 {})">t</text>"#, top + 40.0, top + 40.0);
    let lx = left + cw * cols as f64 + 20.0;
    for k in 0..=10 {
        let f = k as f64 / 10.0;
        let (r, g, b) = ramp(f);
        let y = top + ch * rows as f64 * (1.0 - f) - 4.0;
        let _ = writeln!(s, r#"<rect x="{lx}" y="{y}" width="14" height="8" fill="rgb({r},{g},{b})"/>"#);
        if k % 5 == 0 {
            let _ = writeln!(s, r#"<text x="{}" y="{}">{:.4e}</text>"#, lx + 18.0, y + 8.0, lo + f * span);
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
