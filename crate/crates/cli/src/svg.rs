//! Minimal SVG scatter plots of torus configurations.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 30.0;

fn header(out: &mut String) {
    let full = SIZE + 2.0 * MARGIN;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn marker(out: &mut String, x: f64, y: f64) {
    let _ = writeln!(out, r##"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="#1f77b4" class="point"/>"##);
}

/// Points on `T^1` drawn on a circle, or on `T^2` drawn in the square
/// `[0, 2π)^2` with arrows marking the identified edges.
pub fn scatter(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    header(&mut out);
    let d = points.first().map_or(2, |p| p.len());
    if d == 1 {
        let (c, r) = (MARGIN + SIZE / 2.0, SIZE / 2.0 - 10.0);
        let _ = writeln!(out, r#"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="black"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">0</text>"#, c + r + 4.0, c + 4.0);
        for p in points {
            marker(&mut out, c + r * p[0].cos(), c - r * p[0].sin());
        }
    } else {
        let scale = SIZE / TAU;
        let (lo, hi) = (MARGIN, MARGIN + SIZE);
        let _ = writeln!(out, r#"<rect x="{lo}" y="{lo}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#);
        // single arrows pair the vertical edges, double arrows the horizontal ones
        let mid = MARGIN + SIZE / 2.0;
        for x in [lo, hi] {
            let _ = writeln!(out, r#"<path d="M {} {} L {x} {} L {} {}" fill="none" stroke="black"/>"#, x - 5.0, mid + 5.0, mid - 3.0, x + 5.0, mid + 5.0);
        }
        for y in [lo, hi] {
            for dx in [-4.0, 4.0] {
                let x = mid + dx;
                let _ = writeln!(out, r#"<path d="M {} {} L {} {y} L {} {}" fill="none" stroke="black"/>"#, x - 5.0, y - 5.0, x + 3.0, x - 5.0, y + 5.0);
            }
        }
        for (i, label) in [(0.0, "0"), (PI, "π"), (TAU, "2π")] {
            let x = lo + i * scale;
            let _ = writeln!(out, r#"<text x="{x:.1}" y="{}" font-size="12" text-anchor="middle">{label}</text>"#, hi + 18.0);
            let _ = writeln!(out, r#"<text x="{}" y="{:.1}" font-size="12" text-anchor="end">{label}</text>"#, lo - 6.0, hi - i * scale + 4.0);
        }
        for p in points {
            marker(&mut out, lo + p[0] * scale, hi - p[1] * scale);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_marker_per_point() {
        let pts: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        assert_eq!(scatter(&pts).matches(r#"class="point""#).count(), 8);
        let pts = vec![vec![0.0, 1.0], vec![2.0, 3.0]];
        let svg = scatter(&pts);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"class="point""#).count(), 2);
    }
}
