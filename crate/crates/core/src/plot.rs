//! SVG picture of a pentagon configuration in the unit disk.

use std::fmt::Write;

use crate::disk::{DiskPoint, Su11};
use crate::hermitian::{real, C64};
use crate::pentagon::PentagonConfig;

const SIZE: f64 = 1000.0;
const RADIUS: f64 = 480.0;
const SAMPLES: usize = 48;
const FILLS: [&str; 4] = ["#e4572e", "#17bebb", "#ffc914", "#76b041"];

fn screen(z: C64) -> (f64, f64) {
    (SIZE / 2.0 + RADIUS * z.re, SIZE / 2.0 - RADIUS * z.im)
}

/// Points along the geodesic through `a` and `b`: the segment between them,
/// or the whole line when `full` is set.
fn geodesic_points(a: &DiskPoint, b: &DiskPoint, full: bool) -> Vec<C64> {
    let t = Su11::to_origin(a);
    let back = t.inverse();
    let w = t.apply(b).z();
    let dir = w / w.norm();
    (0..=SAMPLES)
        .map(|k| {
            let s = k as f64 / SAMPLES as f64;
            let p = if full {
                dir * (12.0 * (s - 0.5)).tanh()
            } else {
                w * s
            };
            back.apply(&DiskPoint::new(p).unwrap_or_else(|_| DiskPoint::origin()))
                .z()
        })
        .collect()
}

fn path(points: &[C64], close: bool) -> String {
    let mut d = String::new();
    for (k, z) in points.iter().enumerate() {
        let (x, y) = screen(*z);
        let _ = write!(d, "{}{x:.3},{y:.3} ", if k == 0 { 'M' } else { 'L' });
    }
    if close {
        d.push('Z');
    }
    d
}

/// 1000×1000 SVG with the boundary circle, the four pentagons, the labelled
/// points `q1..q14` and the geodesics of the separation report.
pub fn svg(cfg: &PentagonConfig, tol_geo: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let c = SIZE / 2.0;
    let _ = writeln!(
        s,
        r#"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="black" stroke-width="2"/>"#
    );
    for (lp, fill) in cfg.pentagons.iter().zip(FILLS) {
        let v = &lp.pentagon.vertices;
        let mut pts = Vec::new();
        for k in 0..5 {
            let mut edge = geodesic_points(&v[k], &v[(k + 1) % 5], false);
            edge.pop();
            pts.extend(edge);
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="{fill}" fill-opacity="0.35" stroke="{fill}" stroke-width="1.5"/>"#,
            path(&pts, true)
        );
    }
    for entry in cfg.separation_report(tol_geo) {
        let ([a, b], [c2, d2]) = (entry.first, entry.second);
        let color = if entry.is_ultraparallel() {
            "#1b4965"
        } else {
            "#9a031e"
        };
        let dash = if entry.required {
            ""
        } else {
            r#" stroke-dasharray="6,4""#
        };
        for (p, q) in [(a, b), (c2, d2)] {
            let pts = geodesic_points(cfg.point(p), cfg.point(q), true);
            let _ = writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>"#,
                path(&pts, false)
            );
        }
    }
    for (k, q) in cfg.q.iter().enumerate() {
        let (x, y) = screen(q.z());
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="3.5" fill="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14">q{}</text>"#,
            x + 5.0,
            y - 5.0,
            k + 1
        );
    }
    let (x, y) = screen(real(0.0));
    let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2" fill="gray"/>"#);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_ends_at_both_points() {
        let a = DiskPoint::polar(0.3, 0.2).unwrap();
        let b = DiskPoint::polar(0.6, 2.0).unwrap();
        let pts = geodesic_points(&a, &b, false);
        assert!((pts[0] - a.z()).norm() < 1e-12);
        assert!((pts[SAMPLES] - b.z()).norm() < 1e-12);
    }

    #[test]
    fn svg_has_all_parts() {
        let cfg = PentagonConfig::build(0.0).unwrap();
        let s = svg(&cfg, 1e-9);
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<text").count(), 14);
        assert_eq!(s.matches("fill-opacity").count(), 4);
        assert!(!s.contains("NaN"));
    }
}
