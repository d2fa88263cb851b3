//! Static SVG plot of `R_(n,m)` against `m`, one curve per `n`, with the
//! limits `phi_n(0)` as horizontal dotted lines. The y axis is logarithmic
//! since the curves differ by orders of magnitude.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::report::FigurePoint;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub fn figure_svg(points: &[FigurePoint]) -> String {
    let mut curves: BTreeMap<u32, Vec<&FigurePoint>> = BTreeMap::new();
    for p in points {
        curves.entry(p.n).or_default().push(p);
    }
    let m_lo = points.iter().map(|p| p.m).min().unwrap_or(0) as f64;
    let m_hi = (points.iter().map(|p| p.m).max().unwrap_or(1) as f64).max(m_lo + 1.0);
    let values = points.iter().flat_map(|p| [p.ratio, p.limit]).filter(|v| *v > 0.0);
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (decade_lo, decade_hi) = if lo.is_finite() {
        (lo.log10().floor() as i32, (hi.log10().ceil() as i32).max(lo.log10().floor() as i32 + 1))
    } else {
        (-1, 0)
    };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |m: f64| LEFT + (m - m_lo) / (m_hi - m_lo) * plot_w;
    let y = |v: f64| {
        let t = (v.log10() - decade_lo as f64) / (decade_hi - decade_lo) as f64;
        TOP + (1.0 - t) * plot_h
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" width="800" height="600">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    for d in decade_lo..=decade_hi {
        let yy = y(10f64.powi(d));
        let _ =
            writeln!(s, r##"<line x1="{:.2}" y1="{yy:.2}" x2="{LEFT:.2}" y2="{yy:.2}" stroke="black"/>"##, LEFT - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">1e{d}</text>"#,
            LEFT - 8.0,
            yy + 4.0
        );
    }
    for m in (m_lo as u32)..=(m_hi as u32) {
        let xx = x(m as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{xx:.2}" y1="{:.2}" x2="{xx:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{xx:.2}" y="{:.2}" font-size="12" text-anchor="middle">{m}</text>"#,
            TOP + plot_h + 20.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">m</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">R(n,m)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (idx, (n, pts)) in curves.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let limit = pts[0].limit;
        if limit > 0.0 {
            let _ = writeln!(
                s,
                r#"<line class="limit" x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="2 4"/>"#,
                y(limit),
                LEFT + plot_w,
                y(limit)
            );
        }
        let coords: Vec<String> =
            pts.iter().filter(|p| p.ratio > 0.0).map(|p| format!("{:.2},{:.2}", x(p.m as f64), y(p.ratio))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="curve" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for c in &coords {
            let (cx, cy) = c.split_once(',').expect("coordinate pair");
            let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
        let ly = TOP + 20.0 + 22.0 * idx as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 25.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="12">n = {n}</text>"#, lx + 32.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_curve_and_one_dotted_line_per_n() {
        let mut pts = Vec::new();
        for n in 2..=4u32 {
            for m in n + 1..=8 {
                pts.push(FigurePoint {
                    n,
                    m,
                    ratio: 0.5f64.powi(n as i32 * 3) + 1.0 / m as f64,
                    limit: 0.5f64.powi(n as i32 * 3),
                });
            }
        }
        let svg = figure_svg(&pts);
        assert_eq!(svg.matches(r#"class="curve""#).count(), 3);
        assert_eq!(svg.matches("stroke-dasharray").count(), 3);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
    }
}
