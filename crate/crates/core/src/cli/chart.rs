//! Spider charts of the five properties as standalone SVG.

use std::fmt::Write as _;

use crate::mme::{MmeResult, Property};

pub const CANVAS: f64 = 512.0;
const CENTER: (f64, f64) = (256.0, 250.0);
const RADIUS: f64 = 170.0;
const GRID_LEVELS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SpiderChartSpec {
    pub title: String,
    /// Indexed like [`Property::ALL`].
    pub precision: [f64; 5],
    pub recall: [f64; 5],
}

impl SpiderChartSpec {
    /// Values are clamped to [0, 1]; NaN plots as 0.
    pub fn new(title: &str, precision: [f64; 5], recall: [f64; 5]) -> Self {
        let clamp = |v: [f64; 5]| v.map(|x| if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) });
        SpiderChartSpec {
            title: title.to_string(),
            precision: clamp(precision),
            recall: clamp(recall),
        }
    }

    pub fn from_result(result: &MmeResult, title: &str) -> Self {
        let p = Property::ALL.map(|p| result.prf(p).precision);
        let r = Property::ALL.map(|p| result.prf(p).recall);
        SpiderChartSpec::new(title, p, r)
    }

    pub fn axes(&self) -> [Property; 5] {
        Property::ALL
    }
}

/// Canvas position of each axis value. D points up, the rest follow clockwise.
pub fn vertices(values: &[f64; 5]) -> [(f64, f64); 5] {
    std::array::from_fn(|k| point(k, values[k] * RADIUS))
}

fn point(axis: usize, r: f64) -> (f64, f64) {
    let a = (-90.0 + 72.0 * axis as f64).to_radians();
    (CENTER.0 + r * a.cos(), CENTER.1 + r * a.sin())
}

fn points_attr(pts: &[(f64, f64)]) -> String {
    pts.iter()
        .map(|(x, y)| format!("{:.3},{:.3}", x, y))
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_chart(spec: &SpiderChartSpec) -> String {
    let mut s = String::new();
    let w = CANVAS as u32;
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{w}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="256" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        escape(&spec.title)
    )
    .unwrap();

    s.push_str("<g id=\"grid\" fill=\"none\" stroke=\"#c8c8c8\" stroke-width=\"1\">\n");
    for level in GRID_LEVELS {
        let ring = vertices(&[level; 5]);
        writeln!(s, r#"<polygon points="{}"/>"#, points_attr(&ring)).unwrap();
    }
    for k in 0..5 {
        let (x, y) = point(k, RADIUS);
        writeln!(
            s,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            CENTER.0, CENTER.1, x, y
        )
        .unwrap();
    }
    s.push_str("</g>\n");

    s.push_str("<g id=\"labels\" font-size=\"16\" text-anchor=\"middle\">\n");
    for (k, p) in Property::ALL.iter().enumerate() {
        let (x, y) = point(k, RADIUS + 22.0);
        writeln!(s, r#"<text x="{:.3}" y="{:.3}">{}</text>"#, x, y + 5.0, p.letter()).unwrap();
    }
    s.push_str("</g>\n");

    for (id, values, color) in [
        ("precision", &spec.precision, "#d62728"),
        ("recall", &spec.recall, "#1f77b4"),
    ] {
        writeln!(
            s,
            r#"<polygon id="{id}" points="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#,
            points_attr(&vertices(values))
        )
        .unwrap();
    }

    s.push_str("<g id=\"legend\" font-size=\"12\">\n");
    writeln!(s, "<text x=\"16\" y=\"452\" fill=\"#d62728\">precision</text>").unwrap();
    writeln!(s, "<text x=\"16\" y=\"470\" fill=\"#1f77b4\">recall</text>").unwrap();
    for (k, p) in Property::ALL.iter().enumerate() {
        let x = 110.0 + 78.0 * k as f64;
        writeln!(
            s,
            r#"<text x="{x}" y="434">{}</text><text x="{x}" y="452">{:.3}</text><text x="{x}" y="470">{:.3}</text>"#,
            p.letter(),
            spec.precision[k],
            spec.recall[k]
        )
        .unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s
}
