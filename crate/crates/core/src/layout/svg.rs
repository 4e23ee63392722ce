use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::TreeLayout;

const DEFAULT_COLORS: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvgStyle {
    /// Pixels per layout unit; `None` fits the drawing into 640 px.
    pub scale: Option<f64>,
    /// Smallest glyph radius in pixels.
    pub min_radius: f64,
    /// label -> `#rrggbb`; unlisted labels take colours from a fixed cycle.
    pub palette: BTreeMap<String, String>,
    pub font: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            scale: None,
            min_radius: 3.0,
            palette: BTreeMap::new(),
            font: "sans-serif".into(),
        }
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Renders the layout as a standalone SVG 1.1 document.
pub fn emit_svg(layout: &TreeLayout, style: &SvgStyle) -> String {
    const MARGIN: f64 = 20.0;
    const LEGEND_ROW: f64 = 18.0;
    let n = layout.coords.len();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (c, r) in layout.coords.iter().zip(&layout.node_radius) {
        x0 = x0.min(c[0] - r);
        x1 = x1.max(c[0] + r);
        y0 = y0.min(c[1] - r);
        y1 = y1.max(c[1] + r);
    }
    if n == 0 {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let extent = (x1 - x0).max(y1 - y0).max(1e-12);
    let px = style.scale.unwrap_or(640.0 / extent);
    let labels: BTreeSet<&str> = layout.pie.iter().flatten().map(|(l, _)| l.as_str()).collect();
    let colors: BTreeMap<&str, String> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let c = style.palette.get(l).cloned().unwrap_or_else(|| DEFAULT_COLORS[i % DEFAULT_COLORS.len()].into());
            (l, c)
        })
        .collect();
    let width = (x1 - x0) * px + 2.0 * MARGIN + if labels.is_empty() { 0.0 } else { 120.0 };
    let height = ((y1 - y0) * px + 2.0 * MARGIN).max(2.0 * MARGIN + LEGEND_ROW * labels.len() as f64);
    // map coordinates have y pointing up
    let sx = |x: f64| MARGIN + (x - x0) * px;
    let sy = |y: f64| MARGIN + (y1 - y) * px;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = num(width),
        h = num(height)
    );
    s.push_str("<g stroke=\"#444444\" stroke-width=\"2\">\n");
    for &(u, v) in &layout.edges {
        let (a, b) = (layout.coords[u], layout.coords[v]);
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            num(sx(a[0])),
            num(sy(a[1])),
            num(sx(b[0])),
            num(sy(b[1]))
        );
    }
    s.push_str("</g>\n<g stroke=\"#222222\" stroke-width=\"1\">\n");
    for v in 0..n {
        let (cx, cy) = (sx(layout.coords[v][0]), sy(layout.coords[v][1]));
        let r = (layout.node_radius[v] * px).max(style.min_radius);
        let pie = &layout.pie[v];
        if pie.len() <= 1 {
            let fill = pie.first().map_or("#cccccc", |(l, _)| colors[l.as_str()].as_str());
            let _ = writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{fill}\"/>", num(cx), num(cy), num(r));
            continue;
        }
        let mut start = 0.0f64;
        for (label, frac) in pie {
            let sweep = 2.0 * PI * frac;
            let end = start + sweep;
            let (ax, ay) = (cx + r * start.cos(), cy - r * start.sin());
            let (bx, by) = (cx + r * end.cos(), cy - r * end.sin());
            let large = if sweep > PI { 1 } else { 0 };
            let _ = writeln!(
                s,
                "<path d=\"M {} {} L {} {} A {} {} 0 {large} 0 {} {} Z\" fill=\"{}\"/>",
                num(cx),
                num(cy),
                num(ax),
                num(ay),
                num(r),
                num(r),
                num(bx),
                num(by),
                colors[label.as_str()]
            );
            start = end;
        }
    }
    s.push_str("</g>\n");
    if !labels.is_empty() {
        let lx = width - 120.0 + 10.0;
        let _ = writeln!(s, "<g font-family=\"{}\" font-size=\"12\">", style.font);
        for (i, (&l, c)) in colors.iter().enumerate() {
            let y = MARGIN + LEGEND_ROW * i as f64;
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{c}\"/><text x=\"{}\" y=\"{}\">{}</text>",
                num(lx),
                num(y),
                num(lx + 18.0),
                num(y + 11.0),
                escape(l)
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
