//! Birth/death scatter plot of a diagram as a standalone SVG document.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::diagram::PersistenceDiagram;
use crate::topology::TopologicalIndex;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;
const RAIL_GAP: f64 = 24.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Clone, Copy)]
enum Shape {
    Circle,
    Square,
    Triangle,
    Diamond,
}

const SHAPES: [Shape; 4] = [
    Shape::Circle,
    Shape::Square,
    Shape::Triangle,
    Shape::Diamond,
];

fn marker(out: &mut String, shape: Shape, x: f64, y: f64, color: &str) {
    let r = 5.0;
    let _ = match shape {
        Shape::Circle => writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}" fill-opacity="0.75"/>"#
        ),
        Shape::Square => writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{color}" fill-opacity="0.75"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        Shape::Triangle => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}" fill-opacity="0.75"/>"#,
            x,
            y - r,
            x - r,
            y + r,
            x + r,
            y + r
        ),
        Shape::Diamond => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}" fill-opacity="0.75"/>"#,
            x,
            y - r,
            x + r,
            y,
            x,
            y + r,
            x - r,
            y
        ),
    };
}

/// Renders the diagram: diagonal line, one marker style per index class,
/// essential points on a rail above the plot area.
pub fn render_svg(diagram: &PersistenceDiagram) -> String {
    let finite_max = diagram
        .points()
        .iter()
        .flat_map(|p| [p.birth, p.death])
        .chain(diagram.grid().iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let top = if finite_max > 0.0 {
        finite_max * 1.1
    } else {
        1.0
    };
    let plot = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + v / top * plot;
    let sy = |v: f64| SIZE - MARGIN - v / top * plot;
    let rail = MARGIN - RAIL_GAP;

    let classes: Vec<TopologicalIndex> = {
        let mut c: Vec<_> = diagram.points().iter().map(|p| p.index).collect();
        c.sort();
        c.dedup();
        c
    };
    let style: BTreeMap<TopologicalIndex, (Shape, &str)> = classes
        .iter()
        .enumerate()
        .map(|(k, &idx)| (idx, (SHAPES[k % SHAPES.len()], COLORS[k % COLORS.len()])))
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    // axes
    let _ = writeln!(
        out,
        r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>"#,
        MARGIN,
        SIZE - MARGIN,
        SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>"#,
        MARGIN,
        SIZE - MARGIN,
        MARGIN
    );
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        sx(0.0),
        sy(0.0),
        sx(top),
        sy(top)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="gray" stroke-dasharray="2 2"/>"#,
        MARGIN,
        rail,
        SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">∞</text>"#,
        MARGIN - 6.0,
        rail + 4.0
    );
    for &g in diagram.grid() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{g}</text>"#,
            sx(g),
            SIZE - MARGIN + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{g}</text>"#,
            MARGIN - 6.0,
            sy(g) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">birth γ</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">death γ</text>"#,
        SIZE / 2.0
    );

    for p in diagram.points() {
        let (shape, color) = style[&p.index];
        let y = if p.is_essential() { rail } else { sy(p.death) };
        marker(&mut out, shape, sx(p.birth), y, color);
    }

    for (k, idx) in classes.iter().enumerate() {
        let (shape, color) = style[idx];
        let y = MARGIN + 10.0 + 18.0 * k as f64;
        let x = SIZE - MARGIN - 70.0;
        marker(&mut out, shape, x, y, color);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">k = {idx}</text>"#,
            x + 12.0,
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}
