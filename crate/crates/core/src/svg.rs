//! Minimal self-contained SVG writers.
//!
//! Heatmaps draw one `<rect>` per sample. The colour map is linear in the
//! value: the minimum maps to blue `rgb(59,76,192)`, the midpoint of the
//! range to white and the maximum to red `rgb(180,4,38)`.

use std::io::Write;

use crate::Result;

const PLOT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const LOW: [f64; 3] = [59.0, 76.0, 192.0];
const HIGH: [f64; 3] = [180.0, 4.0, 38.0];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Colour of `v` in `[lo, hi]`.
pub fn color(v: f64, lo: f64, hi: f64) -> [u8; 3] {
    let f = if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    let (from, to, w) = if f < 0.5 {
        (LOW, [255.0; 3], f * 2.0)
    } else {
        ([255.0; 3], HIGH, (f - 0.5) * 2.0)
    };
    std::array::from_fn(|c| (from[c] + (to[c] - from[c]) * w).round() as u8)
}

fn header<W: Write>(out: &mut W, title: &str, note: &str) -> Result<()> {
    let size = PLOT + 2.0 * MARGIN;
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    )?;
    writeln!(out, "<!-- {} -->", escape(note))?;
    writeln!(out, r#"<title>{}</title>"#, escape(title))?;
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>"#
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        size / 2.0,
        MARGIN / 2.0,
        escape(title)
    )?;
    Ok(())
}

fn axes<W: Write>(out: &mut W, labels: (&str, &str), x_range: (f64, f64), y_range: (f64, f64)) -> Result<()> {
    let size = PLOT + 2.0 * MARGIN;
    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{} [{:.3}, {:.3}]</text>"#,
        size / 2.0,
        size - MARGIN / 3.0,
        escape(labels.0),
        x_range.0,
        x_range.1
    )?;
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 {} {})">{} [{:.3}, {:.3}]</text>"#,
        MARGIN / 3.0,
        size / 2.0,
        MARGIN / 3.0,
        size / 2.0,
        escape(labels.1),
        y_range.0,
        y_range.1
    )?;
    Ok(())
}

/// Heatmap of `values` (row-major, `ys` outer) with `xs` horizontal and
/// `ys` increasing upwards.
pub fn write_heatmap<W: Write>(
    xs: &[f64],
    ys: &[f64],
    values: &[f64],
    labels: (&str, &str),
    title: &str,
    mut out: W,
) -> Result<()> {
    let (nx, ny) = (xs.len(), ys.len());
    assert_eq!(values.len(), nx * ny);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let note = format!("linear colour map: {lo:.6e} -> rgb(59,76,192), midpoint -> white, {hi:.6e} -> rgb(180,4,38)");
    header(&mut out, title, &note)?;
    let w = PLOT / nx as f64;
    let h = PLOT / ny as f64;
    writeln!(out, r#"<g shape-rendering="crispEdges">"#)?;
    for j in 0..ny {
        let y = MARGIN + PLOT - (j + 1) as f64 * h;
        for i in 0..nx {
            let [r, g, b] = color(values[j * nx + i], lo, hi);
            writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="rgb({r},{g},{b})"/>"#,
                MARGIN + i as f64 * w,
                y,
                w,
                h
            )?;
        }
    }
    writeln!(out, "</g>")?;
    axes(&mut out, labels, (xs[0], xs[nx - 1]), (ys[0], ys[ny - 1]))?;
    writeln!(out, "</svg>")?;
    out.flush()?;
    Ok(())
}

/// Line plot through `points`, auto-scaled to the data range.
pub fn write_polyline<W: Write>(points: &[(f64, f64)], labels: (&str, &str), title: &str, mut out: W) -> Result<()> {
    let bound = |f: fn(&(f64, f64)) -> f64| {
        let lo = points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (xr, yr) = (bound(|p| p.0), bound(|p| p.1));
    header(&mut out, title, "polyline, axes scaled linearly to the data range")?;
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| {
            let px = MARGIN + (x - xr.0) / (xr.1 - xr.0) * PLOT;
            let py = MARGIN + PLOT - (y - yr.0) / (yr.1 - yr.0) * PLOT;
            format!("{px:.3},{py:.3}")
        })
        .collect();
    writeln!(
        out,
        r#"<polyline fill="none" stroke="rgb(59,76,192)" stroke-width="2" points="{}"/>"#,
        coords.join(" ")
    )?;
    axes(&mut out, labels, xr, yr)?;
    writeln!(out, "</svg>")?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colour_map_endpoints() {
        assert_eq!(color(0.0, 0.0, 1.0), [59, 76, 192]);
        assert_eq!(color(0.5, 0.0, 1.0), [255, 255, 255]);
        assert_eq!(color(1.0, 0.0, 1.0), [180, 4, 38]);
        assert_eq!(color(7.0, 3.0, 3.0), [255, 255, 255]);
    }

    #[test]
    fn heatmap_is_single_rooted_xml() {
        let mut buf = Vec::new();
        write_heatmap(
            &[0.0, 1.0],
            &[0.0, 1.0, 2.0],
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            ("s", "t"),
            "a < b & c",
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let cells = doc
            .descendants()
            .filter(|n| n.has_tag_name("rect") && n.attribute("fill").is_some_and(|f| f.starts_with("rgb")))
            .count();
        assert_eq!(cells, 6);
    }

    #[test]
    fn polyline_is_single_rooted_xml() {
        let mut buf = Vec::new();
        write_polyline(&[(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)], ("x", "y"), "decay", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(doc.descendants().any(|n| n.has_tag_name("polyline")));
    }
}
