//! Standalone SVG rendering of a walk: axes along the positive half-lines
//! and one polyline through the visited points.

use std::fmt::Write as _;

use crate::enumerate::Walk;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgDocument {
    pub text: String,
}

impl std::fmt::Display for SvgDocument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

/// Bounding box `(x_min, y_min, x_max, y_max)` of the positions, origin
/// included.
pub fn bounding_box(w: &Walk) -> (i64, i64, i64, i64) {
    w.positions().iter().fold((0, 0, 0, 0), |(a, b, c, d), &(x, y)| {
        (a.min(x), b.min(y), c.max(x), d.max(y))
    })
}

pub fn render_svg(w: &Walk) -> SvgDocument {
    let (x0, y0, x1, y1) = bounding_box(w);
    let span = ((x1 - x0).max(y1 - y0)).max(1) as f64;
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    let width = (x1 - x0) as f64 * scale + 2.0 * MARGIN;
    let height = (y1 - y0) as f64 * scale + 2.0 * MARGIN;
    // screen coordinates, y pointing up
    let sx = |x: i64| MARGIN + (x - x0) as f64 * scale;
    let sy = |y: i64| height - MARGIN - (y - y0) as f64 * scale;
    let stroke = (2.0 / (1.0 + (w.len() as f64).log10().max(0.0))).max(0.3);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<g stroke="#888888" stroke-width="1"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"##,
        sx(0),
        sy(0),
        sx(x1.max(1)),
        sy(0),
        sx(0),
        sy(0),
        sx(0),
        sy(y1.max(1)),
    );
    if !w.is_empty() {
        let mut pts = String::new();
        for (i, (x, y)) in w.positions().into_iter().enumerate() {
            if i > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="#1f4e9c" stroke-width="{stroke:.3}" stroke-linejoin="round" points="{pts}"/>"##
        );
    }
    s.push_str("</svg>\n");
    SvgDocument { text: s }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepset::StepSet;

    #[test]
    fn empty_walk_has_axes_only() {
        let w = Walk::empty(StepSet::parse("(1,0);(0,1)").unwrap());
        let d = render_svg(&w);
        assert!(d.text.contains("<line"));
        assert!(!d.text.contains("polyline"));
        assert!(d.text.ends_with("</svg>\n"));
    }

    #[test]
    fn polyline_through_positions() {
        let w = Walk::new(StepSet::parse("(1,0);(0,1)").unwrap(), vec![0, 1]);
        let d = render_svg(&w);
        // one unit is 760 px
        assert!(d.text.contains(r#"points="20.00,780.00 780.00,780.00 780.00,20.00""#), "{}", d.text);
        assert_eq!(bounding_box(&w), (0, 0, 1, 1));
    }
}
