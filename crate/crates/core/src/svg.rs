//! Plain SVG rendering of planar regions, optionally over a dyadic grid. Coordinates are
//! converted to floating point here and only here: the picture is a display, not data.

use std::fmt::Write;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::rational::Q;
use crate::set_algebra::{AxisBox, Primitive, Region};

const SIZE: f64 = 512.0;
const MARGIN: f64 = 16.0;

fn f(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Renders `layers` (each drawn with its own fill) inside `frame`; `grid_level` adds
/// dyadic grid lines of side `2^-level`.
pub fn render(frame: &AxisBox, layers: &[(&Region, &str)], grid_level: Option<u32>) -> Result<String> {
    if frame.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: frame.dim() });
    }
    let (x0, y0) = (f(&frame.lo()[0]), f(&frame.lo()[1]));
    let (w, h) = (f(&frame.hi()[0]) - x0, f(&frame.hi()[1]) - y0);
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::Invalid("frame must have positive area".into()));
    }
    let scale = SIZE / w.max(h);
    // y grows upward in the plane, downward in SVG.
    let px = |x: f64| MARGIN + (x - x0) * scale;
    let py = |y: f64| MARGIN + (y0 + h - y) * scale;
    let mut out = String::new();
    let total = SIZE + 2.0 * MARGIN;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    )
    .ok();
    writeln!(
        out,
        r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#ffffff" stroke="#000000"/>"##,
        px(x0),
        py(y0 + h),
        w * scale,
        h * scale
    )
    .ok();
    for (region, fill) in layers {
        if region.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: region.dim() });
        }
        for p in region.primitives() {
            let pts: Vec<(f64, f64)> = match p {
                Primitive::Box(b) => {
                    let (a, c) = ((f(&b.lo()[0]), f(&b.lo()[1])), (f(&b.hi()[0]), f(&b.hi()[1])));
                    vec![(a.0, a.1), (c.0, a.1), (c.0, c.1), (a.0, c.1)]
                }
                Primitive::Triangle(t) => t.polygon().iter().map(|(x, y)| (f(x), f(y))).collect(),
            };
            if pts.len() < 3 {
                continue;
            }
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.3},{:.3}", px(*x), py(*y))).collect();
            writeln!(out, r#"<polygon points="{}" fill="{fill}" stroke="none"/>"#, path.join(" ")).ok();
        }
    }
    if let Some(level) = grid_level {
        let step = 0.5f64.powi(level as i32);
        let lines = (w.max(h) / step).ceil() as u64;
        if lines > 4096 {
            return Err(Error::TooLarge(format!("grid level {level} draws more than 4096 lines")));
        }
        let first = |lo: f64| (lo / step).ceil() * step;
        let mut x = first(x0);
        while x <= x0 + w + 1e-12 {
            writeln!(out, r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#888888" stroke-width="0.5"/>"##, px(x), py(y0), px(x), py(y0 + h)).ok();
            x += step;
        }
        let mut y = first(y0);
        while y <= y0 + h + 1e-12 {
            writeln!(out, r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#888888" stroke-width="0.5"/>"##, px(x0), py(y), px(x0 + w), py(y)).ok();
            y += step;
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
