//! Exact Lebesgue measure on finite unions of rational boxes and slope-1 triangles.

mod axis_box;
mod region;
mod triangle;

pub use axis_box::{make_dyadic_cube, AxisBox};
pub use region::{intersection_measure, measure, symdiff_measure, Primitive, Region};
pub use triangle::{halfplane_box_area, SlopeTriangle};
