use num_traits::{Signed, Zero};

use super::AxisBox;
use crate::error::{Error, Result};
use crate::rational::Q;

/// `area(b ∩ {(x, y) : y <= x + c})` for a 2-d box, exact.
///
/// With `H` the box height and `t = x + c - y0`, the covered height over abscissa `x` is
/// `clamp(t, 0, H)`; its antiderivative is piecewise quadratic in `t`.
pub fn halfplane_box_area(b: &AxisBox, c: &Q) -> Result<Q> {
    if b.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: b.dim() });
    }
    if b.is_null() {
        return Ok(Q::zero());
    }
    let (x0, x1) = (&b.lo()[0], &b.hi()[0]);
    let (y0, y1) = (&b.lo()[1], &b.hi()[1]);
    let height = y1 - y0;
    let t0 = x0 + c - y0;
    let t1 = x1 + c - y0;
    Ok(clamp_antiderivative(&t1, &height) - clamp_antiderivative(&t0, &height))
}

fn clamp_antiderivative(t: &Q, height: &Q) -> Q {
    if !t.is_positive() {
        Q::zero()
    } else if t <= height {
        t * t / Q::from_integer(2.into())
    } else {
        height * height / Q::from_integer(2.into()) + height * (t - height)
    }
}

/// `bbox ∩ {(x, y) : y <= x + offset}`: the slope-1 family closed under intersection.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlopeTriangle {
    bbox: AxisBox,
    offset: Q,
}

impl SlopeTriangle {
    pub fn new(bbox: AxisBox, offset: Q) -> Result<Self> {
        if bbox.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: bbox.dim() });
        }
        Ok(SlopeTriangle { bbox, offset })
    }

    pub fn bbox(&self) -> &AxisBox {
        &self.bbox
    }

    pub fn offset(&self) -> &Q {
        &self.offset
    }

    pub fn measure(&self) -> Q {
        halfplane_box_area(&self.bbox, &self.offset).expect("dimension checked on construction")
    }

    /// Same shape with the bounding box clipped.
    pub fn clip(&self, window: &AxisBox) -> Option<SlopeTriangle> {
        let bbox = self.bbox.intersect(window)?;
        Some(SlopeTriangle { bbox, offset: self.offset.clone() })
    }

    /// Vertices of the covered polygon in counter-clockwise order (empty when null).
    pub fn polygon(&self) -> Vec<(Q, Q)> {
        if self.bbox.is_null() {
            return Vec::new();
        }
        let (x0, x1) = (&self.bbox.lo()[0], &self.bbox.hi()[0]);
        let (y0, y1) = (&self.bbox.lo()[1], &self.bbox.hi()[1]);
        let rect = [
            (x0.clone(), y0.clone()),
            (x1.clone(), y0.clone()),
            (x1.clone(), y1.clone()),
            (x0.clone(), y1.clone()),
        ];
        // One Sutherland–Hodgman pass against the half-plane x - y + c >= 0.
        let side = |p: &(Q, Q)| &p.0 - &p.1 + &self.offset;
        let mut out = Vec::new();
        for i in 0..4 {
            let p = &rect[i];
            let n = &rect[(i + 1) % 4];
            let (sp, sn) = (side(p), side(n));
            if !sp.is_negative() {
                out.push(p.clone());
            }
            if (sp.is_negative() && sn.is_positive()) || (sp.is_positive() && sn.is_negative()) {
                let t = &sp / (&sp - &sn);
                out.push((&p.0 + (&n.0 - &p.0) * &t, &p.1 + (&n.1 - &p.1) * &t));
            }
        }
        out.dedup();
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        if out.len() < 3 {
            return Vec::new();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn unit() -> AxisBox {
        AxisBox::unit(2)
    }

    #[test]
    fn unit_square_cases() {
        assert_eq!(halfplane_box_area(&unit(), &qi(0)).unwrap(), q(1, 2));
        assert_eq!(halfplane_box_area(&unit(), &qi(-1)).unwrap(), qi(0));
        assert_eq!(halfplane_box_area(&unit(), &qi(1)).unwrap(), qi(1));
        assert_eq!(halfplane_box_area(&unit(), &qi(-5)).unwrap(), qi(0));
        assert_eq!(halfplane_box_area(&unit(), &qi(5)).unwrap(), qi(1));
    }

    #[test]
    fn quarter_square_with_offset() {
        let b = AxisBox::new(vec![(qi(0), q(1, 2)), (qi(0), q(1, 2))]).unwrap();
        assert_eq!(halfplane_box_area(&b, &q(1, 4)).unwrap(), q(7, 32));
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        assert!(halfplane_box_area(&AxisBox::unit(3), &qi(0)).is_err());
        assert!(SlopeTriangle::new(AxisBox::unit(1), qi(0)).is_err());
    }

    #[test]
    fn polygon_shoelace_matches_area() {
        for (c, expected_vertices) in [(q(0, 1), 3), (q(1, 4), 5), (q(-1, 4), 3), (qi(2), 4)] {
            let t = SlopeTriangle::new(unit(), c.clone()).unwrap();
            let poly = t.polygon();
            assert_eq!(poly.len(), expected_vertices, "offset {c}");
            let mut twice = Q::zero();
            for i in 0..poly.len() {
                let (a, b) = (&poly[i], &poly[(i + 1) % poly.len()]);
                twice += &a.0 * &b.1 - &b.0 * &a.1;
            }
            assert_eq!(twice / qi(2), t.measure());
        }
        assert!(SlopeTriangle::new(unit(), qi(-1)).unwrap().polygon().is_empty());
    }
}
