use num_traits::Zero;

use super::{halfplane_box_area, AxisBox, SlopeTriangle};
use crate::error::{Error, Result};
use crate::rational::Q;

/// One exactly-measurable building block of a [`Region`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Primitive {
    Box(AxisBox),
    Triangle(SlopeTriangle),
}

impl Primitive {
    pub fn dim(&self) -> usize {
        match self {
            Primitive::Box(b) => b.dim(),
            Primitive::Triangle(_) => 2,
        }
    }

    pub fn bbox(&self) -> &AxisBox {
        match self {
            Primitive::Box(b) => b,
            Primitive::Triangle(t) => t.bbox(),
        }
    }

    pub fn measure(&self) -> Q {
        match self {
            Primitive::Box(b) => b.measure(),
            Primitive::Triangle(t) => t.measure(),
        }
    }

    /// Restriction to a box; stays inside the family.
    pub fn clip(&self, window: &AxisBox) -> Option<Primitive> {
        match self {
            Primitive::Box(b) => b.intersect(window).map(Primitive::Box),
            Primitive::Triangle(t) => t.clip(window).map(Primitive::Triangle),
        }
    }

    /// `λ(p ∩ q)`. Box∩box is a box; anything with a triangle reduces to one
    /// half-plane clip of the bounding-box intersection, since all triangles share slope 1.
    pub fn intersection_measure(&self, other: &Primitive) -> Result<Q> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        if !self.bbox().overlaps(other.bbox()) {
            return Ok(Q::zero());
        }
        let cut = self.bbox().intersect(other.bbox()).expect("dimensions already checked");
        match (self, other) {
            (Primitive::Box(_), Primitive::Box(_)) => Ok(cut.measure()),
            (Primitive::Box(_), Primitive::Triangle(t)) | (Primitive::Triangle(t), Primitive::Box(_)) => {
                halfplane_box_area(&cut, t.offset())
            }
            (Primitive::Triangle(s), Primitive::Triangle(t)) => {
                halfplane_box_area(&cut, std::cmp::min(s.offset(), t.offset()))
            }
        }
    }
}

/// Finite union of pairwise-disjoint primitives in `R^dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    dim: usize,
    primitives: Vec<Primitive>,
}

impl Region {
    /// Validates dimensions and pairwise disjointness (exact overlap test).
    pub fn new(dim: usize, primitives: Vec<Primitive>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        for p in &primitives {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        check_disjoint(&primitives)?;
        Ok(Region { dim, primitives })
    }

    /// For constructions that are disjoint by design (grid pieces, witnesses).
    pub(crate) fn from_disjoint(dim: usize, primitives: Vec<Primitive>) -> Self {
        debug_assert!(primitives.iter().all(|p| p.dim() == dim));
        Region { dim, primitives }
    }

    pub fn empty(dim: usize) -> Self {
        Region { dim, primitives: Vec::new() }
    }

    pub fn from_box(b: AxisBox) -> Self {
        Region { dim: b.dim(), primitives: vec![Primitive::Box(b)] }
    }

    pub fn from_boxes(dim: usize, boxes: Vec<AxisBox>) -> Result<Self> {
        Region::new(dim, boxes.into_iter().map(Primitive::Box).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn into_primitives(self) -> Vec<Primitive> {
        self.primitives
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn has_triangles(&self) -> bool {
        self.primitives.iter().any(|p| matches!(p, Primitive::Triangle(_)))
    }

    /// Smallest box containing every primitive's bounding box; `None` for an empty region.
    pub fn bbox(&self) -> Option<AxisBox> {
        let mut iter = self.primitives.iter().map(Primitive::bbox);
        let first = iter.next()?.clone();
        Some(iter.fold(first, |acc, b| {
            let lo = acc.lo().iter().zip(b.lo()).map(|(x, y)| std::cmp::min(x, y).clone()).collect();
            let hi = acc.hi().iter().zip(b.hi()).map(|(x, y)| std::cmp::max(x, y).clone()).collect();
            AxisBox::from_bounds_unchecked(lo, hi)
        }))
    }

    pub fn measure(&self) -> Q {
        self.primitives.iter().map(Primitive::measure).sum()
    }

    /// Disjoint union; fails if the pieces overlap.
    pub fn disjoint_union(&self, other: &Region) -> Result<Region> {
        same_dim(self, other)?;
        let mut prims = self.primitives.clone();
        prims.extend(other.primitives.iter().cloned());
        Region::new(self.dim, prims)
    }

    /// Restriction to a box.
    pub fn clip(&self, window: &AxisBox) -> Region {
        Region {
            dim: self.dim,
            primitives: self
                .primitives
                .iter()
                .filter_map(|p| p.clip(window))
                .filter(|p| !p.bbox().is_null())
                .collect(),
        }
    }
}

fn same_dim(a: &Region, b: &Region) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    Ok(())
}

/// Sweep along axis 0: only primitives whose x-extents overlap are compared.
fn check_disjoint(prims: &[Primitive]) -> Result<()> {
    let mut order: Vec<usize> = (0..prims.len()).collect();
    order.sort_by(|&a, &b| prims[a].bbox().lo()[0].cmp(&prims[b].bbox().lo()[0]));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let lo = &prims[i].bbox().lo()[0];
        active.retain(|&j| &prims[j].bbox().hi()[0] > lo);
        for &j in &active {
            let m = prims[i].intersection_measure(&prims[j])?;
            if !m.is_zero() {
                let (first, second) = (i.min(j), i.max(j));
                return Err(Error::Overlap { first, second, measure: m.to_string() });
            }
        }
        active.push(i);
    }
    Ok(())
}

pub fn measure(region: &Region) -> Q {
    region.measure()
}

/// `λ(a ∩ b)` by pairwise primitive intersection.
pub fn intersection_measure(a: &Region, b: &Region) -> Result<Q> {
    same_dim(a, b)?;
    let mut total = Q::zero();
    for p in &a.primitives {
        for r in &b.primitives {
            total += p.intersection_measure(r)?;
        }
    }
    Ok(total)
}

/// `λ(a Δ b) = λ(a) + λ(b) - 2 λ(a ∩ b)`.
pub fn symdiff_measure(a: &Region, b: &Region) -> Result<Q> {
    let both = intersection_measure(a, b)?;
    Ok(a.measure() + b.measure() - both * Q::from_integer(2.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn tri(bbox: AxisBox, c: Q) -> Primitive {
        Primitive::Triangle(SlopeTriangle::new(bbox, c).unwrap())
    }

    fn square(lo: Q, hi: Q) -> AxisBox {
        AxisBox::new(vec![(lo.clone(), hi.clone()), (lo, hi)]).unwrap()
    }

    #[test]
    fn intersection_examples() {
        let unit = Region::from_box(AxisBox::unit(2));
        let diag = Region::new(2, vec![tri(AxisBox::unit(2), qi(0))]).unwrap();
        assert_eq!(intersection_measure(&unit, &unit).unwrap(), qi(1));
        assert_eq!(intersection_measure(&unit, &diag).unwrap(), q(1, 2));
        let corner = Region::from_box(square(qi(0), q(1, 2)));
        assert_eq!(intersection_measure(&corner, &diag).unwrap(), q(1, 8));
        assert_eq!(symdiff_measure(&diag, &diag).unwrap(), qi(0));
        assert_eq!(symdiff_measure(&unit, &diag).unwrap(), q(1, 2));
    }

    #[test]
    fn triangles_intersect_at_the_lower_offset() {
        let a = tri(AxisBox::unit(2), qi(0));
        let b = tri(square(q(1, 2), qi(2)), q(1, 4));
        // [1/2,1)^2 ∩ {y <= x}
        assert_eq!(a.intersection_measure(&b).unwrap(), q(1, 8));
    }

    #[test]
    fn overlapping_primitives_are_rejected() {
        let err =
            Region::new(2, vec![Primitive::Box(AxisBox::unit(2)), Primitive::Box(square(q(1, 2), qi(2)))])
                .unwrap_err();
        assert!(matches!(err, Error::Overlap { first: 0, second: 1, .. }));

        // Box above the diagonal and the triangle below it touch only on a null set.
        let upper = Region::new(
            2,
            vec![
                tri(AxisBox::unit(2), qi(0)),
                Primitive::Box(AxisBox::new(vec![(qi(0), qi(1)), (qi(1), qi(2))]).unwrap()),
            ],
        );
        assert!(upper.is_ok());
        assert!(Region::new(3, vec![tri(AxisBox::unit(2), qi(0))]).is_err());
    }

    #[test]
    fn bbox_and_clip() {
        let r = Region::from_boxes(2, vec![square(qi(0), qi(1)), square(qi(2), qi(3))]).unwrap();
        assert_eq!(r.bbox().unwrap(), square(qi(0), qi(3)));
        assert_eq!(r.clip(&square(qi(0), q(1, 2))).measure(), q(1, 4));
        assert!(Region::empty(2).bbox().is_none());
    }
}
