//! Sparse evaluation of a region against the level-`n` dyadic grid.
//!
//! Only cells the region actually meets are visited, and runs of cells that see the region
//! identically are grouped into index-box [`Block`]s. Boxes produce `O(3^d)` groups per
//! primitive; slope-1 triangles are swept row by row, with the fully covered part of each
//! row collapsed into one group and only the two or three cells cut by the diagonal
//! evaluated individually.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::par;
use crate::rational::{ceil_i64, dyadic_step, floor_i64, pow2, Q};
use crate::set_algebra::{halfplane_box_area, AxisBox, Primitive, Region};

/// The level-`n` dyadic grid restricted to `[-n, n)^d` and to an optional window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub dim: usize,
    pub window: Option<AxisBox>,
    pub level: u32,
}

/// Cells sharing the same per-cell measure `m` and the same covered mass `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Block {
    /// Half-open cell-index range per axis, axis 0 first.
    pub ranges: Vec<(i64, i64)>,
    pub a: Q,
    pub m: Q,
}

impl Block {
    pub fn count(&self) -> Q {
        let n: BigInt = self.ranges.iter().map(|(lo, hi)| BigInt::from(hi - lo)).product();
        Q::from_integer(n)
    }
}

fn overlap(a0: &Q, a1: &Q, b0: &Q, b1: &Q) -> Q {
    let lo = std::cmp::max(a0, b0);
    let hi = std::cmp::min(a1, b1);
    if hi > lo {
        hi - lo
    } else {
        Q::zero()
    }
}

impl Grid {
    /// `[-n, n)^d`.
    pub fn core(&self) -> AxisBox {
        AxisBox::centered(self.dim, self.level)
    }

    /// Core clipped to the window; `None` when that leaves nothing.
    pub fn clip_box(&self) -> Option<AxisBox> {
        let core = self.core();
        let g = match &self.window {
            Some(w) => core.intersect(w)?,
            None => core,
        };
        (!g.is_null()).then_some(g)
    }

    fn h(&self) -> Q {
        dyadic_step(self.level)
    }

    /// Index range of cells meeting the clip box, per axis.
    fn index_ranges(&self, g: &AxisBox) -> Result<Vec<(i64, i64)>> {
        let s = pow2(self.level);
        g.intervals().map(|(lo, hi)| Ok((floor_i64(&(lo * &s))?, ceil_i64(&(hi * &s))?))).collect()
    }

    /// Number of grid cells inside the clip box (the outside cell not counted).
    pub fn cell_count(&self) -> Result<BigInt> {
        let Some(g) = self.clip_box() else {
            return Ok(BigInt::zero());
        };
        Ok(self.index_ranges(&g)?.iter().map(|(lo, hi)| BigInt::from(hi - lo)).product())
    }

    /// Clipped cell with the given index.
    pub fn cell(&self, g: &AxisBox, index: &[i64]) -> AxisBox {
        let h = self.h();
        let lo = index
            .iter()
            .zip(g.lo())
            .map(|(&i, glo)| std::cmp::max(Q::from_integer(i.into()) * &h, glo.clone()))
            .collect();
        let hi = index
            .iter()
            .zip(g.hi())
            .map(|(&i, ghi)| std::cmp::min(Q::from_integer((i + 1).into()) * &h, ghi.clone()))
            .collect();
        AxisBox::from_bounds_unchecked(lo, hi)
    }

    /// Every grid cell in lexicographic index order (axis 0 slowest).
    pub fn cells(&self) -> Result<Vec<AxisBox>> {
        let Some(g) = self.clip_box() else {
            return Ok(Vec::new());
        };
        let ranges = self.index_ranges(&g)?;
        let mut out = Vec::new();
        let mut index: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            let c = self.cell(&g, &index);
            if !c.is_null() {
                out.push(c);
            }
            let mut k = self.dim;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                index[k] += 1;
                if index[k] < ranges[k].1 {
                    break;
                }
                index[k] = ranges[k].0;
            }
        }
    }

    /// Groups of cells the region meets, with exact covered mass per cell.
    /// `region` must already lie inside [`Grid::clip_box`].
    pub(crate) fn blocks(&self, region: &Region) -> Result<Vec<Block>> {
        let Some(g) = self.clip_box() else {
            return Ok(Vec::new());
        };
        if region.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: region.dim() });
        }
        let ctx = Ctx { h: self.h(), scale: pow2(self.level), g };
        let items: Vec<Item> = region
            .primitives()
            .iter()
            .filter(|p| !p.bbox().is_null())
            .map(|p| Item { prim: p, factor: Q::from_integer(1.into()), band: None })
            .collect();
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let top = self.dim - 1;
        let ranges = vec![(0, 0); self.dim];
        if top == 0 {
            let mut out = Vec::new();
            ctx.sweep_columns(&items, &ranges, &Q::from_integer(1.into()), &mut out)?;
            return Ok(out);
        }
        let rows = ctx.slabs(top, &items)?;
        let per_slab = par::map(&rows, |slab| -> Result<Vec<Block>> {
            let mut out = Vec::new();
            let mut ranges = ranges.clone();
            ranges[top] = slab.range;
            ctx.sweep(top - 1, &slab.items, &ranges, &slab.m, &mut out)?;
            Ok(out)
        });
        let mut out = Vec::new();
        for blocks in per_slab {
            out.extend(blocks?);
        }
        Ok(out)
    }
}

#[derive(Clone)]
struct Item<'a> {
    prim: &'a Primitive,
    /// Product of the primitive's per-cell extents on the axes already swept.
    factor: Q,
    /// For triangles, once the row is fixed: the covered y-band inside that row.
    band: Option<(Q, Q)>,
}

struct Slab<'a> {
    range: (i64, i64),
    items: Vec<Item<'a>>,
    /// Product of clipped cell extents on the axes already swept.
    m: Q,
}

struct Ctx {
    h: Q,
    scale: Q,
    g: AxisBox,
}

impl Ctx {
    fn idx(&self, x: &Q) -> Result<i64> {
        floor_i64(&(x * &self.scale))
    }

    fn cell_lo(&self, i: i64) -> Q {
        Q::from_integer(i.into()) * &self.h
    }

    fn cell_span(&self, i: i64) -> (Q, Q) {
        (self.cell_lo(i), self.cell_lo(i + 1))
    }

    /// Index intervals along `axis` inside which every item meets every cell identically.
    /// Rows crossed by a triangle are always single rows.
    fn slabs<'a>(&self, axis: usize, items: &[Item<'a>]) -> Result<Vec<Slab<'a>>> {
        let mut cuts = BTreeSet::new();
        let mut add = |e: &Q| -> Result<()> {
            let i = self.idx(e)?;
            cuts.insert(i);
            cuts.insert(i + 1);
            Ok(())
        };
        add(&self.g.lo()[axis])?;
        add(&self.g.hi()[axis])?;
        for it in items {
            add(&it.prim.bbox().lo()[axis])?;
            add(&it.prim.bbox().hi()[axis])?;
        }
        let start = self.idx(&self.g.lo()[axis])?;
        let end = ceil_i64(&(&self.g.hi()[axis] * &self.scale))?;
        let cuts: Vec<i64> = cuts.into_iter().filter(|&c| c >= start && c <= end).collect();

        let mut slabs = Vec::new();
        for w in cuts.windows(2) {
            let (r0, r1) = (w[0], w[1]);
            let (c0, c1) = self.cell_span(r0);
            let glen = overlap(&c0, &c1, &self.g.lo()[axis], &self.g.hi()[axis]);
            if glen.is_zero() {
                continue;
            }
            let active: Vec<&Item> = items
                .iter()
                .filter(|it| {
                    let b = it.prim.bbox();
                    overlap(&c0, &c1, &b.lo()[axis], &b.hi()[axis]).is_positive()
                })
                .collect();
            if active.is_empty() {
                continue;
            }
            let has_triangle = active.iter().any(|it| matches!(it.prim, Primitive::Triangle(_)));
            let rows: Vec<(i64, i64)> =
                if has_triangle { (r0..r1).map(|r| (r, r + 1)).collect() } else { vec![(r0, r1)] };
            for (a, b) in rows {
                let (c0, c1) = self.cell_span(a);
                let mut next = Vec::with_capacity(active.len());
                for it in &active {
                    let bb = it.prim.bbox();
                    let (lo, hi) = (&bb.lo()[axis], &bb.hi()[axis]);
                    let ov = overlap(&c0, &c1, lo, hi);
                    if ov.is_zero() {
                        continue;
                    }
                    let mut it = (*it).clone();
                    match it.prim {
                        Primitive::Box(_) => it.factor *= ov,
                        Primitive::Triangle(_) => {
                            it.band = Some((std::cmp::max(&c0, lo).clone(), std::cmp::min(&c1, hi).clone()))
                        }
                    }
                    next.push(it);
                }
                if !next.is_empty() {
                    slabs.push(Slab { range: (a, b), items: next, m: glen.clone() });
                }
            }
        }
        Ok(slabs)
    }

    fn sweep(
        &self,
        axis: usize,
        items: &[Item],
        ranges: &[(i64, i64)],
        m: &Q,
        out: &mut Vec<Block>,
    ) -> Result<()> {
        if axis == 0 {
            return self.sweep_columns(items, ranges, m, out);
        }
        for slab in self.slabs(axis, items)? {
            let mut ranges = ranges.to_vec();
            ranges[axis] = slab.range;
            self.sweep(axis - 1, &slab.items, &ranges, &(m * &slab.m), out)?;
        }
        Ok(())
    }

    /// Innermost axis: per-column covered mass as piecewise-constant segments, summed.
    fn sweep_columns(
        &self,
        items: &[Item],
        ranges: &[(i64, i64)],
        m: &Q,
        out: &mut Vec<Block>,
    ) -> Result<()> {
        let mut delta: BTreeMap<i64, Q> = BTreeMap::new();
        let mut push = |lo: i64, hi: i64, v: Q| {
            if lo < hi && v.is_positive() {
                *delta.entry(lo).or_insert_with(Q::zero) += &v;
                *delta.entry(hi).or_insert_with(Q::zero) -= v;
            }
        };
        for it in items {
            let bb = it.prim.bbox();
            let (x0, x1) = (&bb.lo()[0], &bb.hi()[0]);
            let c0 = self.idx(x0)?;
            let c1 = ceil_i64(&(x1 * &self.scale))?;
            match (it.prim, &it.band) {
                (Primitive::Box(_), _) => {
                    self.push_columns(&mut push, c0, c1, x0, x1, &it.factor);
                }
                (Primitive::Triangle(t), Some((ya, yb))) => {
                    let c = t.offset();
                    let first = std::cmp::max(c0, self.idx(&(ya - c))?);
                    let full = if x0 >= &(yb - c) {
                        c0
                    } else {
                        std::cmp::max(c0, ceil_i64(&((yb - c) * &self.scale))?)
                    };
                    let full = std::cmp::min(full, c1);
                    for i in first..full {
                        let (l, r) = self.cell_span(i);
                        let cut = AxisBox::from_bounds_unchecked(
                            vec![std::cmp::max(l, x0.clone()), ya.clone()],
                            vec![std::cmp::min(r, x1.clone()), yb.clone()],
                        );
                        push(i, i + 1, halfplane_box_area(&cut, c)?);
                    }
                    if full < c1 {
                        self.push_columns(&mut push, full, c1, x0, x1, &(yb - ya));
                    }
                }
                (Primitive::Triangle(_), None) => {
                    return Err(Error::Inconsistent(
                        "triangle reached the column sweep without a row band".into(),
                    ))
                }
            }
        }
        if delta.is_empty() {
            return Ok(());
        }
        let (glo, ghi) = (&self.g.lo()[0], &self.g.hi()[0]);
        for e in [glo, ghi] {
            let i = self.idx(e)?;
            delta.entry(i).or_insert_with(Q::zero);
            delta.entry(i + 1).or_insert_with(Q::zero);
        }
        let keys: Vec<(i64, Q)> = delta.into_iter().collect();
        let mut running = Q::zero();
        for w in keys.windows(2) {
            running += &w[0].1;
            if running.is_positive() {
                let (l, r) = self.cell_span(w[0].0);
                let mut block_ranges = ranges.to_vec();
                block_ranges[0] = (w[0].0, w[1].0);
                out.push(Block {
                    ranges: block_ranges,
                    a: running.clone(),
                    m: m * overlap(&l, &r, glo, ghi),
                });
            }
        }
        Ok(())
    }

    /// Columns `[p, q)` of an x-extent `[x0, x1)`, each scaled by `mult`: the two end
    /// columns may be partial, the interior ones are full width.
    fn push_columns(&self, push: &mut impl FnMut(i64, i64, Q), p: i64, q: i64, x0: &Q, x1: &Q, mult: &Q) {
        let width = |i: i64| {
            let (l, r) = self.cell_span(i);
            overlap(&l, &r, x0, x1)
        };
        push(p, p + 1, width(p) * mult);
        if q - p >= 2 {
            push(q - 1, q, width(q - 1) * mult);
        }
        if q - p > 2 {
            push(p + 1, q - 1, &self.h * mult);
        }
    }
}
