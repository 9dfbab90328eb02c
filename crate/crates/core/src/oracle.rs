//! Brute-force cross-checks: Jordan grid bounds, enumeration of every union of cells, and
//! enumeration of bounded atom patterns against an eps-net.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::filtration::{cell_split, Cell, Partition};
use crate::measure::{AtomId, AtomSet, MeasureModel, Set};
use crate::par;
use crate::rational::{ceil_i64, dyadic_step, floor_i64, pow2, ExtSum, ExtendedRational, Q};
use crate::set_algebra::{AxisBox, Primitive, Region};

/// Finest level accepted by [`jordan_bounds`].
pub const MAX_JORDAN_LEVEL: u32 = 14;
/// Most cells accepted by [`enumerate_errors`].
pub const MAX_EXHAUSTIVE_CELLS: usize = 16;
/// Most atoms accepted by [`exhaustive_net_check`].
pub const MAX_NET_ATOMS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanBounds {
    pub level: u32,
    /// Mass of grid cells the region covers completely.
    pub lower: Q,
    /// Mass of grid cells the region meets in positive measure.
    pub upper: Q,
}

/// Cells of `h`-grid rows and columns, row `j` covering `[j h, (j+1) h)`.
fn cell(h: &Q, i: i64, j: i64) -> AxisBox {
    let x = h * Q::from_integer(i.into());
    let y = h * Q::from_integer(j.into());
    AxisBox::from_bounds_unchecked(vec![x.clone(), y.clone()], vec![x + h, y + h])
}

/// Inner and outer Jordan content of a planar region on the level-`l` dyadic grid.
/// Rows are scanned one at a time; per primitive, columns known to be fully covered are
/// counted as a range and only the few columns near an edge are measured exactly.
pub fn jordan_bounds(region: &Region, l: u32) -> Result<JordanBounds> {
    if l > MAX_JORDAN_LEVEL {
        return Err(Error::TooLarge(format!("Jordan level {l} exceeds {MAX_JORDAN_LEVEL}")));
    }
    if region.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: region.dim() });
    }
    let h = dyadic_step(l);
    let s = pow2(l);
    let area = &h * &h;
    let Some(bb) = region.bbox() else {
        return Ok(JordanBounds { level: l, lower: Q::zero(), upper: Q::zero() });
    };
    let j0 = floor_i64(&(&bb.lo()[1] * &s))?;
    let j1 = ceil_i64(&(&bb.hi()[1] * &s))?;
    let rows = (j1 - j0) as u64;
    let cols = (ceil_i64(&(&bb.hi()[0] * &s))? - floor_i64(&(&bb.lo()[0] * &s))?) as u64;
    if rows.saturating_mul(cols) > 1 << 32 {
        return Err(Error::TooLarge("Jordan grid exceeds 2^32 cells".into()));
    }
    let per_row = par::map_range(0..rows, |jr| -> Result<(u64, u64)> {
        let j = j0 + jr as i64;
        let r0 = &h * Q::from_integer(j.into());
        let r1 = &r0 + &h;
        let mut full = 0u64;
        let mut partial: BTreeMap<i64, Q> = BTreeMap::new();
        for p in region.primitives() {
            let b = p.bbox();
            if b.hi()[1] <= r0 || b.lo()[1] >= r1 {
                continue;
            }
            let c0 = floor_i64(&(&b.lo()[0] * &s))?;
            let c1 = ceil_i64(&(&b.hi()[0] * &s))?;
            // Columns [f0, f1) are entirely covered by this primitive within the row.
            let row_inside = b.lo()[1] <= r0 && b.hi()[1] >= r1;
            let (f0, f1) = if !row_inside {
                (c1, c1)
            } else {
                let in0 = ceil_i64(&(&b.lo()[0] * &s))?;
                let in1 = floor_i64(&(&b.hi()[0] * &s))?;
                match p {
                    Primitive::Box(_) => (in0, in1.max(in0)),
                    Primitive::Triangle(t) => {
                        // Cell [u, u+h) x [r0, r1) lies under y <= x + c iff u >= r1 - c.
                        let start = in0.max(ceil_i64(&((&r1 - t.offset()) * &s))?);
                        (start, in1.max(start))
                    }
                }
            };
            full += (f1 - f0).max(0) as u64;
            // Columns left of the halfplane's reach are empty for triangles.
            let dead = match p {
                Primitive::Triangle(t) if row_inside => floor_i64(&((&r0 - t.offset()) * &s))?,
                _ => i64::MIN,
            };
            for i in c0..c1 {
                if (f0..f1).contains(&i) || i < dead {
                    continue;
                }
                let m = p.intersection_measure(&Primitive::Box(cell(&h, i, j)))?;
                if !m.is_zero() {
                    *partial.entry(i).or_insert_with(Q::zero) += m;
                }
            }
        }
        let inner = partial.values().filter(|m| **m == area).count() as u64;
        Ok((full + inner, full + partial.len() as u64))
    });
    let (mut lo, mut hi) = (0u64, 0u64);
    for r in per_row {
        let (a, b) = r?;
        lo += a;
        hi += b;
    }
    Ok(JordanBounds {
        level: l,
        lower: &area * Q::from_integer(lo.into()),
        upper: &area * Q::from_integer(hi.into()),
    })
}

/// `mu(A Δ b)` for every union `A` of cells, indexed by bitmask (bit `i` = cell `i`).
/// Each chunk of 4096 masks walks a Gray code, so one cell flips per step.
pub fn enumerate_errors(model: &MeasureModel, cells: &[Cell], b: &Set) -> Result<Vec<ExtendedRational>> {
    let k = cells.len();
    if k > MAX_EXHAUSTIVE_CELLS {
        return Err(Error::TooLarge(format!("{k} cells exceed the exhaustive limit {MAX_EXHAUSTIVE_CELLS}")));
    }
    let mut hit = Vec::with_capacity(k);
    let mut miss = Vec::with_capacity(k);
    for c in cells {
        let (h, m) = cell_split(model, c, b)?;
        hit.push(h);
        miss.push(m);
    }
    let low = k.min(12);
    let chunks = 1u64 << (k - low);
    let per_chunk = par::map_range(0..chunks, |c| {
        let base = c << low;
        // Start from A = cells in `base`, rest out.
        let mut sum = ExtSum::default();
        for i in 0..k {
            sum.add(if base >> i & 1 == 1 { &miss[i] } else { &hit[i] });
        }
        let mut out = Vec::with_capacity(1 << low);
        let mut gray = 0u64;
        out.push((base, sum.value()));
        for t in 1u64..1 << low {
            let bit = t.trailing_zeros() as usize;
            gray ^= 1 << bit;
            if gray >> bit & 1 == 1 {
                sum.sub(&hit[bit]);
                sum.add(&miss[bit]);
            } else {
                sum.sub(&miss[bit]);
                sum.add(&hit[bit]);
            }
            out.push((base | gray, sum.value()));
        }
        out
    });
    let mut errors = vec![ExtendedRational::zero(); 1 << k];
    for chunk in per_chunk {
        for (mask, e) in chunk {
            errors[mask as usize] = e;
        }
    }
    Ok(errors)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustiveBest {
    /// Bitmask of the kept cells; ties go to the smallest mask.
    pub mask: u32,
    pub cells: Vec<usize>,
    pub error: ExtendedRational,
}

/// Minimizes `mu(A Δ b)` over all `2^k` unions of the partition's cells by enumeration.
pub fn exhaustive_best_approx(
    model: &MeasureModel,
    partition: &Partition,
    b: &Set,
) -> Result<ExhaustiveBest> {
    let cells = partition.cells(model)?;
    let errors = enumerate_errors(model, &cells, b)?;
    let (mask, error) = errors
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.cmp(b).then(ia.cmp(ib)))
        .expect("at least the empty union");
    Ok(ExhaustiveBest {
        mask: mask as u32,
        cells: (0..cells.len()).filter(|i| mask >> i & 1 == 1).collect(),
        error,
    })
}

/// The union of the chosen cells, when none of them is an outside cell.
pub fn union_of_cells(model: &MeasureModel, cells: &[Cell], chosen: &[usize]) -> Result<Set> {
    let mut prims: Vec<Primitive> = Vec::new();
    let mut atoms = AtomSet::empty();
    for &i in chosen {
        match &cells[i] {
            Cell::Set(s) => {
                if let Some(r) = s.region() {
                    prims.extend(r.primitives().iter().cloned());
                }
                if let Some(a) = s.atoms() {
                    atoms = atoms.union(a);
                }
            }
            Cell::Outside { .. } => {
                return Err(Error::Invalid("outside cells have no finite region form".into()))
            }
        }
    }
    Ok(match Set::empty_for(model) {
        Set::Region(r) => Set::Region(Region::new(r.dim(), prims)?),
        Set::Atoms(_) => Set::Atoms(atoms),
        Set::Pair(r, _) => Set::Pair(Region::new(r.dim(), prims)?, atoms),
    })
}

/// Checks every `S ∪ I ∪ T` (`S` ⊆ first `bound` finite atoms, `I` ⊆ `E_inf`, `T` nothing,
/// the next one to three atoms, or everything else) against `net`.
pub fn exhaustive_net_check(model: &MeasureModel, net: &[AtomSet], eps_sq: &Q, bound: usize) -> Result<bool> {
    let u = model.atoms().ok_or_else(|| Error::FamilyMismatch("net checks need an atomic model".into()))?;
    let head = u.first_finite_atoms(bound as u64);
    let infinite = u.infinite_atoms();
    let ids: Vec<AtomId> = head.iter().cloned().chain(infinite.iter().cloned()).collect();
    if ids.len() > MAX_NET_ATOMS {
        return Err(Error::TooLarge(format!(
            "{} atoms exceed the exhaustive limit {MAX_NET_ATOMS}",
            ids.len()
        )));
    }
    let next = u.first_finite_atoms(bound as u64 + 3);
    let mut tails = vec![AtomSet::empty()];
    for j in head.len() + 1..=next.len() {
        tails.push(AtomSet::of(next[head.len()..j].iter().cloned()));
    }
    if u.is_countable() {
        let rest = AtomSet::of(ids.iter().cloned()).complement();
        if !u.mass(&rest)?.is_zero() && !tails.contains(&rest) {
            tails.push(rest);
        }
    }
    let eps = ExtendedRational::Finite(eps_sq.clone());
    for mask in 0u64..1 << ids.len() {
        let s =
            AtomSet::of(ids.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, id)| id.clone()));
        for t in &tails {
            let b = s.union(t);
            let mut ok = false;
            for e in net {
                if u.mass(&b.symmetric_difference(e))? < eps {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
