use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::measure::{mu, AtomId, AtomSet, MeasureModel, ModelKind, Set};
use crate::rational::{ExtSum, ExtendedRational, Q};
use crate::set_algebra::{AxisBox, Primitive, Region};

/// One cell of a finite partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cell {
    Set(Set),
    /// Everything in the continuous part outside `hole` (no atoms). Used when the
    /// continuous part is unbounded, where no finite region can express it.
    Outside {
        hole: AxisBox,
    },
}

/// Atom cells of the standard filtration: singletons, then the residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomCells {
    pub singletons: Vec<AtomId>,
    pub residual: AtomSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Layout {
    Explicit(Vec<Cell>),
    /// Continuous and atomic cells side by side (the space is their disjoint sum).
    Standard {
        grid: Option<Grid>,
        atoms: Option<AtomCells>,
    },
}

/// A finite measurable partition of the model's space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub(crate) level: Option<u32>,
    pub(crate) layout: Layout,
}

/// Refuse to materialize more cells than this.
pub const MAX_MATERIALIZED_CELLS: u64 = 1 << 20;

impl Partition {
    pub fn level(&self) -> Option<u32> {
        self.level
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.layout {
            Layout::Standard { grid, .. } => grid.as_ref(),
            Layout::Explicit(_) => None,
        }
    }

    pub fn atom_cells(&self) -> Option<&AtomCells> {
        match &self.layout {
            Layout::Standard { atoms, .. } => atoms.as_ref(),
            Layout::Explicit(_) => None,
        }
    }

    /// A user-supplied partition, checked for disjointness and cover.
    pub fn explicit(model: &MeasureModel, cells: Vec<Cell>, level: Option<u32>) -> Result<Self> {
        check_explicit(model, &cells)?;
        Ok(Partition { level, layout: Layout::Explicit(cells) })
    }

    /// Number of cells, outside cell included when nonempty.
    pub fn cell_count(&self) -> Result<BigInt> {
        match &self.layout {
            Layout::Explicit(cells) => Ok(BigInt::from(cells.len())),
            Layout::Standard { grid, atoms } => {
                let mut n = BigInt::zero();
                if let Some(g) = grid {
                    n += g.cell_count()?;
                    if outside_cell(g)?.is_some() {
                        n += 1;
                    }
                }
                if let Some(a) = atoms {
                    n += a.singletons.len() + usize::from(!a.residual.is_empty());
                }
                Ok(n)
            }
        }
    }

    /// All cells, in a fixed order: grid cells, the outside cell, singletons, the residual.
    pub fn cells(&self, model: &MeasureModel) -> Result<Vec<Cell>> {
        match &self.layout {
            Layout::Explicit(cells) => Ok(cells.clone()),
            Layout::Standard { grid, atoms } => {
                let count = self.cell_count()?;
                if count.to_u64().is_none_or(|c| c > MAX_MATERIALIZED_CELLS) {
                    return Err(Error::TooLarge(format!(
                        "partition has {count} cells; at most {MAX_MATERIALIZED_CELLS} can be listed"
                    )));
                }
                let mixed = matches!(model.kind, ModelKind::Mixture { .. });
                let wrap_region = |r: Region| {
                    if mixed {
                        Cell::Set(Set::Pair(r, AtomSet::empty()))
                    } else {
                        Cell::Set(Set::Region(r))
                    }
                };
                let wrap_atoms = |a: AtomSet| match model.continuous() {
                    Some(l) if mixed => Cell::Set(Set::Pair(Region::empty(l.dim), a)),
                    _ => Cell::Set(Set::Atoms(a)),
                };
                let mut out = Vec::new();
                if let Some(g) = grid {
                    for b in g.cells()? {
                        out.push(wrap_region(Region::from_box(b)));
                    }
                    match outside_cell(g)? {
                        Some(OutsidePiece::Region(r)) => out.push(wrap_region(r)),
                        Some(OutsidePiece::Unbounded(hole)) => out.push(Cell::Outside { hole }),
                        None => {}
                    }
                }
                if let Some(a) = atoms {
                    for id in &a.singletons {
                        out.push(wrap_atoms(AtomSet::singleton(id.clone())));
                    }
                    if !a.residual.is_empty() {
                        out.push(wrap_atoms(a.residual.clone()));
                    }
                }
                Ok(out)
            }
        }
    }
}

pub(crate) enum OutsidePiece {
    Region(Region),
    Unbounded(AxisBox),
}

/// `E_cont \ [-n, n)^d`, or `None` when it is empty.
pub(crate) fn outside_cell(g: &Grid) -> Result<Option<OutsidePiece>> {
    let core = g.core();
    match &g.window {
        None => Ok(Some(OutsidePiece::Unbounded(core))),
        Some(w) => {
            let pieces: Vec<Primitive> =
                w.subtract(&core).into_iter().filter(|b| !b.is_null()).map(Primitive::Box).collect();
            if pieces.is_empty() {
                Ok(None)
            } else {
                Ok(Some(OutsidePiece::Region(Region::from_disjoint(g.dim, pieces))))
            }
        }
    }
}

/// `mu(cell)`.
pub fn cell_measure(model: &MeasureModel, cell: &Cell) -> Result<ExtendedRational> {
    match cell {
        Cell::Set(s) => mu(model, s),
        Cell::Outside { hole } => {
            let l = model
                .continuous()
                .ok_or_else(|| Error::FamilyMismatch("outside cell needs a continuous part".into()))?;
            match &l.window {
                None => Ok(ExtendedRational::Infinity),
                Some(_) => {
                    let inside = l.measure(&Region::from_box(hole.clone()))?;
                    l.total().checked_sub(&inside.into())
                }
            }
        }
    }
}

/// `(mu(cell ∩ b), mu(cell \ b))`.
pub fn cell_split(
    model: &MeasureModel,
    cell: &Cell,
    b: &Set,
) -> Result<(ExtendedRational, ExtendedRational)> {
    model.validate(b)?;
    let (br, ba) = model.split(b)?;
    match cell {
        Cell::Outside { hole } => {
            let l = model
                .continuous()
                .ok_or_else(|| Error::FamilyMismatch("outside cell needs a continuous part".into()))?;
            let inside = match br {
                Some(r) => {
                    let whole = l.measure(r)?;
                    let in_hole = l.intersection(r, &Region::from_box(hole.clone()))?;
                    whole - in_hole
                }
                None => Q::zero(),
            };
            let total = cell_measure(model, cell)?;
            let rest = total.checked_sub(&inside.clone().into())?;
            Ok((inside.into(), rest))
        }
        Cell::Set(p) => {
            model.validate(p)?;
            let (pr, pa) = model.split(p)?;
            let mut hit = ExtSum::default();
            let mut miss = ExtSum::default();
            if let (Some(l), Some(pr)) = (model.continuous(), pr) {
                let whole = l.measure(pr)?;
                let both = match br {
                    Some(br) => l.intersection(pr, br)?,
                    None => Q::zero(),
                };
                miss.add(&(whole - &both).into());
                hit.add(&both.into());
            }
            if let (Some(u), Some(pa)) = (model.atoms(), pa) {
                let empty = AtomSet::empty();
                let ba = ba.unwrap_or(&empty);
                hit.add(&u.mass(&pa.intersection(ba))?);
                miss.add(&u.mass(&pa.difference(ba))?);
            }
            Ok((hit.value(), miss.value()))
        }
    }
}

fn check_explicit(model: &MeasureModel, cells: &[Cell]) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::Invalid("a partition needs at least one cell".into()));
    }
    let mut holes = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        match c {
            Cell::Set(s) => model.validate(s)?,
            Cell::Outside { hole } => {
                let l = model.continuous().ok_or_else(|| {
                    Error::FamilyMismatch(format!("cell {i}: outside cell needs a continuous part"))
                })?;
                if hole.dim() != l.dim {
                    return Err(Error::DimensionMismatch { expected: l.dim, got: hole.dim() });
                }
                holes.push(hole.clone());
            }
        }
    }
    if holes.len() > 1 {
        return Err(Error::Invalid("at most one outside cell is allowed".into()));
    }
    let sets: Vec<&Set> = cells
        .iter()
        .filter_map(|c| match c {
            Cell::Set(s) => Some(s),
            Cell::Outside { .. } => None,
        })
        .collect();
    // Disjointness of the listed sets.
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let (ir, ia) = model.split(sets[i])?;
            let (jr, ja) = model.split(sets[j])?;
            if let (Some(l), Some(a), Some(b)) = (model.continuous(), ir, jr) {
                if !l.intersection(a, b)?.is_zero() {
                    return Err(Error::Invalid(format!("cells {i} and {j} overlap")));
                }
            }
            if let (Some(_), Some(a), Some(b)) = (model.atoms(), ia, ja) {
                if !a.intersection(b).is_empty() {
                    return Err(Error::Invalid(format!("cells {i} and {j} share atoms")));
                }
            }
        }
    }
    // Cover of the continuous part.
    if let Some(l) = model.continuous() {
        let regions: Vec<&Region> =
            sets.iter().filter_map(|s| model.split(s).ok().and_then(|(r, _)| r)).collect();
        let covered: Q = regions.iter().map(|r| l.measure(r)).collect::<Result<Vec<_>>>()?.into_iter().sum();
        match (&l.window, holes.first()) {
            (Some(w), None) => {
                if covered != w.measure() {
                    return Err(Error::Invalid(format!(
                        "cells cover measure {covered} of a window of measure {}",
                        w.measure()
                    )));
                }
            }
            (_, Some(hole)) => {
                let hole_region = Region::from_box(hole.clone());
                let hole_measure = l.measure(&hole_region)?;
                let mut inside = Q::zero();
                for r in &regions {
                    inside += l.intersection(r, &hole_region)?;
                }
                if covered != hole_measure || inside != hole_measure {
                    return Err(Error::Invalid(
                        "cells other than the outside cell must tile its hole exactly".into(),
                    ));
                }
            }
            (None, None) => {
                return Err(Error::Invalid("an unbounded continuous part needs an outside cell".into()))
            }
        }
    }
    // Cover of the atoms: the union of atom parts must be everything.
    if let Some(u) = model.atoms() {
        let union = sets
            .iter()
            .filter_map(|s| model.split(s).ok().and_then(|(_, a)| a))
            .fold(AtomSet::empty(), |acc, a| acc.union(a));
        let missing = AtomSet::all().difference(&union);
        let missing_mass = if u.is_countable() { u.mass(&missing)? } else { ExtendedRational::Infinity };
        if !missing_mass.is_zero() {
            return Err(Error::Invalid("cells do not cover every atom".into()));
        }
    }
    Ok(())
}
