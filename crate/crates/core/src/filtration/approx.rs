use num_traits::{Signed, Zero};

use super::grid::Grid;
use super::partition::{cell_split, outside_cell, AtomCells, Cell, Layout, OutsidePiece, Partition};
use crate::error::{Error, Result};
use crate::measure::{mu, AtomSet, AtomUniverse, MeasureModel, ModelKind, Set};
use crate::metric::dist_sq;
use crate::par;
use crate::rational::{ExtSum, ExtendedRational, Q};
use crate::set_algebra::{AxisBox, Primitive, Region};

/// Default search depth of [`find_level`].
pub const DEFAULT_N_MAX: u32 = 24;

/// Environment variable overriding [`DEFAULT_N_MAX`].
pub const N_MAX_ENV: &str = "NBA_LAB_NMAX";

/// `NBA_LAB_NMAX` when set to a valid level, else [`DEFAULT_N_MAX`].
pub fn default_n_max() -> u32 {
    std::env::var(N_MAX_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_N_MAX)
}

/// The level-`n` standard partition: dyadic cells of side `2^-n` inside `[-n, n)^d` plus the
/// outside cell for the continuous part; the infinite atoms, the first `n` finite atoms
/// and the residual for the atomic part.
pub fn standard_filtration(model: &MeasureModel, n: u32) -> Result<Partition> {
    let grid = model.continuous().map(|l| Grid { dim: l.dim, window: l.window.clone(), level: n });
    let atoms = match model.atoms() {
        None => None,
        Some(u) => Some(atom_cells(u, n)?),
    };
    Ok(Partition { level: Some(n), layout: Layout::Standard { grid, atoms } })
}

fn atom_cells(u: &AtomUniverse, n: u32) -> Result<AtomCells> {
    if !u.is_countable() {
        return Err(Error::Refused(
            "the finite-mass atoms are uncountable, so no sequence of finite partitions \
             separates them (the space of finite-measure classes is not separable)"
                .into(),
        ));
    }
    let mut singletons = u.infinite_atoms();
    singletons.extend(u.first_finite_atoms(n as u64));
    let listed = AtomSet::of(singletons.iter().cloned());
    let mut residual = listed.complement();
    if u.mass(&residual)?.is_zero() {
        residual = AtomSet::empty();
    }
    Ok(AtomCells { singletons, residual })
}

/// Best approximant from a partition's σ-algebra and its error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approximation {
    pub approximant: Set,
    pub error: ExtendedRational,
}

/// Majority rule: keep cell `P` iff `mu(P \ B) < mu(P ∩ B)`; ties are dropped.
/// The error is `sum over P of min(mu(P ∩ B), mu(P \ B))`.
pub fn best_approximation(model: &MeasureModel, partition: &Partition, b: &Set) -> Result<Approximation> {
    model.validate(b)?;
    match &partition.layout {
        Layout::Explicit(cells) => explicit_best(model, cells, b),
        Layout::Standard { grid, atoms } => {
            let (br, ba) = model.split(b)?;
            let mut error = ExtSum::default();
            let mut region = model.continuous().map(|l| Region::empty(l.dim));
            if let (Some(g), Some(l)) = (grid, model.continuous()) {
                let empty = Region::empty(l.dim);
                let (e, r) = grid_best(g, br.unwrap_or(&empty))?;
                error.add(&e.into());
                region = Some(r);
            }
            let mut atom_part = None;
            if let (Some(cells), Some(u)) = (atoms, model.atoms()) {
                let empty = AtomSet::empty();
                let (e, a) = atoms_best(u, cells, ba.unwrap_or(&empty))?;
                error.add(&e);
                atom_part = Some(a);
            }
            Ok(Approximation { approximant: shape(model, region, atom_part), error: error.value() })
        }
    }
}

/// The error component of [`best_approximation`].
pub fn approx_error(model: &MeasureModel, partition: &Partition, b: &Set) -> Result<ExtendedRational> {
    Ok(best_approximation(model, partition, b)?.error)
}

fn shape(model: &MeasureModel, region: Option<Region>, atoms: Option<AtomSet>) -> Set {
    match (&model.kind, region, atoms) {
        (ModelKind::Mixture { continuous, .. }, r, a) => {
            Set::Pair(r.unwrap_or_else(|| Region::empty(continuous.dim)), a.unwrap_or_else(AtomSet::empty))
        }
        (_, Some(r), _) => Set::Region(r),
        (_, None, a) => Set::Atoms(a.unwrap_or_else(AtomSet::empty)),
    }
}

fn explicit_best(model: &MeasureModel, cells: &[Cell], b: &Set) -> Result<Approximation> {
    let splits = par::map(cells, |c| cell_split(model, c, b));
    let mut error = ExtSum::default();
    let mut prims: Vec<Primitive> = Vec::new();
    let mut atoms = AtomSet::empty();
    let window = model.continuous().and_then(|l| l.window.clone());
    for (cell, split) in cells.iter().zip(splits) {
        let (hit, miss) = split?;
        if miss < hit {
            error.add(&miss);
            match cell {
                Cell::Outside { .. } => {
                    return Err(Error::Inconsistent(
                        "an unbounded outside cell cannot be part of an approximant".into(),
                    ))
                }
                Cell::Set(s) => {
                    let (r, a) = model.split(s)?;
                    if let Some(r) = r {
                        let r = match &window {
                            Some(w) => r.clip(w),
                            None => r.clone(),
                        };
                        prims.extend(r.into_primitives());
                    }
                    if let Some(a) = a {
                        atoms = atoms.union(a);
                    }
                }
            }
        } else {
            error.add(&hit);
        }
    }
    let region = model.continuous().map(|l| Region::from_disjoint(l.dim, prims));
    let atoms = model.atoms().map(|_| atoms);
    Ok(Approximation { approximant: shape(model, region, atoms), error: error.value() })
}

/// Grid part: sparse blocks inside the clip box plus the single outside cell.
fn grid_best(g: &Grid, b: &Region) -> Result<(Q, Region)> {
    let in_window = match &g.window {
        Some(w) => b.clip(w),
        None => b.clone(),
    };
    let clip = g.clip_box();
    let inside = match &clip {
        Some(c) => in_window.clip(c),
        None => Region::empty(g.dim),
    };
    let mut error = Q::zero();
    let mut kept: Vec<Primitive> = Vec::new();
    let blocks = g.blocks(&inside)?;
    let h = crate::rational::dyadic_step(g.level);
    for blk in &blocks {
        let miss = &blk.m - &blk.a;
        if miss < blk.a {
            error += blk.count() * miss;
            let c = clip.as_ref().expect("blocks exist only inside the clip box");
            let lo = blk
                .ranges
                .iter()
                .zip(c.lo())
                .map(|((r0, _), glo)| std::cmp::max(Q::from_integer((*r0).into()) * &h, glo.clone()))
                .collect();
            let hi = blk
                .ranges
                .iter()
                .zip(c.hi())
                .map(|((_, r1), ghi)| std::cmp::min(Q::from_integer((*r1).into()) * &h, ghi.clone()))
                .collect();
            kept.push(Primitive::Box(AxisBox::from_bounds_unchecked(lo, hi)));
        } else {
            error += blk.count() * &blk.a;
        }
    }
    let hit_out = in_window.measure() - inside.measure();
    match outside_cell(g)? {
        Some(OutsidePiece::Region(r)) => {
            let miss_out = r.measure() - &hit_out;
            if miss_out < hit_out {
                error += miss_out;
                kept.extend(r.into_primitives());
            } else {
                error += hit_out;
            }
        }
        // Unbounded outside cell: its complement part is infinite, so it is never kept.
        Some(OutsidePiece::Unbounded(_)) => error += hit_out,
        None => {
            if hit_out.is_positive() {
                return Err(Error::Inconsistent("mass outside the grid but no outside cell".into()));
            }
        }
    }
    Ok((error, Region::from_disjoint(g.dim, kept)))
}

fn atoms_best(u: &AtomUniverse, cells: &AtomCells, b: &AtomSet) -> Result<(ExtendedRational, AtomSet)> {
    let mut error = ExtSum::default();
    let mut kept = AtomSet::empty();
    let mut consider = |cell: AtomSet| -> Result<()> {
        let hit = u.mass(&cell.intersection(b))?;
        let miss = u.mass(&cell.difference(b))?;
        if miss < hit {
            error.add(&miss);
            kept = kept.union(&cell);
        } else {
            error.add(&hit);
        }
        Ok(())
    };
    for id in &cells.singletons {
        consider(AtomSet::singleton(id.clone()))?;
    }
    if !cells.residual.is_empty() {
        consider(cells.residual.clone())?;
    }
    Ok((error.value(), kept))
}

/// Outcome of the level search for one set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxReport {
    pub target: Set,
    pub eps_sq: Q,
    pub level: u32,
    pub approximant: Set,
    pub error: ExtendedRational,
    /// Best-approximation error at levels `1..=level`.
    pub trace: Vec<ExtendedRational>,
}

impl ApproxReport {
    pub fn verdict(&self) -> bool {
        self.error < ExtendedRational::Finite(self.eps_sq.clone())
    }
}

/// Smallest level `n <= n_max` whose standard partition approximates `b` to within
/// `mu(A' Δ b) < eps_sq`. Requires an outer-regular model and `mu(b) < inf`.
pub fn find_level(model: &MeasureModel, b: &Set, eps_sq: &Q, n_max: u32) -> Result<ApproxReport> {
    if !eps_sq.is_positive() {
        return Err(Error::Invalid(format!("eps_sq must be positive, got {eps_sq}")));
    }
    if !model.outer_regular {
        return Err(Error::Refused(
            "model is not declared outer regular; dyadic approximation is not guaranteed".into(),
        ));
    }
    if mu(model, b)?.is_infinite() {
        return Err(Error::Refused(
            "target has infinite measure; only finite-measure sets are approximated".into(),
        ));
    }
    let target = ExtendedRational::Finite(eps_sq.clone());
    let mut trace = Vec::new();
    let mut best: Option<(u32, ExtendedRational)> = None;
    for n in 1..=n_max {
        let partition = standard_filtration(model, n)?;
        let approx = best_approximation(model, &partition, b)?;
        trace.push(approx.error.clone());
        if best.as_ref().is_none_or(|(_, e)| approx.error < *e) {
            best = Some((n, approx.error.clone()));
        }
        if approx.error < target {
            let recomputed = dist_sq(model, &approx.approximant, b)?;
            if recomputed != approx.error {
                return Err(Error::Inconsistent(format!(
                    "majority-rule error {} differs from recomputed distance {recomputed}",
                    approx.error
                )));
            }
            return Ok(ApproxReport {
                target: b.clone(),
                eps_sq: eps_sq.clone(),
                level: n,
                approximant: approx.approximant,
                error: approx.error,
                trace,
            });
        }
    }
    let (best_level, best_error) = best.unwrap_or((0, mu(model, b)?));
    Err(Error::NotFound { n_max, eps_sq: eps_sq.to_string(), best_error: best_error.to_string(), best_level })
}

/// Largest approximation error over a finite family.
pub fn uniform_error(
    model: &MeasureModel,
    partition: &Partition,
    family: &[Set],
) -> Result<ExtendedRational> {
    let errors = par::map(family, |s| approx_error(model, partition, s));
    let mut worst = ExtendedRational::zero();
    for e in errors {
        worst = std::cmp::max(worst, e?);
    }
    Ok(worst)
}

/// Per-set search result inside a [`ProbeReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeOutcome {
    Found { level: u32, error: ExtendedRational },
    NotFound { best_level: u32, best_error: String },
    Refused(String),
}

/// Pointwise and uniform approximability of a finite family.
///
/// Pointwise: each set gets its own level. Uniform: one level serves the whole family,
/// which for a finite family is the largest per-set level, since errors never increase
/// under refinement. The uniform errors per level make visible where a common level fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub eps_sq: Q,
    pub n_max: u32,
    pub outcomes: Vec<ProbeOutcome>,
    /// `Some(level)` when every set was approximated; `Some(0)` for the empty family.
    pub uniform_level: Option<u32>,
    /// `uniform_error` at levels `1..=uniform_level` (empty when there is no uniform level).
    pub uniform_errors: Vec<ExtendedRational>,
}

impl ProbeReport {
    pub fn pointwise_success(&self) -> bool {
        self.outcomes.iter().all(|o| matches!(o, ProbeOutcome::Found { .. }))
    }

    pub fn uniform_success(&self) -> bool {
        self.uniform_level.is_some()
    }
}

pub fn probe_approximability(
    model: &MeasureModel,
    family: &[Set],
    eps_sq: &Q,
    n_max: u32,
) -> Result<ProbeReport> {
    if !eps_sq.is_positive() {
        return Err(Error::Invalid(format!("eps_sq must be positive, got {eps_sq}")));
    }
    let results = par::map(family, |s| find_level(model, s, eps_sq, n_max));
    let mut outcomes = Vec::with_capacity(family.len());
    for r in results {
        outcomes.push(match r {
            Ok(rep) => ProbeOutcome::Found { level: rep.level, error: rep.error },
            Err(Error::NotFound { best_level, best_error, .. }) => {
                ProbeOutcome::NotFound { best_level, best_error }
            }
            Err(e) if e.is_refusal() => ProbeOutcome::Refused(e.to_string()),
            Err(e) => return Err(e),
        });
    }
    let levels: Option<Vec<u32>> = outcomes
        .iter()
        .map(|o| match o {
            ProbeOutcome::Found { level, .. } => Some(*level),
            _ => None,
        })
        .collect();
    let uniform_level = levels.map(|ls| ls.into_iter().max().unwrap_or(0));
    let mut uniform_errors = Vec::new();
    if let Some(top) = uniform_level {
        let per_level: Vec<Result<ExtendedRational>> = par::map_range(1..top as u64 + 1, |n| {
            let p = standard_filtration(model, n as u32)?;
            uniform_error(model, &p, family)
        });
        for e in per_level {
            uniform_errors.push(e?);
        }
    }
    Ok(ProbeReport { eps_sq: eps_sq.clone(), n_max, outcomes, uniform_level, uniform_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{AtomId, Tail};
    use crate::rational::{q, qi};
    use crate::set_algebra::make_dyadic_cube;

    fn unit_model() -> MeasureModel {
        MeasureModel::lebesgue(2, Some(AxisBox::unit(2))).unwrap()
    }

    fn third_strip() -> Set {
        Set::Region(Region::from_box(AxisBox::new(vec![(qi(0), q(1, 3)), (qi(0), qi(1))]).unwrap()))
    }

    fn counting() -> MeasureModel {
        MeasureModel::atomic(
            AtomUniverse::new(vec![], Tail::Constant { first_index: 1, weight: qi(1) }, String::new())
                .unwrap(),
        )
    }

    #[test]
    fn standard_partitions() {
        let m = unit_model();
        assert_eq!(standard_filtration(&m, 1).unwrap().cells(&m).unwrap().len(), 4);

        let plane = MeasureModel::lebesgue(2, None).unwrap();
        let cells = standard_filtration(&plane, 1).unwrap().cells(&plane).unwrap();
        assert_eq!(cells.len(), 17);
        assert!(matches!(cells.last(), Some(Cell::Outside { .. })));

        let c = counting();
        let p = standard_filtration(&c, 3).unwrap();
        let atoms = p.atom_cells().unwrap();
        assert_eq!(atoms.singletons, (1..=3).map(AtomId::Index).collect::<Vec<_>>());
        assert_eq!(atoms.residual, AtomSet::of((1..=3).map(AtomId::Index)).complement());
    }

    #[test]
    fn uncountable_universe_has_no_standard_filtration() {
        let m = MeasureModel::atomic(
            AtomUniverse::new(vec![], Tail::UncountableConstant { weight: qi(1) }, String::new()).unwrap(),
        );
        assert!(matches!(standard_filtration(&m, 1), Err(Error::Refused(_))));
    }

    #[test]
    fn strip_errors_per_level() {
        let m = unit_model();
        let b = third_strip();
        let e1 = approx_error(&m, &standard_filtration(&m, 1).unwrap(), &b).unwrap();
        let e2 = approx_error(&m, &standard_filtration(&m, 2).unwrap(), &b).unwrap();
        assert_eq!(e1, q(1, 6).into());
        assert_eq!(e2, q(1, 12).into());

        let rep = find_level(&m, &b, &q(1, 8), 24).unwrap();
        assert_eq!(rep.level, 2);
        assert_eq!(rep.error, q(1, 12).into());
        assert_eq!(rep.trace, vec![q(1, 6).into(), q(1, 12).into()]);
        assert!(rep.verdict());
    }

    #[test]
    fn dyadic_cell_is_exact_at_its_level() {
        let m = unit_model();
        let cell = Set::Region(Region::from_box(make_dyadic_cube(3, &[5, 2], 2).unwrap()));
        let rep = find_level(&m, &cell, &q(1, 1_000_000), 24).unwrap();
        assert_eq!(rep.level, 3);
        assert_eq!(rep.error, ExtendedRational::zero());
        assert_eq!(rep.approximant, cell);
    }

    #[test]
    fn explicit_and_standard_agree() {
        let m = unit_model();
        let b = third_strip();
        for n in 1..4 {
            let std = standard_filtration(&m, n).unwrap();
            let explicit = Partition::explicit(&m, std.cells(&m).unwrap(), Some(n)).unwrap();
            let a = best_approximation(&m, &std, &b).unwrap();
            let e = best_approximation(&m, &explicit, &b).unwrap();
            assert_eq!(a.error, e.error);
            assert_eq!(dist_sq(&m, &a.approximant, &e.approximant).unwrap(), ExtendedRational::zero());
        }
    }

    #[test]
    fn unbounded_plane_with_mass_outside_the_core() {
        let m = MeasureModel::lebesgue(2, None).unwrap();
        let b = Set::Region(Region::from_box(AxisBox::new(vec![(q(1, 2), qi(3)), (qi(0), qi(1))]).unwrap()));
        let e1 = approx_error(&m, &standard_filtration(&m, 1).unwrap(), &b).unwrap();
        assert_eq!(e1, qi(2).into());
        let rep = find_level(&m, &b, &q(1, 100), 24).unwrap();
        assert_eq!(rep.level, 3);
        assert_eq!(rep.error, ExtendedRational::zero());
    }

    #[test]
    fn atomic_levels() {
        let m = counting();
        let b = Set::Atoms(AtomSet::of([AtomId::Index(2), AtomId::Index(5)]));
        let rep = find_level(&m, &b, &q(1, 2), 24).unwrap();
        assert_eq!(rep.level, 5);
        assert_eq!(rep.approximant, b);
        assert!(matches!(find_level(&m, &Set::Atoms(AtomSet::all()), &q(1, 2), 24), Err(Error::Refused(_))));
    }

    #[test]
    fn not_found_reports_best_error() {
        let m = unit_model();
        match find_level(&m, &third_strip(), &q(1, 1000), 3) {
            Err(Error::NotFound { best_level, best_error, .. }) => {
                assert_eq!(best_level, 3);
                assert_eq!(best_error, "1/24");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn uniform_error_of_cells_is_zero() {
        let m = unit_model();
        let p = standard_filtration(&m, 2).unwrap();
        let family: Vec<Set> = p
            .cells(&m)
            .unwrap()
            .into_iter()
            .map(|c| match c {
                Cell::Set(s) => s,
                Cell::Outside { .. } => unreachable!(),
            })
            .collect();
        assert_eq!(uniform_error(&m, &p, &family).unwrap(), ExtendedRational::zero());
    }

    #[test]
    fn probes() {
        let m = unit_model();
        let empty = probe_approximability(&m, &[], &q(1, 4), 24).unwrap();
        assert!(empty.uniform_success() && empty.pointwise_success());

        let boxes = vec![third_strip(), Set::Region(Region::from_box(AxisBox::unit(2)))];
        let rep = probe_approximability(&m, &boxes, &q(1, 16), 24).unwrap();
        assert!(rep.pointwise_success());
        assert_eq!(rep.uniform_level, Some(3));
        assert_eq!(rep.uniform_errors.len(), 3);
        assert!(rep.uniform_errors[2] < q(1, 16).into());
    }
}
