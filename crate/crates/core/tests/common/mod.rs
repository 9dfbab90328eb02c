//! Seeded generators shared by the acceptance and property suites.
#![allow(dead_code)]

use nba_lab::filtration::{Cell, Partition};
use nba_lab::measure::{AtomId, AtomSet, AtomUniverse, Lebesgue, MeasureModel, Set, Tail};
use nba_lab::rational::{q, qi, ExtendedRational, Q};
use nba_lab::set_algebra::{AxisBox, Primitive, Region, SlopeTriangle};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_square() -> MeasureModel {
    MeasureModel::lebesgue(2, Some(AxisBox::unit(2))).unwrap()
}

pub fn plane() -> MeasureModel {
    MeasureModel::lebesgue(2, None).unwrap()
}

pub fn geometric() -> MeasureModel {
    MeasureModel::atomic(
        AtomUniverse::new(
            vec![],
            Tail::Geometric { first_index: 1, weight: q(1, 2), ratio: q(1, 2) },
            "x".into(),
        )
        .unwrap(),
    )
}

pub fn counting_n() -> MeasureModel {
    MeasureModel::atomic(
        AtomUniverse::new(vec![], Tail::Constant { first_index: 1, weight: qi(1) }, String::new()).unwrap(),
    )
}

pub fn counting_rd() -> MeasureModel {
    MeasureModel::atomic(
        AtomUniverse::new(vec![], Tail::UncountableConstant { weight: qi(1) }, String::new()).unwrap(),
    )
}

pub fn mixture_ball_plane() -> MeasureModel {
    MeasureModel::mixture(
        Lebesgue::new(2, None).unwrap(),
        AtomUniverse::new(vec![], Tail::UncountableConstant { weight: qi(1) }, String::new()).unwrap(),
    )
}

/// Unit square plus three explicit atoms (one of infinite weight) and a geometric tail.
pub fn mixture_unit_atoms() -> MeasureModel {
    MeasureModel::mixture(
        Lebesgue::new(2, Some(AxisBox::unit(2))).unwrap(),
        AtomUniverse::new(
            vec![
                ("a".into(), ExtendedRational::Finite(q(1, 3))),
                ("b".into(), ExtendedRational::Finite(q(3, 4))),
                ("big".into(), ExtendedRational::Infinity),
            ],
            Tail::Geometric { first_index: 1, weight: q(1, 4), ratio: q(1, 3) },
            "x".into(),
        )
        .unwrap(),
    )
}

/// Unit square plus three finite explicit atoms only, so explicit partitions can list them.
pub fn mixture_unit_finite_atoms() -> MeasureModel {
    MeasureModel::mixture(
        Lebesgue::new(2, Some(AxisBox::unit(2))).unwrap(),
        AtomUniverse::finite(vec![
            ("a".into(), ExtendedRational::Finite(q(1, 3))),
            ("b".into(), ExtendedRational::Finite(q(3, 4))),
            ("c".into(), ExtendedRational::Finite(q(1, 8))),
        ])
        .unwrap(),
    )
}

pub fn bx(x0: Q, x1: Q, y0: Q, y1: Q) -> AxisBox {
    AxisBox::new(vec![(x0, x1), (y0, y1)]).unwrap()
}

fn rand_q(rng: &mut ChaCha8Rng, lo: &Q, hi: &Q, den: i64) -> Q {
    let t = q(rng.random_range(0..=den), den);
    lo + (hi - lo) * t
}

/// Sorted distinct cut points `lo = c_0 < ... < c_k = hi`.
fn cuts(rng: &mut ChaCha8Rng, lo: &Q, hi: &Q, pieces: usize) -> Vec<Q> {
    let mut inner: Vec<Q> = (0..pieces.saturating_sub(1) * 3)
        .map(|_| rand_q(rng, lo, hi, 24))
        .filter(|x| x > lo && x < hi)
        .collect();
    inner.sort();
    inner.dedup();
    inner.shuffle(rng);
    inner.truncate(pieces.saturating_sub(1));
    inner.sort();
    let mut out = vec![lo.clone()];
    out.extend(inner);
    out.push(hi.clone());
    out
}

/// A random disjoint union of boxes, slope-1 triangles and sub-boxes inside `window`.
pub fn random_region(rng: &mut ChaCha8Rng, window: &AxisBox) -> Region {
    let (nx, ny) = (rng.random_range(1..=4), rng.random_range(1..=4));
    let xs = cuts(rng, &window.lo()[0], &window.hi()[0], nx);
    let ys = cuts(rng, &window.lo()[1], &window.hi()[1], ny);
    let mut prims = Vec::new();
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            if !rng.random_bool(0.5) {
                continue;
            }
            let cell = bx(xs[i].clone(), xs[i + 1].clone(), ys[j].clone(), ys[j + 1].clone());
            match rng.random_range(0..3) {
                0 => prims.push(Primitive::Box(cell)),
                1 => {
                    // Offsets between "empty" and "full" for this box.
                    let lo = &ys[j] - &xs[i + 1];
                    let hi = &ys[j + 1] - &xs[i];
                    let c = rand_q(rng, &lo, &hi, 12);
                    prims.push(Primitive::Triangle(SlopeTriangle::new(cell, c).unwrap()));
                }
                _ => {
                    let x1 = rand_q(rng, &xs[i], &xs[i + 1], 5);
                    let y1 = rand_q(rng, &ys[j], &ys[j + 1], 5);
                    prims.push(Primitive::Box(bx(xs[i].clone(), x1, ys[j].clone(), y1)));
                }
            }
        }
    }
    Region::new(2, prims).unwrap()
}

/// A random irregular grid partition of the unit square with at most `max_cells` cells; for
/// mixtures the explicit atoms are dealt to random cells.
pub fn random_partition(rng: &mut ChaCha8Rng, model: &MeasureModel, max_cells: usize) -> Partition {
    let unit = AxisBox::unit(2);
    let nx = rng.random_range(1..=4usize);
    let ny = rng.random_range(1..=(max_cells / nx).clamp(1, 4));
    let xs = cuts(rng, &unit.lo()[0], &unit.hi()[0], nx);
    let ys = cuts(rng, &unit.lo()[1], &unit.hi()[1], ny);
    let mut boxes = Vec::new();
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            boxes.push(bx(xs[i].clone(), xs[i + 1].clone(), ys[j].clone(), ys[j + 1].clone()));
        }
    }
    let cells = match model.atoms() {
        None => boxes.into_iter().map(|b| Cell::Set(Set::Region(Region::from_box(b)))).collect(),
        Some(u) => {
            let mut dealt = vec![Vec::new(); boxes.len()];
            for (name, _) in u.explicit() {
                let k = rng.random_range(0..boxes.len());
                dealt[k].push(AtomId::Name(name.clone()));
            }
            boxes
                .into_iter()
                .zip(dealt)
                .map(|(b, ids)| Cell::Set(Set::Pair(Region::from_box(b), AtomSet::of(ids))))
                .collect()
        }
    };
    Partition::explicit(model, cells, None).unwrap()
}

/// A random atom set over the first `n` finite atoms, the infinite atoms, and optionally
/// everything else (cofinite).
pub fn random_atoms(rng: &mut ChaCha8Rng, u: &AtomUniverse, n: u64) -> AtomSet {
    let pool: Vec<AtomId> = u.first_finite_atoms(n).into_iter().chain(u.infinite_atoms()).collect();
    let picked = AtomSet::of(pool.iter().filter(|_| rng.random_bool(0.5)).cloned());
    if u.is_countable() && rng.random_bool(0.25) {
        let excluded = AtomSet::of(pool.iter().filter(|_| rng.random_bool(0.5)).cloned());
        excluded.complement()
    } else {
        picked
    }
}

/// A random set representable in `model` (regions confined to `window`).
pub fn random_set(rng: &mut ChaCha8Rng, model: &MeasureModel, window: &AxisBox) -> Set {
    match (model.continuous(), model.atoms()) {
        (Some(_), None) => Set::Region(random_region(rng, window)),
        (None, Some(u)) => Set::Atoms(random_atoms(rng, u, 6)),
        (Some(_), Some(u)) => Set::Pair(random_region(rng, window), random_atoms(rng, u, 6)),
        (None, None) => Set::Atoms(AtomSet::empty()),
    }
}
