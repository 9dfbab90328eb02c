//! Counterexample objects, built and checked exactly.
//!
//! - `T_m`: one slope-1 triangle per level-`m` cell of `[0,1)^2`; every union of level-`m`
//!   cells sits at squared distance exactly 1/2 from it.
//! - `T_m^eps`: a corner sub-box of measure `eps_sq / 4^m` per cell; no union of level-`m`
//!   cells gets closer than `eps_sq`.
//! - alpha witnesses, discrete families and eps-nets for the atomic side.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{classify, Answer, Property};
use crate::error::{Error, Result};
use crate::filtration::{best_approximation, cell_measure, standard_filtration, Cell, Partition};
use crate::measure::{AtomId, AtomSet, AtomUniverse, MeasureModel, ModelKind, Set};
use crate::metric::dist_sq;
use crate::par;
use crate::rational::{dyadic_step, q, ExtendedRational, Q};
use crate::set_algebra::{AxisBox, Primitive, Region, SlopeTriangle};

/// Largest `m` accepted by the `T_m` builders (4^10 pieces).
pub const MAX_WITNESS_LEVEL: u32 = 10;

fn check_level(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::Invalid("witness level must be at least 1".into()));
    }
    if m > MAX_WITNESS_LEVEL {
        return Err(Error::TooLarge(format!("witness level {m} exceeds {MAX_WITNESS_LEVEL}")));
    }
    Ok(())
}

fn check_eps(eps_sq: &Q) -> Result<()> {
    if !(eps_sq > &Q::zero() && eps_sq <= &q(1, 2)) {
        return Err(Error::Invalid(format!("eps_sq must lie in (0, 1/2], got {eps_sq}")));
    }
    Ok(())
}

fn level_cell(m: u32, a: i64, b: i64) -> AxisBox {
    let h = dyadic_step(m);
    AxisBox::from_bounds_unchecked(
        vec![&h * Q::from_integer(a.into()), &h * Q::from_integer(b.into())],
        vec![&h * Q::from_integer((a + 1).into()), &h * Q::from_integer((b + 1).into())],
    )
}

/// `T_m`: in cell `(a, b)` of side `h = 2^-m`, the part below the diagonal through the
/// cell's lower-left corner, `y <= x + (b - a) h`.
pub fn make_tm(m: u32) -> Result<Region> {
    check_level(m)?;
    let n = 1i64 << m;
    let h = dyadic_step(m);
    let mut prims = Vec::with_capacity((n * n) as usize);
    for a in 0..n {
        for b in 0..n {
            let offset = &h * Q::from_integer((b - a).into());
            prims.push(Primitive::Triangle(SlopeTriangle::new(level_cell(m, a, b), offset)?));
        }
    }
    Ok(Region::from_disjoint(2, prims))
}

/// `T_m^eps`: per cell `(a, b)` the sub-box `[(a + 1/2) h, (a + 1) h) x [b h, b h + 2 eps_sq h)`,
/// of measure `eps_sq h^2`; total measure `eps_sq`.
pub fn make_tm_eps(m: u32, eps_sq: &Q) -> Result<Region> {
    check_level(m)?;
    check_eps(eps_sq)?;
    let n = 1i64 << m;
    let h = dyadic_step(m);
    let half = q(1, 2);
    let height = &h * eps_sq * Q::from_integer(2.into());
    let mut prims = Vec::with_capacity((n * n) as usize);
    for a in 0..n {
        for b in 0..n {
            let cell = level_cell(m, a, b);
            let x0 = &cell.lo()[0] + &half * &h;
            let y0 = cell.lo()[1].clone();
            let y1 = &y0 + &height;
            prims.push(Primitive::Box(AxisBox::from_bounds_unchecked(
                vec![x0, y0],
                vec![cell.hi()[0].clone(), y1],
            )));
        }
    }
    Ok(Region::from_disjoint(2, prims))
}

/// Error of the union of `k` level-`m` cells against `T_m^eps`:
/// `k (1 - eps_sq) / 4^m + (4^m - k) eps_sq / 4^m`.
pub fn cell_witness_error(m: u32, eps_sq: &Q, k: u64) -> Q {
    let cells = Q::from_integer((1u64 << (2 * m)).into());
    let k = Q::from_integer(k.into());
    (&k * (Q::one() - eps_sq) + (&cells - &k) * eps_sq) / cells
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessReport {
    pub witness: Region,
    pub level: u32,
    pub eps_sq: Q,
    /// Minimal `mu(A Δ witness)` over unions `A` of level cells.
    pub error: ExtendedRational,
    /// The cells kept by the minimizer (empty at the optimum when `eps_sq <= 1/2`).
    pub approximant: Set,
    /// `error >= eps_sq`.
    pub verdict: bool,
}

fn is_unit_square(model: &MeasureModel) -> bool {
    matches!(&model.kind, ModelKind::Lebesgue(l) if l.dim == 2 && l.window.as_ref() == Some(&AxisBox::unit(2)))
}

/// Best approximation of `T_m^eps` over the level-`m` partition, cross-checked against the
/// closed form and against a direct distance computation.
pub fn verify_cell_witness(model: &MeasureModel, m: u32, eps_sq: &Q) -> Result<WitnessReport> {
    if !is_unit_square(model) {
        return Err(Error::FamilyMismatch("cell witnesses live in Lebesgue measure on [0,1)^2".into()));
    }
    let witness = make_tm_eps(m, eps_sq)?;
    let partition = standard_filtration(model, m)?;
    let b = Set::Region(witness.clone());
    let best = best_approximation(model, &partition, &b)?;
    let direct = dist_sq(model, &best.approximant, &b)?;
    if direct != best.error {
        return Err(Error::Inconsistent(format!(
            "majority-rule error {} disagrees with direct distance {direct}",
            best.error
        )));
    }
    let closed =
        (0..=1u64 << (2 * m)).map(|k| cell_witness_error(m, eps_sq, k)).min().expect("nonempty range");
    if ExtendedRational::Finite(closed.clone()) != best.error {
        return Err(Error::Inconsistent(format!(
            "best error {} disagrees with the closed-form minimum {closed}",
            best.error
        )));
    }
    let verdict = best.error >= ExtendedRational::Finite(eps_sq.clone());
    Ok(WitnessReport {
        witness,
        level: m,
        eps_sq: eps_sq.clone(),
        error: best.error,
        approximant: best.approximant,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaWitness {
    pub set: Set,
    /// Fraction of every finite-mass cell occupied; `None` when no such cell exists.
    pub alpha: Option<Q>,
    /// Total continuous mass of the finite-mass cells.
    pub finite_mass: Q,
    /// Best-approximation error of `set` over the partition.
    pub error: ExtendedRational,
}

/// A set of measure `eps_sq` occupying the same fraction `alpha` of every finite-mass cell's
/// continuous part, so every union of cells misses it by at least `eps_sq`.
pub fn make_alpha_witness(model: &MeasureModel, partition: &Partition, eps_sq: &Q) -> Result<AlphaWitness> {
    let l = model
        .continuous()
        .ok_or_else(|| Error::FamilyMismatch("alpha witnesses need a non-atomic part".into()))?;
    if eps_sq <= &Q::zero() {
        return Err(Error::Invalid("eps_sq must be positive".into()));
    }
    let cells = partition.cells(model)?;
    let mut pieces: Vec<(Region, Q)> = Vec::new();
    for cell in &cells {
        let Cell::Set(s) = cell else { continue };
        if !cell_measure(model, cell)?.is_finite() {
            continue;
        }
        let Some(r) = s.region() else { continue };
        let r = match &l.window {
            Some(w) => r.clip(w),
            None => r.clone(),
        };
        if r.has_triangles() {
            return Err(Error::Invalid("alpha witnesses need cells made of boxes".into()));
        }
        let mass = r.measure();
        if !mass.is_zero() {
            pieces.push((r, mass));
        }
    }
    let finite_mass: Q = pieces.iter().map(|(_, m)| m.clone()).sum();
    let empty = Set::empty_for(model);
    if pieces.is_empty() {
        let error = best_approximation(model, partition, &empty)?.error;
        return Ok(AlphaWitness { set: empty, alpha: None, finite_mass, error });
    }
    if eps_sq * Q::from_integer(2.into()) >= finite_mass {
        return Err(Error::Invalid(format!(
            "eps_sq {eps_sq} must be below half the finite cell mass {finite_mass}"
        )));
    }
    let alpha = eps_sq / &finite_mass;
    let mut prims = Vec::new();
    for (r, _) in pieces {
        for p in r.into_primitives() {
            let Primitive::Box(b) = p else { unreachable!("triangles rejected above") };
            let lo = b.lo().to_vec();
            let hi0 = &lo[0] + (&b.hi()[0] - &lo[0]) * &alpha;
            let mut hi = b.hi().to_vec();
            hi[0] = hi0;
            prims.push(Primitive::Box(AxisBox::from_bounds_unchecked(lo, hi)));
        }
    }
    let region = Region::from_disjoint(l.dim, prims);
    let set = match &model.kind {
        ModelKind::Mixture { .. } => Set::Pair(region, AtomSet::empty()),
        _ => Set::Region(region),
    };
    let error = best_approximation(model, partition, &set)?.error;
    Ok(AlphaWitness { set, alpha: Some(alpha), finite_mass, error })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteFamily {
    /// Lower bound on every atom weight; pairwise squared distances are at least `2 delta`.
    pub delta: ExtendedRational,
    pub sets: Vec<AtomSet>,
}

/// `k` singletons of distinct atoms in a universe whose weights are bounded below.
pub fn discrete_family(model: &MeasureModel, k: usize) -> Result<DiscreteFamily> {
    let u = model.atoms().ok_or_else(|| Error::FamilyMismatch("discrete families need atoms".into()))?;
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let delta = u
        .weight_infimum()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| Error::Invalid("atom weights have no positive lower bound".into()))?;
    let mut ids = u.first_finite_atoms(k as u64);
    if ids.len() < k && !u.is_countable() {
        ids.extend((ids.len()..k).map(|i| AtomId::Name(format!("{}pt{i}", u.prefix()))));
    }
    ids.extend(u.infinite_atoms());
    ids.truncate(k);
    if ids.len() < k {
        return Err(Error::Invalid(format!("only {} atoms available, {k} requested", ids.len())));
    }
    Ok(DiscreteFamily { delta, sets: ids.into_iter().map(AtomSet::singleton).collect() })
}

/// Largest `n_eps + |E_inf|` accepted by [`build_net`].
pub const MAX_NET_BITS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsNet {
    pub eps_sq: Q,
    pub level: u32,
    /// `x_1 .. x_{n_eps}`.
    pub basis: Vec<AtomId>,
    pub infinite: Vec<AtomId>,
    /// Element `i` holds `basis[j]` iff bit `j` of `i` is set, and `infinite[j]` iff bit
    /// `n_eps + j` is set.
    pub elements: Vec<AtomSet>,
}

impl EpsNet {
    pub fn cardinality(&self) -> usize {
        self.elements.len()
    }
}

fn net_universe(model: &MeasureModel) -> Result<AtomUniverse> {
    match &model.kind {
        ModelKind::Atomic(u) => Ok(u.clone()),
        ModelKind::Zero => Ok(AtomUniverse::empty()),
        _ => Err(Error::Refused(
            "eps-nets are built for purely atomic models only; a non-atomic part makes the \
             space non-compact [nonatomic-not-locally-compact]"
                .into(),
        )),
    }
}

/// Mass of finite atoms after the first `n`.
fn finite_tail(u: &AtomUniverse, n: u64) -> Result<ExtendedRational> {
    let listed = AtomSet::of(u.first_finite_atoms(n).into_iter().chain(u.infinite_atoms()));
    u.mass(&listed.complement())
}

/// Net from the first `n_eps` finite atoms and `E_inf`, with `n_eps` the least `n` whose
/// finite tail mass is below `eps_sq`.
pub fn build_net(model: &MeasureModel, eps_sq: &Q) -> Result<EpsNet> {
    let u = net_universe(model)?;
    if eps_sq <= &Q::zero() {
        return Err(Error::Invalid("eps_sq must be positive".into()));
    }
    let (all, _) = classify(model);
    if all.compact != Answer::Yes {
        let why = all
            .justifications
            .iter()
            .find(|j| j.property == Property::Compact)
            .map(|j| format!("[{}] {}", j.tag, j.reason))
            .unwrap_or_default();
        return Err(Error::Refused(format!("the measure algebra is not compact ({}): {why}", all.compact)));
    }
    let infinite = u.infinite_atoms();
    let eps = ExtendedRational::Finite(eps_sq.clone());
    let mut n = 0u32;
    while finite_tail(&u, n as u64)? >= eps {
        n += 1;
        if n + infinite.len() as u32 > MAX_NET_BITS {
            return Err(Error::TooLarge(format!("the net needs more than 2^{MAX_NET_BITS} elements")));
        }
    }
    if n + infinite.len() as u32 > MAX_NET_BITS {
        return Err(Error::TooLarge(format!("the net needs more than 2^{MAX_NET_BITS} elements")));
    }
    let basis = u.first_finite_atoms(n as u64);
    let bits: Vec<AtomId> = basis.iter().chain(&infinite).cloned().collect();
    let elements = (0u64..1 << bits.len())
        .map(|mask| {
            AtomSet::of(bits.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, id)| id.clone()))
        })
        .collect();
    Ok(EpsNet { eps_sq: eps_sq.clone(), level: n, basis, infinite, elements })
}

/// Outcome of a cover check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetCheck {
    pub covered: bool,
    pub tested: u64,
    pub exhaustive: bool,
    /// First tested set with no net element within `eps_sq`.
    pub counterexample: Option<AtomSet>,
}

/// Bound on the atoms enumerated by the exhaustive branch of [`verify_net`].
pub const MAX_EXHAUSTIVE_ATOMS: usize = 12;

/// Sets of the form `S ∪ I ∪ T`: `S` any subset of the first `k` finite atoms, `I` any
/// subset of `E_inf`, `T` a tail pattern (nothing, the next one to three atoms, or
/// everything after the first `k`).
pub(crate) fn tail_patterns(u: &AtomUniverse, k: u64) -> Result<Vec<AtomSet>> {
    let head = u.first_finite_atoms(k);
    let mut out = vec![AtomSet::empty()];
    let next = u.first_finite_atoms(k + 3);
    for j in 1..=next.len().saturating_sub(head.len()) {
        out.push(AtomSet::of(next[head.len()..head.len() + j].iter().cloned()));
    }
    let listed = AtomSet::of(head.into_iter().chain(u.infinite_atoms()));
    let rest = listed.complement();
    if !u.mass(&rest)?.is_zero() && !out.contains(&rest) {
        out.push(rest);
    }
    Ok(out)
}

/// Net elements keyed by their trace on the net's support, so the natural candidate for a
/// tested set is found without scanning.
struct NetIndex<'a> {
    net: &'a [AtomSet],
    support: AtomSet,
    by_trace: HashMap<AtomSet, usize>,
}

impl<'a> NetIndex<'a> {
    fn new(net: &'a [AtomSet], support: AtomSet) -> Self {
        let by_trace = net.iter().enumerate().map(|(i, e)| (e.intersection(&support), i)).collect();
        NetIndex { net, support, by_trace }
    }

    /// Tries the candidate agreeing with `b` on the support first; any miss falls back to a
    /// full scan, so the answer never depends on the shortcut.
    fn within(&self, u: &AtomUniverse, b: &AtomSet, eps: &ExtendedRational) -> Result<bool> {
        if let Some(&i) = self.by_trace.get(&b.intersection(&self.support)) {
            if &u.mass(&b.symmetric_difference(&self.net[i]))? < eps {
                return Ok(true);
            }
        }
        for e in self.net {
            if &u.mass(&b.symmetric_difference(e))? < eps {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Checks that every tested set lies within `eps_sq` of some net element. Exhaustive over
/// [`tail_patterns`] with `k = min(n_eps + 3, 12)` when that stays small; otherwise `trials`
/// random sets drawn with a ChaCha8 stream per trial seeded from `seed`.
pub fn verify_net(model: &MeasureModel, net: &EpsNet, trials: u64, seed: u64) -> Result<NetCheck> {
    let u = net_universe(model)?;
    for e in &net.elements {
        u.validate(e)?;
    }
    let eps = ExtendedRational::Finite(net.eps_sq.clone());
    let index = NetIndex::new(&net.elements, AtomSet::of(net.basis.iter().chain(&net.infinite).cloned()));
    let k = (net.level as usize + 3).min(MAX_EXHAUSTIVE_ATOMS) as u64;
    let head = u.first_finite_atoms(k);
    let infinite = u.infinite_atoms();
    let bits = head.len() + infinite.len();
    if bits <= 16 {
        let patterns = tail_patterns(&u, k)?;
        let ids: Vec<AtomId> = head.into_iter().chain(infinite).collect();
        let per_mask = par::map_range(0..1u64 << bits, |mask| -> Result<Option<AtomSet>> {
            let s = AtomSet::of(
                ids.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, id)| id.clone()),
            );
            for t in &patterns {
                let b = s.union(t);
                if !index.within(&u, &b, &eps)? {
                    return Ok(Some(b));
                }
            }
            Ok(None)
        });
        let mut counterexample = None;
        for r in per_mask {
            if let Some(b) = r? {
                counterexample = Some(b);
                break;
            }
        }
        return Ok(NetCheck {
            covered: counterexample.is_none(),
            tested: (1u64 << bits) * patterns.len() as u64,
            exhaustive: true,
            counterexample,
        });
    }
    let pool: Vec<AtomId> =
        u.first_finite_atoms(net.level as u64 + 8).into_iter().chain(u.infinite_atoms()).collect();
    let beyond = AtomSet::of(pool.iter().cloned()).complement();
    let results = par::map_range(0..trials, |t| -> Result<Option<AtomSet>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t));
        let mut b = AtomSet::of(pool.iter().filter(|_| rng.random_bool(0.5)).cloned());
        if u.is_countable() && rng.random_bool(0.5) {
            b = b.union(&beyond);
        }
        Ok((!index.within(&u, &b, &eps)?).then_some(b))
    });
    let mut counterexample = None;
    for r in results {
        if let Some(b) = r? {
            counterexample = Some(b);
            break;
        }
    }
    Ok(NetCheck { covered: counterexample.is_none(), tested: trials, exhaustive: false, counterexample })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Tail;
    use crate::rational::qi;

    fn unit() -> MeasureModel {
        MeasureModel::lebesgue(2, Some(AxisBox::unit(2))).unwrap()
    }

    fn geometric() -> MeasureModel {
        MeasureModel::atomic(
            AtomUniverse::new(
                vec![],
                Tail::Geometric { first_index: 1, weight: q(1, 2), ratio: q(1, 2) },
                "x".into(),
            )
            .unwrap(),
        )
    }

    fn counting() -> MeasureModel {
        MeasureModel::atomic(
            AtomUniverse::new(vec![], Tail::Constant { first_index: 1, weight: qi(1) }, String::new())
                .unwrap(),
        )
    }

    #[test]
    fn tm_has_half_measure() {
        for m in 1..=4 {
            let t = make_tm(m).unwrap();
            assert_eq!(t.primitives().len(), 1 << (2 * m));
            assert_eq!(t.measure(), q(1, 2));
        }
    }

    #[test]
    fn tm_eps_pieces() {
        let t = make_tm_eps(2, &q(1, 64)).unwrap();
        assert_eq!(t.primitives().len(), 16);
        assert!(t.primitives().iter().all(|p| p.measure() == q(1, 1024)));
        assert_eq!(t.measure(), q(1, 64));
        assert!(make_tm_eps(1, &q(3, 4)).is_err());
        assert!(Region::new(2, t.into_primitives()).is_ok());
    }

    #[test]
    fn cell_witness_reports() {
        let r = verify_cell_witness(&unit(), 1, &q(1, 4)).unwrap();
        assert_eq!(r.error, ExtendedRational::Finite(q(1, 4)));
        assert!(r.verdict);
        let r = verify_cell_witness(&unit(), 2, &q(1, 2)).unwrap();
        assert_eq!(r.error, ExtendedRational::Finite(q(1, 2)));
        assert_eq!(cell_witness_error(1, &q(1, 2), 4), q(1, 2));
        assert_eq!(cell_witness_error(1, &q(1, 2), 0), q(1, 2));
    }

    #[test]
    fn alpha_witness_on_unit_square() {
        let m = unit();
        let p = standard_filtration(&m, 2).unwrap();
        let w = make_alpha_witness(&m, &p, &q(1, 8)).unwrap();
        assert_eq!(w.alpha, Some(q(1, 8)));
        assert_eq!(crate::measure::mu(&m, &w.set).unwrap(), ExtendedRational::Finite(q(1, 8)));
        assert!(w.error >= ExtendedRational::Finite(q(1, 8)));
        assert!(make_alpha_witness(&m, &p, &q(1, 2)).is_err());
    }

    #[test]
    fn alpha_witness_without_finite_cells_is_empty() {
        let m = MeasureModel::lebesgue(2, None).unwrap();
        let p = Partition::explicit(&m, vec![Cell::Outside { hole: AxisBox::unit(2) }], None);
        // A lone outside cell does not cover the hole, so build the trivial partition instead.
        assert!(p.is_err());
        let p = standard_filtration(&m, 0).unwrap();
        let w = make_alpha_witness(&m, &p, &q(1, 8)).unwrap();
        assert_eq!(w.alpha, None);
        assert_eq!(w.set, Set::Region(Region::empty(2)));
        assert_eq!(w.error, ExtendedRational::zero());
    }

    #[test]
    fn discrete_family_counting() {
        let f = discrete_family(&counting(), 5).unwrap();
        assert_eq!(f.sets.len(), 5);
        for i in 0..5 {
            for j in 0..i {
                let d = dist_sq(&counting(), &Set::Atoms(f.sets[i].clone()), &Set::Atoms(f.sets[j].clone()))
                    .unwrap();
                assert_eq!(d, ExtendedRational::Finite(qi(2)));
            }
        }
        assert!(discrete_family(&geometric(), 3).is_err());
        assert_eq!(discrete_family(&counting(), 1).unwrap().sets.len(), 1);
    }

    #[test]
    fn geometric_nets() {
        let net = build_net(&geometric(), &q(1, 4)).unwrap();
        assert_eq!((net.level, net.cardinality()), (3, 8));
        assert_eq!(build_net(&geometric(), &qi(2)).unwrap().elements, vec![AtomSet::empty()]);
        assert!(matches!(build_net(&counting(), &q(1, 4)), Err(Error::Refused(_))));
        let check = verify_net(&geometric(), &net, 0, 7).unwrap();
        assert!(check.covered && check.exhaustive);
        let mut short = net.clone();
        short.elements.pop();
        let check = verify_net(&geometric(), &short, 0, 7).unwrap();
        assert!(!check.covered);
    }

    #[test]
    fn zero_model_net_is_trivial() {
        let net = build_net(&MeasureModel::zero(), &q(1, 4)).unwrap();
        assert_eq!(net.cardinality(), 1);
        assert!(verify_net(&MeasureModel::zero(), &net, 10, 1).unwrap().covered);
    }
}
