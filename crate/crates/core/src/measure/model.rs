use crate::error::{Error, Result};
use crate::rational::{ExtendedRational, Q};
use crate::set_algebra::{intersection_measure, AxisBox, Region};

use super::atoms::{AtomId, AtomSet, AtomUniverse, Cardinality};

/// Lebesgue measure on `R^dim`, optionally restricted to a bounded window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lebesgue {
    pub dim: usize,
    pub window: Option<AxisBox>,
}

impl Lebesgue {
    pub fn new(dim: usize, window: Option<AxisBox>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        if let Some(w) = &window {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: w.dim() });
            }
        }
        Ok(Lebesgue { dim, window })
    }

    pub fn total(&self) -> ExtendedRational {
        match &self.window {
            Some(w) => w.measure().into(),
            None => ExtendedRational::Infinity,
        }
    }

    /// `lambda(r ∩ window)`.
    pub fn measure(&self, r: &Region) -> Result<Q> {
        if r.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: r.dim() });
        }
        match &self.window {
            None => Ok(r.measure()),
            Some(w) => Ok(r.clip(w).measure()),
        }
    }

    pub fn intersection(&self, a: &Region, b: &Region) -> Result<Q> {
        match &self.window {
            None => intersection_measure(a, b),
            Some(w) => intersection_measure(&a.clip(w), &b.clip(w)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Lebesgue(Lebesgue),
    Atomic(AtomUniverse),
    /// Disjoint sum of a continuous and an atomic part, evaluated on pair-typed sets.
    Mixture {
        continuous: Lebesgue,
        atomic: AtomUniverse,
    },
    /// The zero measure; the neutral part returned by [`decompose`].
    Zero,
}

/// A finitely presented measure space together with the hypotheses the classifier relies on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureModel {
    pub kind: ModelKind,
    pub outer_regular: bool,
    pub countably_generated: bool,
}

impl MeasureModel {
    /// Built-in defaults: outer regular; countably generated unless an uncountable
    /// atomic universe is present.
    pub fn new(kind: ModelKind) -> Self {
        let countably_generated = match &kind {
            ModelKind::Atomic(u) | ModelKind::Mixture { atomic: u, .. } => u.is_countable(),
            _ => true,
        };
        MeasureModel { kind, outer_regular: true, countably_generated }
    }

    pub fn lebesgue(dim: usize, window: Option<AxisBox>) -> Result<Self> {
        Ok(MeasureModel::new(ModelKind::Lebesgue(Lebesgue::new(dim, window)?)))
    }

    pub fn atomic(universe: AtomUniverse) -> Self {
        MeasureModel::new(ModelKind::Atomic(universe))
    }

    pub fn mixture(continuous: Lebesgue, atomic: AtomUniverse) -> Self {
        MeasureModel::new(ModelKind::Mixture { continuous, atomic })
    }

    pub fn zero() -> Self {
        MeasureModel::new(ModelKind::Zero)
    }

    pub fn continuous(&self) -> Option<&Lebesgue> {
        match &self.kind {
            ModelKind::Lebesgue(l) | ModelKind::Mixture { continuous: l, .. } => Some(l),
            _ => None,
        }
    }

    pub fn atoms(&self) -> Option<&AtomUniverse> {
        match &self.kind {
            ModelKind::Atomic(u) | ModelKind::Mixture { atomic: u, .. } => Some(u),
            _ => None,
        }
    }

    /// `mu(E)`.
    pub fn total(&self) -> ExtendedRational {
        let cont = self.continuous().map(Lebesgue::total).unwrap_or_default();
        let atoms = self.atoms().map(AtomUniverse::total_mass).unwrap_or_default();
        cont + atoms
    }

    /// Splits a set into its continuous and atomic components as seen by this model.
    /// Pairs project onto whichever parts the model has; a bare region or atom set must
    /// match a part the model actually has.
    pub(crate) fn split<'a>(&self, set: &'a Set) -> Result<(Option<&'a Region>, Option<&'a AtomSet>)> {
        let has_cont = self.continuous().is_some();
        let has_atoms = self.atoms().is_some();
        match set {
            Set::Pair(r, a) => Ok((has_cont.then_some(r), has_atoms.then_some(a))),
            Set::Region(r) if has_cont => Ok((Some(r), None)),
            Set::Atoms(a) if has_atoms => Ok((None, Some(a))),
            _ if matches!(self.kind, ModelKind::Zero) => Ok((None, None)),
            Set::Region(_) => {
                Err(Error::FamilyMismatch("a region is not measurable in a purely atomic model".into()))
            }
            Set::Atoms(_) => {
                Err(Error::FamilyMismatch("an atom set is not measurable in a model without atoms".into()))
            }
        }
    }

    pub fn validate(&self, set: &Set) -> Result<()> {
        let (r, a) = self.split(set)?;
        if let (Some(r), Some(l)) = (r, self.continuous()) {
            if r.dim() != l.dim {
                return Err(Error::DimensionMismatch { expected: l.dim, got: r.dim() });
            }
        }
        if let (Some(a), Some(u)) = (a, self.atoms()) {
            u.validate(a)?;
        }
        Ok(())
    }
}

/// A representable measurable set: a region, an atom set, or a pair of both for mixtures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Set {
    Region(Region),
    Atoms(AtomSet),
    Pair(Region, AtomSet),
}

impl Set {
    pub fn region(&self) -> Option<&Region> {
        match self {
            Set::Region(r) | Set::Pair(r, _) => Some(r),
            Set::Atoms(_) => None,
        }
    }

    pub fn atoms(&self) -> Option<&AtomSet> {
        match self {
            Set::Atoms(a) | Set::Pair(_, a) => Some(a),
            Set::Region(_) => None,
        }
    }

    /// The empty set shaped for `model`.
    pub fn empty_for(model: &MeasureModel) -> Set {
        match (model.continuous(), model.atoms()) {
            (Some(l), Some(_)) => Set::Pair(Region::empty(l.dim), AtomSet::empty()),
            (Some(l), None) => Set::Region(Region::empty(l.dim)),
            (None, _) => Set::Atoms(AtomSet::empty()),
        }
    }
}

/// `mu(set)`, exact.
pub fn mu(model: &MeasureModel, set: &Set) -> Result<ExtendedRational> {
    model.validate(set)?;
    let (r, a) = model.split(set)?;
    let mut total = ExtendedRational::zero();
    if let (Some(r), Some(l)) = (r, model.continuous()) {
        total = total + l.measure(r)?.into();
    }
    if let (Some(a), Some(u)) = (a, model.atoms()) {
        total = total + u.mass(a)?;
    }
    Ok(total)
}

/// Symbolic description of an atom class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomSummary {
    pub count: Cardinality,
    pub mass: ExtendedRational,
    /// Members, when the class is an explicit finite list.
    pub members: Vec<AtomId>,
}

/// `E_fin`: atoms of finite positive mass.
pub fn atoms_fin(model: &MeasureModel) -> AtomSummary {
    match model.atoms() {
        None => {
            AtomSummary { count: Cardinality::Finite(0), mass: ExtendedRational::zero(), members: Vec::new() }
        }
        Some(u) => {
            let count = u.finite_count();
            let members = match count {
                Cardinality::Finite(n) => u.first_finite_atoms(n),
                _ => Vec::new(),
            };
            AtomSummary { count, mass: u.finite_mass(), members }
        }
    }
}

/// `E_inf`: atoms of infinite mass. Only explicit atoms can carry infinite weight.
pub fn atoms_inf(model: &MeasureModel) -> AtomSummary {
    let members = model.atoms().map(AtomUniverse::infinite_atoms).unwrap_or_default();
    AtomSummary {
        count: Cardinality::Finite(members.len() as u64),
        mass: if members.is_empty() { ExtendedRational::zero() } else { ExtendedRational::Infinity },
        members,
    }
}

/// Splits into `(atomic, non-atomic)` parts; `mu = mu_atomic + mu_nonatomic` on every
/// representable set. Flags are inherited by both parts.
pub fn decompose(model: &MeasureModel) -> (MeasureModel, MeasureModel) {
    let with_flags = |kind| MeasureModel {
        kind,
        outer_regular: model.outer_regular,
        countably_generated: model.countably_generated,
    };
    match &model.kind {
        ModelKind::Lebesgue(l) => (with_flags(ModelKind::Zero), with_flags(ModelKind::Lebesgue(l.clone()))),
        ModelKind::Atomic(u) => (with_flags(ModelKind::Atomic(u.clone())), with_flags(ModelKind::Zero)),
        ModelKind::Mixture { continuous, atomic } => (
            with_flags(ModelKind::Atomic(atomic.clone())),
            with_flags(ModelKind::Lebesgue(continuous.clone())),
        ),
        ModelKind::Zero => (with_flags(ModelKind::Zero), with_flags(ModelKind::Zero)),
    }
}
