use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rational::{ExtSum, ExtendedRational, Q};

/// Identifies one atom. Explicit atoms carry their declared name; atoms of a countable tail
/// are addressed by index and rendered as `prefix + index`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomId {
    Name(String),
    Index(u64),
}

/// Closed-form description of the atoms that follow the explicit list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail {
    None,
    /// Atom `k >= first_index` has weight `weight * ratio^(k - first_index)`.
    Geometric {
        first_index: u64,
        weight: Q,
        ratio: Q,
    },
    /// Countably many atoms `k >= first_index`, each of weight `weight`.
    Constant {
        first_index: u64,
        weight: Q,
    },
    /// Uncountably many atoms, each of weight `weight`; any non-explicit name denotes one.
    UncountableConstant {
        weight: Q,
    },
}

/// Largest tail offset for which an individual geometric weight is materialized.
const MAX_TAIL_OFFSET: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cardinality {
    Finite(u64),
    CountablyInfinite,
    Uncountable,
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Finite(n) => write!(f, "{n}"),
            Cardinality::CountablyInfinite => f.write_str("countably infinite"),
            Cardinality::Uncountable => f.write_str("uncountable"),
        }
    }
}

/// Atoms with strictly positive weights: an explicit prefix plus a symbolic tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomUniverse {
    explicit: Vec<(String, ExtendedRational)>,
    tail: Tail,
    prefix: String,
}

impl AtomUniverse {
    pub fn new(explicit: Vec<(String, ExtendedRational)>, tail: Tail, prefix: String) -> Result<Self> {
        let mut seen = HashSet::new();
        for (name, w) in &explicit {
            if !seen.insert(name.as_str()) {
                return Err(Error::Invalid(format!("duplicate atom id {name:?}")));
            }
            if w.is_zero() {
                return Err(Error::Invalid(format!(
                    "atom {name:?} has zero weight; weights must be strictly positive"
                )));
            }
        }
        match &tail {
            Tail::None => {}
            Tail::Geometric { first_index, weight, ratio } => {
                check_positive("geometric tail weight", weight)?;
                if !ratio.is_positive() || ratio >= &Q::one() {
                    return Err(Error::Invalid(format!(
                        "geometric ratio {ratio} must lie strictly between 0 and 1"
                    )));
                }
                check_first_index(*first_index)?;
            }
            Tail::Constant { first_index, weight } => {
                check_positive("constant tail weight", weight)?;
                check_first_index(*first_index)?;
            }
            Tail::UncountableConstant { weight } => {
                check_positive("uncountable tail weight", weight)?;
            }
        }
        let universe = AtomUniverse { explicit, tail, prefix };
        if universe.has_indexed_tail() {
            for (name, _) in &universe.explicit {
                if universe.tail_index_of(name).is_some() {
                    return Err(Error::Invalid(format!("explicit atom {name:?} collides with a tail index")));
                }
            }
        }
        Ok(universe)
    }

    pub fn finite(explicit: Vec<(String, ExtendedRational)>) -> Result<Self> {
        AtomUniverse::new(explicit, Tail::None, String::new())
    }

    pub fn empty() -> Self {
        AtomUniverse { explicit: Vec::new(), tail: Tail::None, prefix: String::new() }
    }

    pub fn explicit(&self) -> &[(String, ExtendedRational)] {
        &self.explicit
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn is_empty(&self) -> bool {
        self.explicit.is_empty() && self.tail == Tail::None
    }

    fn has_indexed_tail(&self) -> bool {
        matches!(self.tail, Tail::Geometric { .. } | Tail::Constant { .. })
    }

    pub fn is_countable(&self) -> bool {
        !matches!(self.tail, Tail::UncountableConstant { .. })
    }

    fn first_tail_index(&self) -> Option<u64> {
        match self.tail {
            Tail::Geometric { first_index, .. } | Tail::Constant { first_index, .. } => Some(first_index),
            _ => None,
        }
    }

    fn tail_index_of(&self, s: &str) -> Option<u64> {
        let first = self.first_tail_index()?;
        let digits = s.strip_prefix(self.prefix.as_str())?;
        if digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || (digits.len() > 1 && digits.starts_with('0'))
        {
            return None;
        }
        let k: u64 = digits.parse().ok()?;
        (k >= first).then_some(k)
    }

    /// Resolves a wire-format id against this universe.
    pub fn parse_id(&self, s: &str) -> Result<AtomId> {
        if self.explicit.iter().any(|(name, _)| name == s) {
            return Ok(AtomId::Name(s.to_string()));
        }
        if let Some(k) = self.tail_index_of(s) {
            return Ok(AtomId::Index(k));
        }
        if matches!(self.tail, Tail::UncountableConstant { .. }) && !s.is_empty() {
            return Ok(AtomId::Name(s.to_string()));
        }
        Err(Error::UnknownAtom(s.to_string()))
    }

    pub fn format_id(&self, id: &AtomId) -> String {
        match id {
            AtomId::Name(s) => s.clone(),
            AtomId::Index(k) => format!("{}{k}", self.prefix),
        }
    }

    pub fn contains(&self, id: &AtomId) -> bool {
        match id {
            AtomId::Name(s) => {
                self.explicit.iter().any(|(name, _)| name == s)
                    || matches!(self.tail, Tail::UncountableConstant { .. })
            }
            AtomId::Index(k) => self.first_tail_index().is_some_and(|first| *k >= first),
        }
    }

    pub fn weight(&self, id: &AtomId) -> Result<ExtendedRational> {
        match id {
            AtomId::Name(s) => {
                if let Some((_, w)) = self.explicit.iter().find(|(name, _)| name == s) {
                    return Ok(w.clone());
                }
                match &self.tail {
                    Tail::UncountableConstant { weight } => Ok(weight.clone().into()),
                    _ => Err(Error::UnknownAtom(s.clone())),
                }
            }
            AtomId::Index(k) => match &self.tail {
                Tail::Geometric { first_index, weight, ratio } if k >= first_index => {
                    let offset = k - first_index;
                    if offset > MAX_TAIL_OFFSET {
                        return Err(Error::TooLarge(format!(
                            "geometric tail atom {k} is beyond offset {MAX_TAIL_OFFSET}"
                        )));
                    }
                    Ok((weight * num_traits::pow(ratio.clone(), offset as usize)).into())
                }
                Tail::Constant { first_index, weight } if k >= first_index => Ok(weight.clone().into()),
                _ => Err(Error::UnknownAtom(self.format_id(id))),
            },
        }
    }

    /// Total weight of tail atoms with index `>= from` (clamped to the first tail index).
    pub fn tail_mass_from(&self, from: u64) -> ExtendedRational {
        match &self.tail {
            Tail::None => ExtendedRational::zero(),
            Tail::Geometric { first_index, weight, ratio } => {
                let offset = from.saturating_sub(*first_index);
                let start = weight * num_traits::pow(ratio.clone(), offset as usize);
                (start / (Q::one() - ratio)).into()
            }
            Tail::Constant { .. } | Tail::UncountableConstant { .. } => ExtendedRational::Infinity,
        }
    }

    /// Explicit atoms of infinite weight, in declaration order.
    pub fn infinite_atoms(&self) -> Vec<AtomId> {
        self.explicit
            .iter()
            .filter(|(_, w)| w.is_infinite())
            .map(|(name, _)| AtomId::Name(name.clone()))
            .collect()
    }

    /// The `k`-th atom of finite weight (0-based): explicit finite atoms in declaration
    /// order, then the tail by increasing index. `None` past the end or for uncountable tails.
    pub fn finite_atom(&self, k: u64) -> Option<AtomId> {
        let explicit: Vec<&String> =
            self.explicit.iter().filter(|(_, w)| w.is_finite()).map(|(name, _)| name).collect();
        if (k as usize) < explicit.len() {
            return Some(AtomId::Name(explicit[k as usize].clone()));
        }
        let rest = k - explicit.len() as u64;
        self.first_tail_index().map(|first| AtomId::Index(first + rest))
    }

    pub fn first_finite_atoms(&self, n: u64) -> Vec<AtomId> {
        (0..n).map_while(|k| self.finite_atom(k)).collect()
    }

    pub fn finite_count(&self) -> Cardinality {
        let explicit = self.explicit.iter().filter(|(_, w)| w.is_finite()).count() as u64;
        match self.tail {
            Tail::None => Cardinality::Finite(explicit),
            Tail::Geometric { .. } | Tail::Constant { .. } => Cardinality::CountablyInfinite,
            Tail::UncountableConstant { .. } => Cardinality::Uncountable,
        }
    }

    /// `sum over E_fin of mu({x})`.
    pub fn finite_mass(&self) -> ExtendedRational {
        let mut sum = ExtSum::default();
        for (_, w) in &self.explicit {
            if w.is_finite() {
                sum.add(w);
            }
        }
        if let Some(first) = self.first_tail_index() {
            sum.add(&self.tail_mass_from(first));
        } else if let Tail::UncountableConstant { .. } = self.tail {
            sum.add(&ExtendedRational::Infinity);
        }
        sum.value()
    }

    /// Infimum of all weights, or `None` for an empty universe.
    pub fn weight_infimum(&self) -> Option<ExtendedRational> {
        let tail = match &self.tail {
            Tail::None => None,
            Tail::Geometric { .. } => Some(ExtendedRational::zero()),
            Tail::Constant { weight, .. } | Tail::UncountableConstant { weight } => {
                Some(weight.clone().into())
            }
        };
        self.explicit.iter().map(|(_, w)| w.clone()).chain(tail).min()
    }

    pub fn total_mass(&self) -> ExtendedRational {
        if !self.is_countable() {
            return ExtendedRational::Infinity;
        }
        self.mass(&AtomSet::all()).expect("the full set of a countable universe is valid")
    }

    /// Checks membership of every referenced id.
    pub fn validate(&self, set: &AtomSet) -> Result<()> {
        if set.is_cofinite() && !self.is_countable() {
            return Err(Error::FamilyMismatch("cofinite atom sets need a countable universe".into()));
        }
        for id in set.ids() {
            if !self.contains(id) {
                return Err(Error::UnknownAtom(self.format_id(id)));
            }
        }
        Ok(())
    }

    /// `mu(set)`, exact; infinite for cofinite sets of divergent mass.
    pub fn mass(&self, set: &AtomSet) -> Result<ExtendedRational> {
        self.validate(set)?;
        let mut sum = ExtSum::default();
        match set {
            AtomSet::Finite(ids) => {
                for id in ids {
                    sum.add(&self.weight(id)?);
                }
            }
            AtomSet::Cofinite(excluded) => {
                for (name, w) in &self.explicit {
                    if !excluded.contains(&AtomId::Name(name.clone())) {
                        sum.add(w);
                    }
                }
                match &self.tail {
                    Tail::None => {}
                    Tail::Constant { .. } | Tail::UncountableConstant { .. } => {
                        sum.add(&ExtendedRational::Infinity)
                    }
                    Tail::Geometric { first_index, .. } => {
                        sum.add(&self.tail_mass_from(*first_index));
                        for id in excluded {
                            if matches!(id, AtomId::Index(_)) {
                                sum.sub(&self.weight(id)?);
                            }
                        }
                    }
                }
            }
        }
        Ok(sum.value())
    }
}

fn check_positive(what: &str, w: &Q) -> Result<()> {
    if !w.is_positive() {
        return Err(Error::Invalid(format!("{what} must be positive, got {w}")));
    }
    Ok(())
}

fn check_first_index(first: u64) -> Result<()> {
    if first == 0 {
        return Err(Error::Invalid("tail indices start at 1 or later".into()));
    }
    Ok(())
}

/// A finite set of atoms, or the complement of one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AtomSet {
    Finite(BTreeSet<AtomId>),
    Cofinite(BTreeSet<AtomId>),
}

impl AtomSet {
    pub fn empty() -> Self {
        AtomSet::Finite(BTreeSet::new())
    }

    pub fn all() -> Self {
        AtomSet::Cofinite(BTreeSet::new())
    }

    pub fn of<I: IntoIterator<Item = AtomId>>(ids: I) -> Self {
        AtomSet::Finite(ids.into_iter().collect())
    }

    pub fn singleton(id: AtomId) -> Self {
        AtomSet::of([id])
    }

    pub fn is_cofinite(&self) -> bool {
        matches!(self, AtomSet::Cofinite(_))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, AtomSet::Finite(ids) if ids.is_empty())
    }

    /// Listed ids: members for a finite set, exclusions for a cofinite one.
    pub fn ids(&self) -> &BTreeSet<AtomId> {
        match self {
            AtomSet::Finite(ids) | AtomSet::Cofinite(ids) => ids,
        }
    }

    pub fn contains(&self, id: &AtomId) -> bool {
        match self {
            AtomSet::Finite(ids) => ids.contains(id),
            AtomSet::Cofinite(ids) => !ids.contains(id),
        }
    }

    pub fn complement(&self) -> AtomSet {
        match self {
            AtomSet::Finite(ids) => AtomSet::Cofinite(ids.clone()),
            AtomSet::Cofinite(ids) => AtomSet::Finite(ids.clone()),
        }
    }

    pub fn intersection(&self, other: &AtomSet) -> AtomSet {
        use AtomSet::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a.intersection(b).cloned().collect()),
            (Finite(a), Cofinite(x)) | (Cofinite(x), Finite(a)) => Finite(a.difference(x).cloned().collect()),
            (Cofinite(x), Cofinite(y)) => Cofinite(x.union(y).cloned().collect()),
        }
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        self.complement().intersection(&other.complement()).complement()
    }

    pub fn difference(&self, other: &AtomSet) -> AtomSet {
        self.intersection(&other.complement())
    }

    /// Membership in exactly one operand: cofinite iff exactly one operand is.
    pub fn symmetric_difference(&self, other: &AtomSet) -> AtomSet {
        let ids = self.ids().symmetric_difference(other.ids()).cloned().collect();
        if self.is_cofinite() != other.is_cofinite() {
            AtomSet::Cofinite(ids)
        } else {
            AtomSet::Finite(ids)
        }
    }
}
