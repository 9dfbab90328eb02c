//! Separability, compactness and local compactness of the measure algebra of a model.
//!
//! Every decided answer carries a rule tag and the instantiated hypothesis. Anything no
//! rule decides stays `Unknown`; absence of a criterion is never turned into a claim.

use std::fmt;

use crate::measure::{atoms_fin, atoms_inf, Cardinality, MeasureModel, ModelKind};
use crate::rational::ExtendedRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
            Answer::Unknown => "UNKNOWN",
        })
    }
}

/// All classes, or only the classes of finite measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    All,
    Finite,
}

impl Space {
    pub fn label(self) -> &'static str {
        match self {
            Space::All => "E_TILDE",
            Space::Finite => "E_TILDE_FIN",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    Separable,
    Compact,
    LocallyCompact,
    Complete,
}

impl Property {
    pub fn label(self) -> &'static str {
        match self {
            Property::Separable => "separable",
            Property::Compact => "compact",
            Property::LocallyCompact => "locally_compact",
            Property::Complete => "complete",
        }
    }
}

/// Rule tags. Each names the fact it applies; `README.md` lists them.
pub mod tags {
    /// The measure algebra is always a complete metric space (closed subsets too).
    pub const COMPLETE: &str = "complete-metric";
    /// Outer-regular Lebesgue-type measure: dyadic unions approximate every finite-measure set.
    pub const DYADIC_APPROXIMATION: &str = "dyadic-approximation";
    /// Finite measure on a countably generated σ-algebra: separable.
    pub const COUNTABLE_GENERATION: &str = "countable-generation";
    /// A summand that is not approximable keeps the sum from being approximable.
    pub const NON_APPROXIMABLE_SUMMAND: &str = "non-approximable-summand";
    /// Non-atomic part of infinite mass: the space of all classes is not separable.
    pub const INFINITE_NONATOMIC_MASS: &str = "infinite-nonatomic-mass";
    /// Any non-atomic part: neither compact nor locally compact.
    pub const NONATOMIC_NOT_LOCALLY_COMPACT: &str = "nonatomic-not-locally-compact";
    /// Purely atomic: all classes separable iff finite-atom mass finite and E_inf finite.
    pub const ATOMIC_SEPARABILITY_ALL: &str = "atomic-separability-all";
    /// Purely atomic: finite-measure classes separable iff E_fin countable.
    pub const ATOMIC_SEPARABILITY_FIN: &str = "atomic-separability-fin";
    /// Purely atomic: all classes compact iff finite-atom mass finite and E_inf finite.
    pub const ATOMIC_COMPACTNESS_ALL: &str = "atomic-compactness-all";
    /// Purely atomic: finite-measure classes compact iff finite-atom mass finite.
    pub const ATOMIC_COMPACTNESS_FIN: &str = "atomic-compactness-fin";
    /// Weights bounded below by delta > 0: balls of squared radius below delta are points.
    pub const ISOLATED_POINTS: &str = "isolated-points";
    /// mu(E) finite: both spaces coincide.
    pub const FINITE_MEASURE_IDENTIFICATION: &str = "finite-measure-identification";
    /// Subspace facts: a subspace of a separable metric space is separable; a closed
    /// subspace of a compact space is compact.
    pub const SUBSPACE: &str = "subspace";
    /// compact implies separable and locally compact; not separable implies not compact.
    pub const CONSISTENCY: &str = "consistency";
    /// No available criterion decides the property.
    pub const NO_CRITERION: &str = "no-criterion";
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Justification {
    pub property: Property,
    pub answer: Answer,
    pub tag: &'static str,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub space: Space,
    pub separable: Answer,
    pub compact: Answer,
    pub locally_compact: Answer,
    pub complete: Answer,
    pub justifications: Vec<Justification>,
}

impl Verdict {
    fn new(space: Space) -> Self {
        Verdict {
            space,
            separable: Answer::Unknown,
            compact: Answer::Unknown,
            locally_compact: Answer::Unknown,
            complete: Answer::Unknown,
            justifications: Vec::new(),
        }
    }

    pub fn get(&self, p: Property) -> Answer {
        match p {
            Property::Separable => self.separable,
            Property::Compact => self.compact,
            Property::LocallyCompact => self.locally_compact,
            Property::Complete => self.complete,
        }
    }

    fn slot(&mut self, p: Property) -> &mut Answer {
        match p {
            Property::Separable => &mut self.separable,
            Property::Compact => &mut self.compact,
            Property::LocallyCompact => &mut self.locally_compact,
            Property::Complete => &mut self.complete,
        }
    }

    /// Records a decided answer unless the property is already decided (first rule wins).
    fn decide(&mut self, p: Property, a: Answer, tag: &'static str, reason: impl Into<String>) -> bool {
        let slot = self.slot(p);
        if *slot != Answer::Unknown {
            debug_assert_eq!(*slot, a, "conflicting rules for {}", p.label());
            return false;
        }
        *slot = a;
        self.justifications.push(Justification { property: p, answer: a, tag, reason: reason.into() });
        true
    }

    /// Consistency rules hold.
    pub fn is_consistent(&self) -> bool {
        !(self.compact == Answer::Yes && self.separable != Answer::Yes)
            && !(self.compact == Answer::Yes && self.locally_compact != Answer::Yes)
            && !(self.separable == Answer::No && self.compact == Answer::Yes)
            && self.complete == Answer::Yes
    }
}

/// Facts about the model the rules read.
struct Facts {
    nonatomic_mass: Option<ExtendedRational>,
    pure_lebesgue: bool,
    atomic: Option<AtomicFacts>,
    total: ExtendedRational,
    outer_regular: bool,
    countably_generated: bool,
}

struct AtomicFacts {
    fin_count: Cardinality,
    fin_mass: ExtendedRational,
    inf_count: u64,
    weight_inf: Option<ExtendedRational>,
}

fn facts(model: &MeasureModel) -> Facts {
    let nonatomic_mass = model.continuous().map(|l| l.total()).filter(|m| !m.is_zero());
    let atomic = model.atoms().filter(|u| !u.is_empty()).map(|u| {
        let inf = atoms_inf(model);
        AtomicFacts {
            fin_count: atoms_fin(model).count,
            fin_mass: atoms_fin(model).mass,
            inf_count: match inf.count {
                Cardinality::Finite(n) => n,
                _ => u64::MAX,
            },
            weight_inf: u.weight_infimum(),
        }
    });
    // A trivial model (no mass anywhere) is the empty atomic universe.
    let atomic = atomic.or_else(|| {
        nonatomic_mass.is_none().then(|| AtomicFacts {
            fin_count: Cardinality::Finite(0),
            fin_mass: ExtendedRational::zero(),
            inf_count: 0,
            weight_inf: None,
        })
    });
    Facts {
        pure_lebesgue: matches!(model.kind, ModelKind::Lebesgue(_)) && nonatomic_mass.is_some(),
        nonatomic_mass,
        atomic,
        total: model.total(),
        outer_regular: model.outer_regular,
        countably_generated: model.countably_generated,
    }
}

fn yes_no(b: bool) -> Answer {
    if b {
        Answer::Yes
    } else {
        Answer::No
    }
}

/// Verdicts for (all classes, finite-measure classes).
pub fn classify(model: &MeasureModel) -> (Verdict, Verdict) {
    use Property::*;
    let f = facts(model);
    let mut all = Verdict::new(Space::All);
    let mut fin = Verdict::new(Space::Finite);

    for v in [&mut all, &mut fin] {
        v.decide(Complete, Answer::Yes, tags::COMPLETE, "measure algebras are complete metric spaces");
    }

    if let Some(mass) = &f.nonatomic_mass {
        for v in [&mut all, &mut fin] {
            let why = format!("non-atomic part of mass {mass} is present");
            v.decide(Compact, Answer::No, tags::NONATOMIC_NOT_LOCALLY_COMPACT, why.clone());
            v.decide(LocallyCompact, Answer::No, tags::NONATOMIC_NOT_LOCALLY_COMPACT, why);
        }
        if mass.is_infinite() {
            all.decide(
                Separable,
                Answer::No,
                tags::INFINITE_NONATOMIC_MASS,
                "non-atomic part has infinite mass",
            );
        }
        if f.pure_lebesgue && f.outer_regular {
            fin.decide(
                Separable,
                Answer::Yes,
                tags::DYADIC_APPROXIMATION,
                "outer-regular Lebesgue measure on R^d: dyadic unions are dense",
            );
        }
    }

    if let Some(a) = &f.atomic {
        let fin_mass_finite = a.fin_mass.is_finite();
        let inf_finite = a.inf_count != u64::MAX;
        let all_ok = fin_mass_finite && inf_finite;
        let mass_why =
            format!("sum of finite atom weights is {}, E_inf has {} atoms", a.fin_mass, a.inf_count);
        let count_why = match a.fin_count {
            Cardinality::Uncountable => "E_fin uncountable".to_string(),
            c => format!("E_fin countable ({c})"),
        };
        let countable = a.fin_count != Cardinality::Uncountable;
        if f.nonatomic_mass.is_none() {
            all.decide(Separable, yes_no(all_ok), tags::ATOMIC_SEPARABILITY_ALL, mass_why.clone());
            all.decide(Compact, yes_no(all_ok), tags::ATOMIC_COMPACTNESS_ALL, mass_why.clone());
            fin.decide(Separable, yes_no(countable), tags::ATOMIC_SEPARABILITY_FIN, count_why);
            fin.decide(
                Compact,
                yes_no(fin_mass_finite),
                tags::ATOMIC_COMPACTNESS_FIN,
                format!("sum of finite atom weights is {}", a.fin_mass),
            );
        } else {
            // Mixture: only the negative direction transfers from the atomic summand.
            if !all_ok {
                all.decide(
                    Separable,
                    Answer::No,
                    tags::NON_APPROXIMABLE_SUMMAND,
                    format!("atomic part is not separable: {mass_why}"),
                );
            }
            if !countable {
                fin.decide(
                    Separable,
                    Answer::No,
                    tags::NON_APPROXIMABLE_SUMMAND,
                    format!("atomic part is not separable: {count_why}"),
                );
            }
        }
    }

    if f.total.is_finite() && f.countably_generated {
        for v in [&mut all, &mut fin] {
            v.decide(
                Separable,
                Answer::Yes,
                tags::COUNTABLE_GENERATION,
                format!("mu(E) = {} is finite and the σ-algebra is countably generated", f.total),
            );
        }
    }

    if f.nonatomic_mass.is_none() {
        let delta = match f.atomic.as_ref().and_then(|a| a.weight_inf.clone()) {
            None => Some(ExtendedRational::Infinity),
            d => d,
        };
        if let Some(d) = delta.filter(|d| !d.is_zero()) {
            for v in [&mut all, &mut fin] {
                v.decide(
                    LocallyCompact,
                    Answer::Yes,
                    tags::ISOLATED_POINTS,
                    format!("purely atomic with weights bounded below by {d}: small balls are single points"),
                );
            }
        }
    }

    propagate(&mut all, &mut fin, &f.total);

    for v in [&mut all, &mut fin] {
        for p in [Separable, Compact, LocallyCompact] {
            if v.get(p) == Answer::Unknown {
                let reason = match p {
                    LocallyCompact => {
                        "local compactness is only decided for non-atomic parts and \
                                       for atoms with weights bounded away from zero"
                    }
                    _ => "no available criterion covers this combination of parts and flags",
                };
                v.justifications.push(Justification {
                    property: p,
                    answer: Answer::Unknown,
                    tag: tags::NO_CRITERION,
                    reason: reason.into(),
                });
            }
        }
    }
    (all, fin)
}

/// Identification for finite measure, subspace facts and consistency rules, to a fixpoint.
fn propagate(all: &mut Verdict, fin: &mut Verdict, total: &ExtendedRational) {
    use Property::*;
    loop {
        let mut changed = false;
        if total.is_finite() {
            for p in [Separable, Compact, LocallyCompact] {
                let (a, b) = (all.get(p), fin.get(p));
                let why = format!("mu(E) = {total} is finite, so both spaces coincide");
                if a != Answer::Unknown {
                    changed |= fin.decide(p, a, tags::FINITE_MEASURE_IDENTIFICATION, why);
                } else if b != Answer::Unknown {
                    changed |= all.decide(p, b, tags::FINITE_MEASURE_IDENTIFICATION, why);
                }
            }
        }
        if fin.separable == Answer::No {
            changed |= all.decide(Separable, Answer::No, tags::SUBSPACE, "contains a non-separable subspace");
        }
        if all.separable == Answer::Yes {
            changed |= fin.decide(Separable, Answer::Yes, tags::SUBSPACE, "subspace of a separable space");
        }
        if all.compact == Answer::Yes {
            changed |= fin.decide(Compact, Answer::Yes, tags::SUBSPACE, "closed subspace of a compact space");
        }
        if fin.compact == Answer::No {
            changed |=
                all.decide(Compact, Answer::No, tags::SUBSPACE, "contains a non-compact closed subspace");
        }
        for v in [&mut *all, &mut *fin] {
            if v.compact == Answer::Yes {
                changed |= v.decide(
                    Separable,
                    Answer::Yes,
                    tags::CONSISTENCY,
                    "compact metric spaces are separable",
                );
                changed |= v.decide(
                    LocallyCompact,
                    Answer::Yes,
                    tags::CONSISTENCY,
                    "compact spaces are locally compact",
                );
            }
            if v.separable == Answer::No {
                changed |=
                    v.decide(Compact, Answer::No, tags::CONSISTENCY, "not separable, hence not compact");
            }
        }
        if !changed {
            return;
        }
    }
}

/// One line per property: answer, rule tag, instantiated hypothesis.
pub fn justify(v: &Verdict) -> String {
    let mut out = String::new();
    for j in &v.justifications {
        out.push_str(&format!(
            "{} {}: {} [{}] {}\n",
            v.space.label(),
            j.property.label(),
            j.answer,
            j.tag,
            j.reason
        ));
    }
    out
}
