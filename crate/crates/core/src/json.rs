//! Wire format. Rationals travel as canonical `"p/q"` strings, infinity as `"inf"`; output
//! objects are `serde_json::Value`s whose maps keep keys sorted, so serialization is
//! byte-stable.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classify::{Justification, Verdict};
use crate::error::{Error, Result};
use crate::filtration::{
    standard_filtration, ApproxReport, Approximation, Cell, Partition, ProbeOutcome, ProbeReport,
};
use crate::measure::{AtomSet, AtomUniverse, Lebesgue, MeasureModel, ModelKind, Set, Tail};
use crate::oracle::{ExhaustiveBest, JordanBounds};
use crate::rational::{format_q, parse_q, sqrt_decimal, ExtendedRational, Q};
use crate::set_algebra::{AxisBox, Primitive, Region, SlopeTriangle};
use crate::witness::{AlphaWitness, DiscreteFamily, EpsNet, NetCheck, WitnessReport};

pub type Interval = [String; 2];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveJson {
    Box {
        intervals: Vec<Interval>,
    },
    Triangle {
        #[serde(rename = "box")]
        bbox: Vec<Interval>,
        offset: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionJson {
    pub dim: usize,
    pub primitives: Vec<PrimitiveJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AtomSetJson {
    Finite(Vec<String>),
    Cofinite(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<AtomSetJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitAtomJson {
    pub name: String,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailJson {
    Geometric { first_index: u64, weight: String, ratio: String },
    Constant { first_index: u64, weight: String },
    Uncountable { weight: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseJson {
    #[serde(default)]
    pub explicit: Vec<ExplicitAtomJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailJson>,
    #[serde(default)]
    pub prefix: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindJson {
    Lebesgue,
    Atomic,
    Mixture,
    Zero,
}

/// `dim`/`window` describe the continuous part (lebesgue, mixture); `atoms` the atomic part
/// (atomic, mixture).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub kind: KindJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<Interval>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<UniverseJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_regular: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub countably_generated: Option<bool>,
    /// Free-form description, ignored by every operation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CellJson {
    Set(SetJson),
    Outside { hole: Vec<Interval> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionJson {
    Standard {
        level: u32,
    },
    Explicit {
        cells: Vec<CellJson>,
        #[serde(default)]
        level: Option<u32>,
    },
}

fn q_str(x: &Q) -> String {
    format_q(x)
}

pub fn ext_str(x: &ExtendedRational) -> String {
    x.to_string()
}

fn parse_ext(s: &str) -> Result<ExtendedRational> {
    s.parse()
}

fn box_from(intervals: &[Interval]) -> Result<AxisBox> {
    AxisBox::new(intervals.iter().map(|[a, b]| Ok((parse_q(a)?, parse_q(b)?))).collect::<Result<_>>()?)
}

fn box_to(b: &AxisBox) -> Vec<Interval> {
    b.intervals().map(|(a, c)| [q_str(a), q_str(c)]).collect()
}

impl RegionJson {
    pub fn decode(&self) -> Result<Region> {
        let prims = self
            .primitives
            .iter()
            .map(|p| match p {
                PrimitiveJson::Box { intervals } => Ok(Primitive::Box(box_from(intervals)?)),
                PrimitiveJson::Triangle { bbox, offset } => {
                    Ok(Primitive::Triangle(SlopeTriangle::new(box_from(bbox)?, parse_q(offset)?)?))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Region::new(self.dim, prims)
    }

    pub fn encode(r: &Region) -> Self {
        RegionJson {
            dim: r.dim(),
            primitives: r
                .primitives()
                .iter()
                .map(|p| match p {
                    Primitive::Box(b) => PrimitiveJson::Box { intervals: box_to(b) },
                    Primitive::Triangle(t) => {
                        PrimitiveJson::Triangle { bbox: box_to(t.bbox()), offset: q_str(t.offset()) }
                    }
                })
                .collect(),
        }
    }
}

impl AtomSetJson {
    /// Ids resolve against the model's universe.
    pub fn decode(&self, u: &AtomUniverse) -> Result<AtomSet> {
        let ids = |xs: &[String]| xs.iter().map(|s| u.parse_id(s)).collect::<Result<Vec<_>>>();
        let set = match self {
            AtomSetJson::Finite(xs) => AtomSet::of(ids(xs)?),
            AtomSetJson::Cofinite(xs) => AtomSet::of(ids(xs)?).complement(),
        };
        u.validate(&set)?;
        Ok(set)
    }

    pub fn encode(a: &AtomSet, u: &AtomUniverse) -> Self {
        let ids = a.ids().iter().map(|id| u.format_id(id)).collect();
        if a.is_cofinite() {
            AtomSetJson::Cofinite(ids)
        } else {
            AtomSetJson::Finite(ids)
        }
    }
}

impl SetJson {
    pub fn decode(&self, model: &MeasureModel) -> Result<Set> {
        let atoms = |a: &AtomSetJson| {
            let u = model.atoms().ok_or_else(|| Error::FamilyMismatch("model has no atoms".into()))?;
            a.decode(u)
        };
        let set = match (&self.region, &self.atoms) {
            (Some(r), None) => Set::Region(r.decode()?),
            (None, Some(a)) => Set::Atoms(match model.atoms() {
                Some(_) => atoms(a)?,
                None => decode_unresolved(a)?,
            }),
            (Some(r), Some(a)) => Set::Pair(r.decode()?, atoms(a)?),
            (None, None) => Set::empty_for(model),
        };
        model.validate(&set)?;
        Ok(set)
    }

    pub fn encode(s: &Set, model: &MeasureModel) -> Self {
        let empty = AtomUniverse::empty();
        let u = model.atoms().unwrap_or(&empty);
        SetJson {
            region: s.region().map(RegionJson::encode),
            atoms: s.atoms().map(|a| AtomSetJson::encode(a, u)),
        }
    }
}

/// Atom sets for models without atoms (only the zero model accepts them): ids are kept as
/// names.
fn decode_unresolved(a: &AtomSetJson) -> Result<AtomSet> {
    let ids = |xs: &[String]| xs.iter().map(|s| crate::measure::AtomId::Name(s.clone())).collect::<Vec<_>>();
    Ok(match a {
        AtomSetJson::Finite(xs) => AtomSet::of(ids(xs)),
        AtomSetJson::Cofinite(xs) => AtomSet::of(ids(xs)).complement(),
    })
}

impl UniverseJson {
    pub fn decode(&self) -> Result<AtomUniverse> {
        let explicit = self
            .explicit
            .iter()
            .map(|a| Ok((a.name.clone(), parse_ext(&a.weight)?)))
            .collect::<Result<Vec<_>>>()?;
        let tail = match &self.tail {
            None => Tail::None,
            Some(TailJson::Geometric { first_index, weight, ratio }) => Tail::Geometric {
                first_index: *first_index,
                weight: parse_q(weight)?,
                ratio: parse_q(ratio)?,
            },
            Some(TailJson::Constant { first_index, weight }) => {
                Tail::Constant { first_index: *first_index, weight: parse_q(weight)? }
            }
            Some(TailJson::Uncountable { weight }) => Tail::UncountableConstant { weight: parse_q(weight)? },
        };
        AtomUniverse::new(explicit, tail, self.prefix.clone())
    }

    pub fn encode(u: &AtomUniverse) -> Self {
        UniverseJson {
            explicit: u
                .explicit()
                .iter()
                .map(|(n, w)| ExplicitAtomJson { name: n.clone(), weight: ext_str(w) })
                .collect(),
            tail: match u.tail() {
                Tail::None => None,
                Tail::Geometric { first_index, weight, ratio } => Some(TailJson::Geometric {
                    first_index: *first_index,
                    weight: q_str(weight),
                    ratio: q_str(ratio),
                }),
                Tail::Constant { first_index, weight } => {
                    Some(TailJson::Constant { first_index: *first_index, weight: q_str(weight) })
                }
                Tail::UncountableConstant { weight } => Some(TailJson::Uncountable { weight: q_str(weight) }),
            },
            prefix: u.prefix().to_string(),
        }
    }
}

impl ModelJson {
    pub fn decode(&self) -> Result<MeasureModel> {
        let continuous = || -> Result<Lebesgue> {
            let dim = self.dim.ok_or_else(|| Error::Invalid(format!("{:?} models need `dim`", self.kind)))?;
            Lebesgue::new(dim, self.window.as_deref().map(box_from).transpose()?)
        };
        let atomic = || -> Result<AtomUniverse> {
            self.atoms
                .as_ref()
                .ok_or_else(|| Error::Invalid(format!("{:?} models need `atoms`", self.kind)))?
                .decode()
        };
        let stray = |what: &str, present: bool| {
            if present {
                Err(Error::Invalid(format!("{:?} models take no `{what}`", self.kind)))
            } else {
                Ok(())
            }
        };
        let kind = match self.kind {
            KindJson::Lebesgue => {
                stray("atoms", self.atoms.is_some())?;
                ModelKind::Lebesgue(continuous()?)
            }
            KindJson::Atomic => {
                stray("dim", self.dim.is_some())?;
                stray("window", self.window.is_some())?;
                ModelKind::Atomic(atomic()?)
            }
            KindJson::Mixture => ModelKind::Mixture { continuous: continuous()?, atomic: atomic()? },
            KindJson::Zero => {
                stray("dim", self.dim.is_some())?;
                stray("window", self.window.is_some())?;
                stray("atoms", self.atoms.is_some())?;
                ModelKind::Zero
            }
        };
        let mut m = MeasureModel::new(kind);
        if let Some(b) = self.outer_regular {
            m.outer_regular = b;
        }
        if let Some(b) = self.countably_generated {
            m.countably_generated = b;
        }
        Ok(m)
    }

    pub fn encode(m: &MeasureModel) -> Self {
        let (kind, l, u) = match &m.kind {
            ModelKind::Lebesgue(l) => (KindJson::Lebesgue, Some(l), None),
            ModelKind::Atomic(u) => (KindJson::Atomic, None, Some(u)),
            ModelKind::Mixture { continuous, atomic } => (KindJson::Mixture, Some(continuous), Some(atomic)),
            ModelKind::Zero => (KindJson::Zero, None, None),
        };
        ModelJson {
            kind,
            dim: l.map(|l| l.dim),
            window: l.and_then(|l| l.window.as_ref().map(box_to)),
            atoms: u.map(UniverseJson::encode),
            outer_regular: Some(m.outer_regular),
            countably_generated: Some(m.countably_generated),
            label: None,
        }
    }
}

impl PartitionJson {
    pub fn decode(&self, model: &MeasureModel) -> Result<Partition> {
        match self {
            PartitionJson::Standard { level } => standard_filtration(model, *level),
            PartitionJson::Explicit { cells, level } => {
                let cells = cells
                    .iter()
                    .map(|c| match c {
                        CellJson::Set(s) => Ok(Cell::Set(s.decode(model)?)),
                        CellJson::Outside { hole } => Ok(Cell::Outside { hole: box_from(hole)? }),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Partition::explicit(model, cells, *level)
            }
        }
    }
}

pub fn cell_json(c: &Cell, model: &MeasureModel) -> CellJson {
    match c {
        Cell::Set(s) => CellJson::Set(SetJson::encode(s, model)),
        Cell::Outside { hole } => CellJson::Outside { hole: box_to(hole) },
    }
}

/// Parses JSON text into `T`, mapping failures to [`Error::Parse`].
pub fn from_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("wire types always serialize")
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

/// `{"exact": "p/q", "distance": "d.ddd…"}` for a squared distance (distance as a labeled
/// display string only).
pub fn dist_value(d: &ExtendedRational) -> Value {
    match d {
        ExtendedRational::Finite(x) => json!({"dist_sq": q_str(x), "distance_display": sqrt_decimal(x, 12)}),
        ExtendedRational::Infinity => json!({"dist_sq": "inf", "distance_display": "inf"}),
    }
}

fn justification(j: &Justification) -> Value {
    json!({
        "property": j.property.label(),
        "answer": j.answer.to_string(),
        "tag": j.tag,
        "reason": j.reason,
    })
}

pub fn verdict(v: &Verdict) -> Value {
    json!({
        "space": v.space.label(),
        "separable": v.separable.to_string(),
        "compact": v.compact.to_string(),
        "locally_compact": v.locally_compact.to_string(),
        "complete": v.complete.to_string(),
        "justifications": v.justifications.iter().map(justification).collect::<Vec<_>>(),
    })
}

pub fn set(s: &Set, model: &MeasureModel) -> Value {
    to_value(&SetJson::encode(s, model))
}

pub fn region(r: &Region) -> Value {
    to_value(&RegionJson::encode(r))
}

pub fn approximation(a: &Approximation, model: &MeasureModel) -> Value {
    json!({"approximant": set(&a.approximant, model), "error": ext_str(&a.error)})
}

pub fn approx_report(r: &ApproxReport, model: &MeasureModel) -> Value {
    json!({
        "target": set(&r.target, model),
        "eps_sq": q_str(&r.eps_sq),
        "level": r.level,
        "approximant": set(&r.approximant, model),
        "error": ext_str(&r.error),
        "trace": r.trace.iter().map(ext_str).collect::<Vec<_>>(),
        "verdict": r.verdict(),
    })
}

pub fn probe_report(r: &ProbeReport) -> Value {
    let outcomes: Vec<Value> = r
        .outcomes
        .iter()
        .map(|o| match o {
            ProbeOutcome::Found { level, error } => {
                json!({"status": "found", "level": level, "error": ext_str(error)})
            }
            ProbeOutcome::NotFound { best_level, best_error } => {
                json!({"status": "not_found", "best_level": best_level, "best_error": best_error})
            }
            ProbeOutcome::Refused(why) => json!({"status": "refused", "reason": why}),
        })
        .collect();
    json!({
        "eps_sq": q_str(&r.eps_sq),
        "n_max": r.n_max,
        "outcomes": outcomes,
        "uniform_level": r.uniform_level,
        "uniform_errors": r.uniform_errors.iter().map(ext_str).collect::<Vec<_>>(),
        "pointwise_success": r.pointwise_success(),
        "uniform_success": r.uniform_success(),
    })
}

pub fn witness_report(r: &WitnessReport, model: &MeasureModel) -> Value {
    json!({
        "witness": region(&r.witness),
        "witness_measure": q_str(&r.witness.measure()),
        "level": r.level,
        "eps_sq": q_str(&r.eps_sq),
        "error": ext_str(&r.error),
        "approximant": set(&r.approximant, model),
        "verdict": r.verdict,
    })
}

pub fn alpha_witness(w: &AlphaWitness, model: &MeasureModel) -> Value {
    json!({
        "set": set(&w.set, model),
        "alpha": w.alpha.as_ref().map(q_str),
        "finite_mass": q_str(&w.finite_mass),
        "error": ext_str(&w.error),
    })
}

pub fn discrete_family(f: &DiscreteFamily, model: &MeasureModel) -> Value {
    let u = model.atoms().cloned().unwrap_or_else(AtomUniverse::empty);
    json!({
        "delta": ext_str(&f.delta),
        "sets": f.sets.iter().map(|a| to_value(&AtomSetJson::encode(a, &u))).collect::<Vec<_>>(),
    })
}

pub fn eps_net(n: &EpsNet, model: &MeasureModel) -> Value {
    let u = model.atoms().cloned().unwrap_or_else(AtomUniverse::empty);
    json!({
        "eps_sq": q_str(&n.eps_sq),
        "level": n.level,
        "basis": n.basis.iter().map(|id| u.format_id(id)).collect::<Vec<_>>(),
        "infinite": n.infinite.iter().map(|id| u.format_id(id)).collect::<Vec<_>>(),
        "cardinality": n.cardinality(),
        "elements": n.elements.iter().map(|a| to_value(&AtomSetJson::encode(a, &u))).collect::<Vec<_>>(),
    })
}

pub fn net_check(c: &NetCheck, model: &MeasureModel) -> Value {
    let u = model.atoms().cloned().unwrap_or_else(AtomUniverse::empty);
    json!({
        "covered": c.covered,
        "tested": c.tested,
        "exhaustive": c.exhaustive,
        "counterexample": c.counterexample.as_ref().map(|a| to_value(&AtomSetJson::encode(a, &u))),
    })
}

pub fn jordan(b: &JordanBounds, exact: &Q) -> Value {
    json!({
        "level": b.level,
        "lower": q_str(&b.lower),
        "upper": q_str(&b.upper),
        "exact": q_str(exact),
        "sandwiched": b.lower <= *exact && *exact <= b.upper,
    })
}

pub fn exhaustive(e: &ExhaustiveBest) -> Value {
    json!({"mask": e.mask, "cells": e.cells, "error": ext_str(&e.error)})
}
