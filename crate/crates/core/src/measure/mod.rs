//! Finitely presented measure spaces: Lebesgue windows, symbolic atom universes, and their sums.

mod atoms;
mod model;

pub use atoms::{AtomId, AtomSet, AtomUniverse, Cardinality, Tail};
pub use model::{atoms_fin, atoms_inf, decompose, mu, AtomSummary, Lebesgue, MeasureModel, ModelKind, Set};
