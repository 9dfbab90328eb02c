//! Finite partitions, best approximation inside their σ-algebras, and level searches.

mod approx;
mod grid;
mod partition;

pub use approx::{
    approx_error, best_approximation, default_n_max, find_level, probe_approximability, standard_filtration,
    uniform_error, ApproxReport, Approximation, ProbeOutcome, ProbeReport, DEFAULT_N_MAX, N_MAX_ENV,
};
pub use grid::Grid;
pub use partition::{cell_measure, cell_split, AtomCells, Cell, Partition, MAX_MATERIALIZED_CELLS};
