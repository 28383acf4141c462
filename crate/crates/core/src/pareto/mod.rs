//! Condition-space decomposition, per-cell Pareto fronts and hypervolume.

mod front;
mod grid;
mod hv;

pub use front::{
    constrained_extract, non_dominated_indices, select_front, FrontArchive, ParetoFront,
};
pub use grid::DecompositionGrid;
pub use hv::{converged, hv_avg, hypervolume_2d, HvReport};
