//! Hyperplane arrangements over parameter space and the cells on which profit is affine.

mod affine;
mod arrangement;
mod counting;
mod delineation;
mod hyperplane;

pub use affine::{cell_points, fit_affine, verify_affine, verify_affine_in_cell, AffineCheck, TAU_AFFINE};
pub use arrangement::{enumerate_cells, enumerate_cells_1d, enumerate_cells_2d, sample_cells, Arrangement, Cell, CellEnumeration, TAU_GEOM, TAU_MARGIN};
pub use counting::{buck_cell_bound, generic_cell_count, pdim_upper_bound};
pub use delineation::{hyperplanes_for, theorem_dt};
pub use hyperplane::{dedup, Hyperplane};
