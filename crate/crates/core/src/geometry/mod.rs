//! Point sets, lattices, difference sets, discreteness tests and densities.

mod density;
mod discreteness;
pub(crate) mod index;
mod lattice;
mod pointset;
mod region;

pub use density::{
    bm_upper_density, density_report, lower_density, rho_density, uniform_density, BmDensity, DensityReport,
    DyadicFamily, LowerDensity, UniformDensity, CONVERGENCE_DEVIATION,
};
pub use discreteness::{
    classify, classify_with, covering_radius, difference_set, mean_spacing, min_separation, ClassifyOptions,
    CoveringReport, DifferenceSet, DiscretenessReport, Separation, Witness, DEFAULT_GRID_CAP,
};
pub use index::GridIndex;
pub use lattice::Lattice;
pub(crate) use pointset::{canonicalize, check_dim, lex_cmp};
pub use pointset::{PointSet, DEFAULT_DEDUP_TOL};
pub use region::BoxRegion;
