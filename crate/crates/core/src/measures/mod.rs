//! Discrete complex measures and their Fourier transforms as exponential sums.

mod auxiliary;
mod measure;
mod transform;

pub use auxiliary::{nu_h, nu_h_support_check, s_h, LeakOptions, LeakReport, DEFAULT_MATCH_TOL};
pub use measure::{DiscreteMeasure, PURGE_THRESHOLD};
pub use transform::{
    fmt17, ft_at, ft_grid, ft_grid_capped, ft_point, FrequencyGrid, Normalization, TransformTrace, DEFAULT_GRID_CAP,
};
