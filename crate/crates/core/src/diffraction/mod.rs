//! Autocorrelation and diffraction, Bragg-peak extraction, Wiener-type box
//! averages and the annihilating-frequency search.

mod annihilate;
mod autocorrelation;
mod estimate;
mod peaks;
mod wiener;

pub use annihilate::{
    default_test_functions, find_annihilating_frequency, AnnihilationOptions, AnnihilationResult, TestFunction,
};
pub use autocorrelation::{
    autocorrelation_measure, autocorrelation_points, Autocorrelation, AutocorrelationOptions, KernelAxis, PeakKernel,
};
pub use estimate::{
    diffraction_estimate, diffraction_report, fl4_predicted_diffraction, split_pure_point, ConvergenceReport,
    DiffractionEstimate, DiffractionOptions, DiffractionReport, PeakChange, PurePointSplit,
};
pub use peaks::{find_peaks, Peak, PeakOptions, Threshold};
pub use wiener::{atom_energy, wiener_atom, wiener_energy, FiniteMeasure, SampledDensity};
