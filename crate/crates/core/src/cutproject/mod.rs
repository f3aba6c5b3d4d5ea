//! Cut-and-project schemes, model sets, model measures and their predicted
//! spectra, window functions, and the spectral-gap construction.

mod al1;
mod model;
mod nowhere_dense;
mod scheme;
mod surrogate;
mod window;

pub use al1::{lemma_al1_function, Al1Function};
pub use model::{model_measure, model_measure_capped, predicted_spectrum, SpectrumOptions};
pub use nowhere_dense::{
    cutoff_from_length, max_count, nowhere_dense_construction, BallReport, Gap, NowhereDenseConfig,
    NowhereDenseConstruction, NowhereDenseReport, SpectrumCheck, SurrogateSummary, MAX_ZEROS,
};
pub use scheme::{
    enumerate_box, fibonacci_scheme, golden_ratio, model_set, model_set_capped, CutProjectScheme, SchemeDiagnostics,
    Window, DEFAULT_ENUMERATION_CAP,
};
pub use surrogate::ZeroProductWindow;
pub use window::WindowFunction;
