//! Periodic comb structure: lattice fitting, recovery of
//! μ = Σ_j Σ_{λ∈L+τ_j} P_j(λ) δ_λ, coset coverage and the spectral dichotomy.

mod comb;
mod dichotomy;
mod fit;
mod recover;
mod synthetic;

pub use comb::{CombRepresentation, TrigPolynomial};
pub use dichotomy::{dichotomy_report, DichotomyOptions, DichotomyReport, DichotomyVerdict, GapLevel};
pub use fit::{approximate_gcd, coset_cover_check, fit_lattice, FitOptions, LatticeFit};
pub use recover::{recover_comb, CombRecovery, RecoveryOptions, RecoveryVerdict};
pub use synthetic::{random_comb_representation, synthetic_box, SyntheticCombOptions};
