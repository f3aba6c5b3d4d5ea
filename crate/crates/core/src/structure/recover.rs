use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::comb::{CombRepresentation, TrigPolynomial};
use super::fit::{fit_lattice, FitOptions, LatticeFit};
use crate::error::{Error, Result};
use crate::geometry::Lattice;
use crate::measures::DiscreteMeasure;
use crate::numeric::unit_phase;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryOptions {
    pub fit: FitOptions,
    /// Term cap per coset polynomial.
    pub max_terms: usize,
    /// Residual tolerance relative to the largest atom weight.
    pub relative_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            max_terms: 25,
            relative_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryVerdict {
    Representable,
    NonRepresentable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombRecovery {
    pub verdict: RecoveryVerdict,
    /// Present whenever a lattice was fitted, including partial results.
    pub representation: Option<CombRepresentation>,
    pub fit: LatticeFit,
    /// Atoms of μ on none of the fitted cosets.
    pub uncovered_atoms: usize,
    pub tolerance: f64,
    pub reason: Option<String>,
}

/// Reduces ω into the fundamental cell of L* centred at the origin.
fn reduce_mod_dual(dual: &Lattice, w: &[f64]) -> Vec<f64> {
    let k: Vec<f64> = dual.coords(w).iter().map(|c| c.round()).collect();
    let p = dual.point_real(&k);
    w.iter().zip(p).map(|(a, b)| a - b).collect()
}

/// Spectrum locations reduced mod L*, deduplicated, always including 0.
fn candidate_frequencies(lattice: &Lattice, spec: &DiscreteMeasure, tol: f64) -> Vec<Vec<f64>> {
    let dim = lattice.dim();
    let dual = lattice.dual();
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    let mut reduced: Vec<Vec<f64>> = spec.atoms().map(|(x, _)| reduce_mod_dual(&dual, x)).collect();
    reduced.sort_by(|a, b| crate::geometry::lex_cmp(a, b));
    for r in reduced {
        // Aliases across the cell boundary are the same frequency mod L*.
        let dup = out.iter().any(|o| {
            let d: Vec<f64> = r.iter().zip(o).map(|(a, b)| a - b).collect();
            dual.distance_to_lattice(&d) <= tol
        });
        if !dup {
            out.push(r);
        }
    }
    out
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Greedy orthogonal matching pursuit: pick the candidate most correlated with
/// the residual, refit all picked terms by least squares, stop on tolerance
/// or term cap. Returns (frequencies, coefficients, residual).
fn omp(points: &[Vec<f64>], y: &[Complex64], cands: &[Vec<f64>], max_terms: usize, tol: f64) -> (Vec<Vec<f64>>, Vec<Complex64>, f64) {
    let m = points.len();
    let column = |w: &[f64]| -> Vec<Complex64> {
        points
            .iter()
            .map(|x| unit_phase(-x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()))
            .collect()
    };
    let columns: Vec<Vec<Complex64>> = cands.iter().map(|w| column(w)).collect();
    let mut picked: Vec<usize> = Vec::new();
    let mut coeffs: Vec<Complex64> = Vec::new();
    let mut residual: Vec<Complex64> = y.to_vec();
    while picked.len() < max_terms.min(cands.len()) && max_abs(&residual) > tol {
        let best = columns
            .iter()
            .enumerate()
            .filter(|(k, _)| !picked.contains(k))
            .map(|(k, c)| (k, c.iter().zip(&residual).map(|(a, r)| a.conj() * r).sum::<Complex64>().norm()))
            .fold(None, |b: Option<(usize, f64)>, (k, v)| match b {
                Some((_, bv)) if bv >= v => b,
                _ => Some((k, v)),
            });
        let Some((k, corr)) = best else { break };
        if corr <= f64::EPSILON * m as f64 * max_abs(y) {
            break;
        }
        picked.push(k);
        let a = DMatrix::from_fn(m, picked.len(), |i, j| columns[picked[j]][i]);
        let b = DMatrix::from_column_slice(m, 1, y);
        let Ok(sol) = a.clone().svd(true, true).solve(&b, 1e-13) else { break };
        coeffs = sol.column(0).iter().copied().collect();
        let fitted = &a * &sol;
        residual = (0..m).map(|i| y[i] - fitted[(i, 0)]).collect();
    }
    let freqs = picked.iter().map(|k| cands[*k].clone()).collect();
    (freqs, coeffs, max_abs(&residual))
}

/// Recovers μ = Σ_j Σ_{λ∈L+τ_j} P_j(λ) δ_λ from the atoms of `mu`, with
/// polynomial frequencies drawn from the locations of `spec` reduced mod L*.
pub fn recover_comb(mu: &DiscreteMeasure, spec: &DiscreteMeasure, opts: &RecoveryOptions) -> Result<CombRecovery> {
    if mu.is_empty() {
        return Err(Error::Empty("recover_comb needs a nonempty measure"));
    }
    if spec.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: spec.dim(),
        });
    }
    let tolerance = opts.relative_tol * mu.max_weight();
    let fit = fit_lattice(&mu.support(), &opts.fit)?;
    let non = |fit: LatticeFit, rep: Option<CombRepresentation>, uncovered: usize, why: String| CombRecovery {
        verdict: RecoveryVerdict::NonRepresentable,
        representation: rep,
        fit,
        uncovered_atoms: uncovered,
        tolerance,
        reason: Some(why),
    };
    let lattice = match (&fit.lattice, fit.fitted) {
        (Some(l), true) => l.clone(),
        _ => {
            let why = format!("no lattice covers the support (best coverage {:.4})", fit.coverage);
            return Ok(non(fit, None, mu.len(), why));
        }
    };
    let n_cos = fit.translates.len();
    let mut groups: Vec<(Vec<Vec<f64>>, Vec<Complex64>)> = vec![(vec![], vec![]); n_cos];
    let mut uncovered = 0;
    for (x, w) in mu.atoms() {
        let near = fit
            .translates
            .iter()
            .enumerate()
            .map(|(j, t)| {
                let d: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
                (j, lattice.distance_to_lattice(&d))
            })
            .filter(|(_, d)| *d <= fit.tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match near {
            Some((j, _)) => {
                groups[j].0.push(x.to_vec());
                groups[j].1.push(w);
            }
            None => uncovered += 1,
        }
    }
    let freq_tol = 1e-9 * lattice.dual().det().abs().powf(1.0 / lattice.dim() as f64);
    let cands = candidate_frequencies(&lattice, spec, freq_tol);
    let fits: Vec<(Vec<Vec<f64>>, Vec<Complex64>, f64)> = groups
        .par_iter()
        .map(|(pts, ys)| omp(pts, ys, &cands, opts.max_terms, tolerance))
        .collect();
    let residual = fits.iter().map(|f| f.2).fold(0.0, f64::max);
    let mut polys = Vec::with_capacity(n_cos);
    for (freqs, coeffs, _) in fits {
        polys.push(TrigPolynomial::new(lattice.dim(), freqs, coeffs)?);
    }
    let rep = CombRepresentation::new(lattice, fit.translates.clone(), polys, residual)?;
    if uncovered > 0 {
        let why = format!("{uncovered} atoms lie off the fitted cosets");
        return Ok(non(fit, Some(rep), uncovered, why));
    }
    if residual > tolerance {
        let why = format!("residual {residual:e} exceeds tolerance {tolerance:e}");
        return Ok(non(fit, Some(rep), 0, why));
    }
    Ok(CombRecovery {
        verdict: RecoveryVerdict::Representable,
        representation: Some(rep),
        fit,
        uncovered_atoms: 0,
        tolerance,
        reason: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutproject::{fibonacci_scheme, model_measure, WindowFunction};
    use crate::geometry::BoxRegion;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(dim: usize) -> Lattice {
        Lattice::scaled_integer(dim, 1.0).unwrap()
    }

    #[test]
    fn unit_comb_recovers_constant() {
        let rep = CombRepresentation::new(unit(1), vec![vec![0.0]], vec![TrigPolynomial::constant(1, c(1.0, 0.0))], 0.0).unwrap();
        let mu = rep.to_measure(&BoxRegion::cube(1, 100.0)).unwrap();
        let spec = rep.spectrum(&BoxRegion::cube(1, 1.0)).unwrap();
        let out = recover_comb(&mu, &spec, &RecoveryOptions::default()).unwrap();
        assert_eq!(out.verdict, RecoveryVerdict::Representable);
        let r = out.representation.unwrap();
        assert_eq!(r.cosets(), 1);
        assert!(r.translates[0][0].abs() < 1e-12);
        assert_eq!(r.polys[0].len(), 1);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn cosine_modulated_weights() {
        let beta = 2f64.sqrt() - 1.0;
        let p = TrigPolynomial::new(1, vec![vec![0.0], vec![beta], vec![-beta]], vec![c(2.0, 0.0), c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        let rep = CombRepresentation::new(unit(1), vec![vec![0.0]], vec![p], 0.0).unwrap();
        let mu = rep.to_measure(&BoxRegion::cube(1, 200.0)).unwrap();
        for (x, w) in mu.atoms() {
            assert!((w.re - (2.0 + (2.0 * std::f64::consts::PI * beta * x[0]).cos())).abs() < 1e-12);
        }
        let spec = rep.spectrum(&BoxRegion::cube(1, 1.0)).unwrap();
        let out = recover_comb(&mu, &spec, &RecoveryOptions::default()).unwrap();
        assert_eq!(out.verdict, RecoveryVerdict::Representable);
        let r = out.representation.unwrap();
        assert!(r.residual < 1e-9);
        let mut terms: Vec<(f64, Complex64)> = r.polys[0].terms().map(|(w, c)| (w[0], c)).collect();
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(terms.len(), 3);
        for ((w, cf), (ew, ec)) in terms.iter().zip([(-beta, 0.5), (0.0, 2.0), (beta, 0.5)]) {
            assert!((w - ew).abs() < 1e-9 && (cf - c(ec, 0.0)).norm() < 1e-9, "{w} {cf}");
        }
    }

    #[test]
    fn two_cosets_with_opposite_signs() {
        let rep = CombRepresentation::new(
            unit(1),
            vec![vec![0.0], vec![1.0 / 3.0]],
            vec![TrigPolynomial::constant(1, c(1.0, 0.0)), TrigPolynomial::constant(1, c(-1.0, 0.0))],
            0.0,
        )
        .unwrap();
        let mu = rep.to_measure(&BoxRegion::cube(1, 60.0)).unwrap();
        let spec = rep.spectrum(&BoxRegion::cube(1, 3.0)).unwrap();
        let out = recover_comb(&mu, &spec, &RecoveryOptions::default()).unwrap();
        assert_eq!(out.verdict, RecoveryVerdict::Representable);
        let r = out.representation.unwrap();
        assert_eq!(r.cosets(), 2);
        assert!(r.evaluated_error(&mu).unwrap() < 1e-12);
    }

    #[test]
    fn fibonacci_is_not_representable() {
        let s = fibonacci_scheme();
        let wf = WindowFunction::squared(WindowFunction::bspline(2, 0.3).unwrap()).unwrap();
        let mu = model_measure(&s, &wf, &BoxRegion::cube(1, 300.0)).unwrap();
        let out = recover_comb(&mu, &mu, &RecoveryOptions::default()).unwrap();
        assert_eq!(out.verdict, RecoveryVerdict::NonRepresentable);
        assert!(out.reason.is_some());
    }

    #[test]
    fn empty_measure_is_an_error() {
        let e = DiscreteMeasure::empty(BoxRegion::cube(1, 1.0));
        assert!(matches!(recover_comb(&e, &e, &RecoveryOptions::default()), Err(Error::Empty(_))));
    }
}
