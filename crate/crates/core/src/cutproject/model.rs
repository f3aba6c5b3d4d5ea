use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scheme::{enumerate_box, product_box, CutProjectScheme, DEFAULT_ENUMERATION_CAP};
use super::window::WindowFunction;
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, DEFAULT_DEDUP_TOL};
use crate::measures::DiscreteMeasure;

fn require_scalar_internal(scheme: &CutProjectScheme) -> Result<()> {
    if scheme.m() != 1 {
        return Err(Error::UnsupportedDimension(scheme.m()));
    }
    Ok(())
}

/// μ = Σ_γ φ̂(p2(γ)) δ_{p1(γ)} over lattice points with `p1(γ)` in `bbox`.
pub fn model_measure(scheme: &CutProjectScheme, wf: &WindowFunction, bbox: &BoxRegion) -> Result<DiscreteMeasure> {
    model_measure_capped(scheme, wf, bbox, DEFAULT_ENUMERATION_CAP)
}

pub fn model_measure_capped(
    scheme: &CutProjectScheme,
    wf: &WindowFunction,
    bbox: &BoxRegion,
    cap: u64,
) -> Result<DiscreteMeasure> {
    require_scalar_internal(scheme)?;
    wf.validate()?;
    let n = scheme.n();
    if bbox.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bbox.dim(),
        });
    }
    let (s_lo, s_hi) = wf.transform_support();
    let support = BoxRegion::new(vec![s_lo], vec![s_hi])?;
    if !scheme.window().covers(&support) {
        let w = scheme
            .window()
            .bounding_box()
            .map_or((0.0, 0.0), |b| (b.lo[0], b.hi[0]));
        return Err(Error::SupportMismatch {
            support: (s_lo, s_hi),
            window: w,
        });
    }
    let pts = enumerate_box(scheme.lattice(), &product_box(bbox, &support), cap)?;
    let d = n + 1;
    let weights: Vec<Complex64> = pts.par_chunks_exact(d).map(|x| wf.transform(x[n])).collect();
    let positions: Vec<f64> = pts.chunks_exact(d).flat_map(|x| x[..n].to_vec()).collect();
    DiscreteMeasure::new(n, positions, weights, bbox.clone(), DEFAULT_DEDUP_TOL)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Atoms with |weight| below this are dropped; also sets the internal-space
    /// enumeration radius through the window function's envelope.
    pub min_weight: f64,
    pub enumeration_cap: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            min_weight: 1e-12,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// μ̂ = (1/det Γ) Σ_{γ*} φ(p2(γ*)) δ_{p1(γ*)} over dual points with `p1(γ*)` in `freq_box`.
pub fn predicted_spectrum(
    scheme: &CutProjectScheme,
    wf: &WindowFunction,
    freq_box: &BoxRegion,
    opts: &SpectrumOptions,
) -> Result<DiscreteMeasure> {
    require_scalar_internal(scheme)?;
    wf.validate()?;
    let n = scheme.n();
    if freq_box.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: freq_box.dim(),
        });
    }
    let det = scheme.det();
    let radius = wf
        .envelope_radius(opts.min_weight * det)
        .filter(|r| r.is_finite())
        .ok_or(Error::NonDecaying)?;
    let internal = BoxRegion::new(vec![-radius], vec![radius])?;
    let pts = enumerate_box(scheme.dual(), &product_box(freq_box, &internal), opts.enumeration_cap)?;
    let d = n + 1;
    let weights: Vec<f64> = pts.par_chunks_exact(d).map(|x| wf.eval(x[n]) / det).collect();
    let mut positions = Vec::new();
    let mut kept = Vec::new();
    for (x, w) in pts.chunks_exact(d).zip(weights) {
        if w.abs() >= opts.min_weight {
            positions.extend_from_slice(&x[..n]);
            kept.push(Complex64::new(w, 0.0));
        }
    }
    DiscreteMeasure::new(n, positions, kept, freq_box.clone(), DEFAULT_DEDUP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutproject::{fibonacci_scheme, model_set, Window};
    use crate::measures::ft_point;

    fn scheme_for(wf: &WindowFunction) -> CutProjectScheme {
        let (lo, hi) = wf.transform_support();
        fibonacci_scheme().with_window(Window::interval(lo, hi).unwrap()).unwrap()
    }

    #[test]
    fn support_is_inside_model_set() {
        let wf = WindowFunction::bspline(2, 0.3).unwrap();
        let s = scheme_for(&wf);
        let bbox = BoxRegion::cube(1, 200.0);
        let mu = model_measure(&s, &wf, &bbox).unwrap();
        let ms = model_set(&s, &Window::interval(-0.3, 0.3).unwrap(), &bbox).unwrap();
        let set: Vec<f64> = ms.values_1d().unwrap().to_vec();
        for x in mu.positions() {
            assert!(set.iter().any(|y| y == x));
        }
        assert!(mu.weights().iter().all(|w| w.im == 0.0));
    }

    #[test]
    fn total_mass_is_transform_at_zero() {
        let wf = WindowFunction::bspline(4, 0.9).unwrap();
        let s = scheme_for(&wf);
        let mu = model_measure(&s, &wf, &BoxRegion::cube(1, 300.0)).unwrap();
        let d = (mu.total_mass() - ft_point(&mu, &[0.0])).norm();
        assert!(d < 1e-12 * mu.total_mass().norm());
    }

    #[test]
    fn support_mismatch_is_rejected() {
        let wf = WindowFunction::bspline(4, 0.9).unwrap();
        let err = model_measure(&fibonacci_scheme(), &wf, &BoxRegion::cube(1, 10.0)).unwrap_err();
        assert!(matches!(err, Error::SupportMismatch { .. }));
    }

    #[test]
    fn spectrum_weight_at_origin_and_positivity() {
        let wf = WindowFunction::squared(WindowFunction::bspline(2, 0.45).unwrap()).unwrap();
        let s = scheme_for(&wf);
        let sp = predicted_spectrum(&s, &wf, &BoxRegion::cube(1, 2.0), &SpectrumOptions::default()).unwrap();
        let w0 = sp.weight_at(&[0.0], 1e-9).re;
        assert!((w0 - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!(sp.weights().iter().all(|w| w.re >= 0.0 && w.im == 0.0));
    }

    #[test]
    fn zero_threshold_is_non_decaying() {
        let wf = WindowFunction::bspline(2, 0.45).unwrap();
        let s = scheme_for(&wf);
        let opts = SpectrumOptions {
            min_weight: 0.0,
            ..Default::default()
        };
        let err = predicted_spectrum(&s, &wf, &BoxRegion::cube(1, 1.0), &opts).unwrap_err();
        assert!(matches!(err, Error::NonDecaying));
    }

    #[test]
    fn dual_points_match_closed_form() {
        // Dual points of the Fibonacci lattice: ((a/φ + b)/√5, (aφ − b)/√5).
        let wf = WindowFunction::bspline(2, 0.45).unwrap();
        let s = scheme_for(&wf);
        let opts = SpectrumOptions {
            min_weight: 1e-3,
            ..Default::default()
        };
        let sp = predicted_spectrum(&s, &wf, &BoxRegion::new(vec![0.0], vec![1.0]).unwrap(), &opts).unwrap();
        let phi = crate::cutproject::golden_ratio();
        let r5 = 5f64.sqrt();
        let mut oracle = vec![];
        for a in -60i64..=60 {
            for b in -60i64..=60 {
                let p1 = (a as f64 / phi + b as f64) / r5;
                let p2 = (a as f64 * phi - b as f64) / r5;
                let w = wf.eval(p2) / r5;
                if (0.0..=1.0).contains(&p1) && w.abs() >= 1e-3 {
                    oracle.push((p1, w));
                }
            }
        }
        oracle.sort_by(|x, y| x.0.total_cmp(&y.0));
        assert_eq!(oracle.len(), sp.len());
        for ((p, w), (q, v)) in oracle.iter().zip(sp.atoms()) {
            assert!((p - q[0]).abs() < 1e-12 && (w - v.re).abs() < 1e-15);
        }
    }
}
