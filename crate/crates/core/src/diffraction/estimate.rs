use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::autocorrelation::{autocorrelation_measure, Autocorrelation, AutocorrelationOptions, PeakKernel};
use super::peaks::{find_peaks, Peak, PeakOptions};
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, DEFAULT_DEDUP_TOL};
use crate::measures::{
    ft_grid_capped, ft_point, DiscreteMeasure, FrequencyGrid, Normalization, TransformTrace, DEFAULT_GRID_CAP,
};
use crate::numeric::compensated_sum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionOptions {
    pub peaks: PeakOptions,
    /// Largest allowed max|Im γ̂| / max|Re γ̂|.
    pub max_imaginary_leak: f64,
    pub grid_cap: u64,
}

impl Default for DiffractionOptions {
    fn default() -> Self {
        Self {
            peaks: PeakOptions::default(),
            max_imaginary_leak: 1e-10,
            grid_cap: DEFAULT_GRID_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionEstimate {
    pub r: f64,
    pub grid: FrequencyGrid,
    pub kernel: PeakKernel,
    /// Bragg peaks with intensities as (real, nonnegative) weights.
    pub peaks: DiscreteMeasure,
    /// Absolute grid threshold used for peak extraction.
    pub threshold: f64,
    /// Re γ̂^R on the grid.
    pub trace: Vec<f64>,
    /// Trace minus the kernel contributions of all peaks, clipped at zero.
    pub residual: Vec<f64>,
    /// Integral of the negative part removed by the clip.
    pub clipped_mass: f64,
    pub min_raw_trace: f64,
    pub imaginary_leak: f64,
    pub discrete_mass: f64,
    pub continuous_mass: f64,
}

impl DiffractionEstimate {
    pub fn peak_list(&self) -> Vec<(Vec<f64>, f64)> {
        self.peaks.atoms().map(|(p, w)| (p.to_vec(), w.re)).collect()
    }

    /// Peaks sorted by decreasing intensity.
    pub fn strongest(&self, k: usize) -> Vec<(Vec<f64>, f64)> {
        let mut v = self.peak_list();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v.truncate(k);
        v
    }

    pub fn residual_trace(&self) -> TransformTrace {
        TransformTrace {
            grid: self.grid.clone(),
            values: self.residual.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
            normalization: Normalization::None,
        }
    }
}

fn grid_box(grid: &FrequencyGrid) -> BoxRegion {
    BoxRegion {
        lo: (0..grid.dim()).map(|d| grid.lo(d)).collect(),
        hi: (0..grid.dim()).map(|d| grid.lo(d) + 2.0 * grid.half_widths[d]).collect(),
    }
}

/// `trace − Σ I_p K(t − t_p)` clipped at zero; returns (residual, clipped integral).
fn subtract_peaks(grid: &FrequencyGrid, trace: &[f64], kernel: &PeakKernel, peaks: &[(Vec<f64>, f64)]) -> (Vec<f64>, f64) {
    let raw: Vec<f64> = (0..trace.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.point(i);
            let model: f64 = peaks
                .iter()
                .map(|(p, a)| {
                    let s: Vec<f64> = t.iter().zip(p).map(|(x, y)| x - y).collect();
                    a * kernel.shape(&s)
                })
                .sum();
            trace[i] - model
        })
        .collect();
    let clipped = compensated_sum(raw.iter().filter(|v| **v < 0.0).map(|v| -v)) * grid.cell_volume();
    (raw.into_iter().map(|v| v.max(0.0)).collect(), clipped)
}

/// Transform of the autocorrelation on `grid`, Bragg peaks and residual.
pub fn diffraction_estimate(ac: &Autocorrelation, grid: &FrequencyGrid, opts: &DiffractionOptions) -> Result<DiffractionEstimate> {
    if grid.dim() != ac.dim() {
        return Err(Error::DimensionMismatch {
            expected: ac.dim(),
            got: grid.dim(),
        });
    }
    let limit = 1.0 / (4.0 * ac.r);
    let pitch = grid.max_pitch();
    if pitch > limit {
        return Err(Error::Aliasing { pitch, limit });
    }
    let ft = ft_grid_capped(&ac.measure, grid, opts.grid_cap)?;
    let max_re = ft.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let max_im = ft.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let leak = if max_re > 0.0 { max_im / max_re } else { 0.0 };
    if leak > opts.max_imaginary_leak {
        return Err(Error::ImaginaryLeak {
            leak,
            max: opts.max_imaginary_leak,
        });
    }
    let trace: Vec<f64> = ft.values.iter().map(|v| v.re).collect();
    let kernel = ac.kernel();
    let found: Vec<Peak> = find_peaks(grid, &trace, &kernel, &opts.peaks, |t| ft_point(&ac.measure, t).re);
    let threshold = opts.peaks.threshold.resolve(trace.iter().copied().fold(0.0, f64::max));
    let pairs: Vec<(Vec<f64>, f64)> = found.iter().map(|p| (p.location.clone(), p.intensity)).collect();
    let (residual, clipped_mass) = subtract_peaks(grid, &trace, &kernel, &pairs);
    let peaks = DiscreteMeasure::new(
        grid.dim(),
        pairs.iter().flat_map(|(p, _)| p.clone()).collect(),
        pairs.iter().map(|(_, a)| Complex64::new(*a, 0.0)).collect(),
        grid_box(grid),
        DEFAULT_DEDUP_TOL,
    )?;
    let cell = grid.cell_volume();
    let continuous_mass = compensated_sum(residual.iter().copied()) * cell;
    let discrete_mass = compensated_sum(pairs.iter().map(|(_, a)| *a));
    Ok(DiffractionEstimate {
        r: ac.r,
        grid: grid.clone(),
        kernel,
        peaks,
        threshold,
        min_raw_trace: trace.iter().copied().fold(f64::INFINITY, f64::min),
        trace,
        residual,
        clipped_mass,
        imaginary_leak: leak,
        discrete_mass,
        continuous_mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurePointSplit {
    pub threshold: f64,
    pub discrete: DiscreteMeasure,
    pub continuous: TransformTrace,
    pub discrete_mass: f64,
    pub continuous_mass: f64,
    pub clipped_mass: f64,
}

/// Peaks with intensity ≥ `threshold` form the discrete part; everything else
/// (including the kernels of weaker peaks) stays in the continuous trace.
pub fn split_pure_point(est: &DiffractionEstimate, threshold: f64) -> Result<PurePointSplit> {
    let kept: Vec<(Vec<f64>, f64)> = est.peak_list().into_iter().filter(|(_, a)| *a >= threshold).collect();
    let (residual, clipped_mass) = subtract_peaks(&est.grid, &est.trace, &est.kernel, &kept);
    let discrete = DiscreteMeasure::new(
        est.grid.dim(),
        kept.iter().flat_map(|(p, _)| p.clone()).collect(),
        kept.iter().map(|(_, a)| Complex64::new(*a, 0.0)).collect(),
        est.peaks.bbox().clone(),
        DEFAULT_DEDUP_TOL,
    )?;
    let continuous_mass = compensated_sum(residual.iter().copied()) * est.grid.cell_volume();
    Ok(PurePointSplit {
        threshold,
        discrete_mass: compensated_sum(kept.iter().map(|(_, a)| *a)),
        discrete,
        continuous: TransformTrace {
            grid: est.grid.clone(),
            values: residual.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
            normalization: Normalization::None,
        },
        continuous_mass,
        clipped_mass,
    })
}

/// γ̂_ν predicted from the atoms of ν̂: same locations, weights |ν̂({a})|².
pub fn fl4_predicted_diffraction(nu_hat: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(
        nu_hat.dim(),
        nu_hat.positions().to_vec(),
        nu_hat.weights().iter().map(|w| Complex64::new(w.norm_sqr(), 0.0)).collect(),
        nu_hat.bbox().clone(),
        nu_hat.dedup_tol(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakChange {
    pub location: Vec<f64>,
    pub intensity: f64,
    pub intensity_half: Option<f64>,
    pub relative_change: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub r_half: f64,
    pub peaks: Vec<PeakChange>,
    pub max_relative_change: f64,
}

/// Diffraction report: estimate at R plus a comparison of the strongest
/// peaks against the estimate at R/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffractionReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub threshold: f64,
    pub peaks: Vec<(Vec<f64>, f64)>,
    pub discrete_mass: f64,
    pub continuous_mass: f64,
    pub clipped_mass: f64,
    pub min_raw_trace: f64,
    pub imaginary_leak: f64,
    pub dropped_pairs: u64,
    pub convergence: Option<ConvergenceReport>,
}

pub fn diffraction_report(
    mu: &DiscreteMeasure,
    r: f64,
    grid: &FrequencyGrid,
    ac_opts: &AutocorrelationOptions,
    opts: &DiffractionOptions,
    compare_peaks: usize,
) -> Result<(DiffractionEstimate, DiffractionReport)> {
    let ac = autocorrelation_measure(mu, r, ac_opts)?;
    let est = diffraction_estimate(&ac, grid, opts)?;
    let convergence = if compare_peaks > 0 {
        let half = autocorrelation_measure(mu, r / 2.0, ac_opts)?;
        let est_half = diffraction_estimate(&half, grid, opts)?;
        let half_list = est_half.peak_list();
        let tol = 1.0 / r;
        let peaks: Vec<PeakChange> = est
            .strongest(compare_peaks)
            .into_iter()
            .map(|(loc, a)| {
                let matched = half_list
                    .iter()
                    .filter(|(p, _)| p.iter().zip(&loc).all(|(x, y)| (x - y).abs() <= tol))
                    .map(|(_, b)| *b)
                    .fold(None, |m: Option<f64>, b| Some(m.map_or(b, |x| x.max(b))));
                PeakChange {
                    relative_change: matched.map(|b| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE)),
                    intensity_half: matched,
                    location: loc,
                    intensity: a,
                }
            })
            .collect();
        let max_relative_change = peaks
            .iter()
            .map(|p| p.relative_change.unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        Some(ConvergenceReport {
            r_half: r / 2.0,
            peaks,
            max_relative_change,
        })
    } else {
        None
    };
    let report = DiffractionReport {
        r,
        threshold: est.threshold,
        peaks: est.peak_list(),
        discrete_mass: est.discrete_mass,
        continuous_mass: est.continuous_mass,
        clipped_mass: est.clipped_mass,
        min_raw_trace: est.min_raw_trace,
        imaginary_leak: est.imaginary_leak,
        dropped_pairs: ac.dropped_pairs,
        convergence,
    };
    Ok((est, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffraction::autocorrelation_points;
    use crate::geometry::PointSet;

    fn integers(r: i64) -> PointSet {
        let v: Vec<f64> = (-r..=r).map(|k| k as f64).collect();
        PointSet::from_1d(&v, -(r as f64), r as f64).unwrap()
    }

    #[test]
    fn integer_comb_has_unit_peaks() {
        let r = 500.0;
        let ac = autocorrelation_points(&integers(500), r, &AutocorrelationOptions::default()).unwrap();
        let grid = FrequencyGrid::with_max_pitch(&[-2.2], &[2.2], 1.0 / (4.0 * r)).unwrap();
        let est = diffraction_estimate(&ac, &grid, &DiffractionOptions::default()).unwrap();
        let peaks = est.peak_list();
        assert_eq!(peaks.len(), 5, "{peaks:?}");
        // Intensity is the squared density: 1001 points over volume 2R = 1000.
        let expected = (1001.0f64 / 1000.0).powi(2);
        for (k, (p, a)) in peaks.iter().enumerate() {
            assert!((p[0] - (k as f64 - 2.0)).abs() < 1e-6);
            assert!((a - expected).abs() < 1e-6, "{a}");
        }
        assert!(est.min_raw_trace >= -1e-10 * est.trace.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn aliasing_guard() {
        let ac = autocorrelation_points(&integers(10), 10.0, &AutocorrelationOptions::default()).unwrap();
        let grid = FrequencyGrid::linspace(-1.0, 1.0, 11).unwrap();
        assert!(matches!(
            diffraction_estimate(&ac, &grid, &DiffractionOptions::default()),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn split_is_monotone_in_threshold() {
        let r = 200.0;
        let ac = autocorrelation_points(&integers(200), r, &AutocorrelationOptions::default()).unwrap();
        let grid = FrequencyGrid::with_max_pitch(&[-1.5], &[1.5], 1.0 / (4.0 * r)).unwrap();
        let est = diffraction_estimate(&ac, &grid, &DiffractionOptions::default()).unwrap();
        let all = split_pure_point(&est, 0.0).unwrap();
        let none = split_pure_point(&est, f64::INFINITY).unwrap();
        assert!(none.discrete.is_empty());
        assert!(all.continuous_mass < 0.02 * (all.continuous_mass + all.discrete_mass));
        assert!(none.continuous_mass > all.continuous_mass);
        let total: f64 = compensated_sum(est.trace.iter().copied()) * grid.cell_volume();
        assert!((none.continuous_mass - total).abs() < 1e-9 * total);
    }

    #[test]
    fn fl4_squares_moduli() {
        let nu = DiscreteMeasure::from_atoms(
            &[(vec![0.0], Complex64::new(0.0, 2.0)), (vec![1.0], Complex64::new(1.0, 0.0))],
            BoxRegion::cube(1, 2.0),
        )
        .unwrap();
        let g = fl4_predicted_diffraction(&nu).unwrap();
        assert_eq!(g.weights(), &[Complex64::new(4.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
}
