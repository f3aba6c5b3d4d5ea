use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::autocorrelation::PeakKernel;
use crate::geometry::lex_cmp;
use crate::measures::FrequencyGrid;
use crate::numeric::golden_max;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    /// Fraction of the largest grid value.
    Relative(f64),
    Absolute(f64),
}

impl Threshold {
    pub fn resolve(&self, max: f64) -> f64 {
        match *self {
            Threshold::Relative(f) => f * max,
            Threshold::Absolute(a) => a,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakOptions {
    pub threshold: Threshold,
    /// A candidate must exceed this multiple of the summed sidelobe envelopes
    /// of stronger accepted peaks.
    pub sidelobe_factor: f64,
    pub refine: bool,
    pub refine_iters: usize,
    pub max_peaks: Option<usize>,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self {
            threshold: Threshold::Relative(1e-3),
            sidelobe_factor: 2.0,
            refine: true,
            refine_iters: 100,
            max_peaks: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub location: Vec<f64>,
    /// Value of the sampled function at `location`.
    pub height: f64,
    /// `height` divided by the kernel height.
    pub intensity: f64,
}

/// Offsets of the 3^n − 1 grid neighbours.
fn neighbour_offsets(dim: usize) -> Vec<Vec<i64>> {
    let total = 3usize.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            (0..dim)
                .map(|_| {
                    let o = (idx % 3) as i64 - 1;
                    idx /= 3;
                    o
                })
                .collect::<Vec<i64>>()
        })
        .filter(|o| o.iter().any(|x| *x != 0))
        .collect()
}

/// Plateaus are not maxima: some in-grid neighbour must lie strictly below.
fn is_local_max(grid: &FrequencyGrid, values: &[f64], flat: usize, offsets: &[Vec<i64>]) -> bool {
    let idx = grid.unflatten(flat);
    let v = values[flat];
    let mut strict = false;
    'next: for off in offsets {
        let mut nb = Vec::with_capacity(idx.len());
        for (a, (i, o)) in idx.iter().zip(off).enumerate() {
            let j = *i as i64 + o;
            if j < 0 || j >= grid.resolution[a] as i64 {
                continue 'next;
            }
            nb.push(j as usize);
        }
        let g = grid.flatten(&nb);
        let w = values[g];
        // Ties go to the lower flat index.
        if w > v || (w == v && g < flat) {
            return false;
        }
        strict |= w < v;
    }
    strict
}

/// Local maxima of `values` on `grid` above the threshold, with sidelobes of
/// stronger peaks suppressed, refined by golden-section ascent of `eval`
/// within one pitch. Sorted by decreasing height.
pub fn find_peaks<F>(grid: &FrequencyGrid, values: &[f64], kernel: &PeakKernel, opts: &PeakOptions, eval: F) -> Vec<Peak>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || !(max > 0.0) {
        return vec![];
    }
    let thr = opts.threshold.resolve(max);
    let offsets = neighbour_offsets(grid.dim());
    let mut candidates: Vec<usize> = (0..values.len())
        .into_par_iter()
        .filter(|&i| values[i] >= thr && values[i] > 0.0 && is_local_max(grid, values, i, &offsets))
        .collect();
    candidates.sort_by(|a, b| values[*b].total_cmp(&values[*a]).then(a.cmp(b)));

    let mut accepted: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in candidates {
        let t = grid.point(c);
        let v = values[c];
        let sidelobes: f64 = accepted
            .iter()
            .map(|(s, h)| {
                let d: Vec<f64> = t.iter().zip(s).map(|(a, b)| a - b).collect();
                h * kernel.envelope(&d)
            })
            .sum();
        if v > opts.sidelobe_factor * sidelobes {
            accepted.push((t, v));
            if opts.max_peaks.is_some_and(|m| accepted.len() >= m) {
                break;
            }
        }
    }

    let height = kernel.height();
    let mut peaks: Vec<Peak> = accepted
        .into_par_iter()
        .map(|(t, v)| {
            let (location, h) = if opts.refine { refine(grid, &t, v, opts.refine_iters, &eval) } else { (t, v) };
            Peak {
                location,
                height: h,
                intensity: h / height,
            }
        })
        .collect();
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height).then(lex_cmp(&a.location, &b.location)));
    peaks
}

/// Coordinate-wise golden-section ascent within one pitch of `start`.
fn refine<F: Fn(&[f64]) -> f64>(grid: &FrequencyGrid, start: &[f64], start_value: f64, iters: usize, eval: &F) -> (Vec<f64>, f64) {
    let dim = start.len();
    let sweeps = if dim == 1 { 1 } else { 3 };
    let mut loc = start.to_vec();
    let mut best = start_value;
    for _ in 0..sweeps {
        for d in 0..dim {
            let p = grid.pitch(d);
            let lo = (start[d] - p).max(grid.lo(d));
            let hi = (start[d] + p).min(grid.lo(d) + 2.0 * grid.half_widths[d]);
            let mut probe = loc.clone();
            let (x, fx) = golden_max(
                |x| {
                    probe[d] = x;
                    eval(&probe)
                },
                lo,
                hi,
                iters,
            );
            if fx > best {
                best = fx;
                loc[d] = x;
            }
        }
    }
    (loc, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffraction::autocorrelation::KernelAxis;
    use crate::numeric::sinc;

    #[test]
    fn flat_values_have_no_peaks() {
        let grid = FrequencyGrid::with_max_pitch(&[-1.0], &[1.0], 0.01).unwrap();
        let values = vec![0.5; grid.size() as usize];
        let peaks = find_peaks(&grid, &values, &PeakKernel::dirichlet(1, 10.0), &PeakOptions::default(), |_| 0.5);
        assert!(peaks.is_empty(), "{peaks:?}");
    }

    #[test]
    fn recovers_separated_sinc_peaks() {
        let r = 50.0;
        let truth = [(0.2, 3.0), (0.55, 1.0), (-0.31, 0.5)];
        let f = |t: &[f64]| -> f64 { truth.iter().map(|(c, a)| a * 2.0 * r * sinc(2.0 * r * (t[0] - c))).sum::<f64>().abs() };
        let grid = FrequencyGrid::with_max_pitch(&[-1.0], &[1.0], 1.0 / (4.0 * r)).unwrap();
        let values: Vec<f64> = (0..grid.size() as usize).map(|i| f(&grid.point(i))).collect();
        let kernel = PeakKernel::dirichlet(1, r);
        let peaks = find_peaks(&grid, &values, &kernel, &PeakOptions::default(), f);
        assert_eq!(peaks.len(), 3, "{peaks:?}");
        for (p, (c, a)) in peaks.iter().zip(truth) {
            assert!((p.location[0] - c).abs() < 2e-3, "{p:?}");
            assert!((p.intensity - a).abs() < 0.02 * a, "{p:?}");
        }
    }

    #[test]
    fn fejer_peak_in_2d() {
        let k = KernelAxis::Fejer { r: 10.0 };
        let kernel = PeakKernel { axes: vec![k; 2] };
        let f = |t: &[f64]| 0.7 * kernel.shape(&[t[0] - 0.1, t[1] + 0.2]);
        let grid = FrequencyGrid::with_max_pitch(&[-0.5, -0.5], &[0.5, 0.5], 1.0 / 40.0).unwrap();
        let values: Vec<f64> = (0..grid.size() as usize).map(|i| f(&grid.point(i))).collect();
        let peaks = find_peaks(&grid, &values, &kernel, &PeakOptions::default(), f);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].intensity - 0.7).abs() < 1e-9);
        assert!((peaks[0].location[0] - 0.1).abs() < 1e-6 && (peaks[0].location[1] + 0.2).abs() < 1e-6);
    }

    #[test]
    fn nothing_above_threshold() {
        let grid = FrequencyGrid::linspace(0.0, 1.0, 11).unwrap();
        let values = vec![0.0; 11];
        let peaks = find_peaks(&grid, &values, &PeakKernel::dirichlet(1, 1.0), &PeakOptions::default(), |_| 0.0);
        assert!(peaks.is_empty());
    }
}
