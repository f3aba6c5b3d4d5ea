//! Search for a frequency at which a sampled measure is nearly invisible to a
//! family of test functions: minimize Φ_k(t) = Σ_j |∫ φ_j(x) e^{−2πi⟨t,x⟩} dν(x)|².

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{FrequencyGrid, TransformTrace};
use crate::numeric::{unit_phase, ComplexSum};

/// Gaussian bump exp(−π |x − center|² / scale²).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        (-std::f64::consts::PI * d2 / (self.scale * self.scale)).exp()
    }
}

/// `k` bumps centred on the grid with scales halving from the grid's half-width.
pub fn default_test_functions(grid: &FrequencyGrid, k: usize) -> Vec<TestFunction> {
    let half = grid.half_widths.iter().copied().fold(0.0, f64::max);
    (0..k)
        .map(|j| TestFunction {
            center: grid.center.clone(),
            scale: half / 2f64.powi(j as i32),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnihilationOptions {
    /// Extra search passes, each halving the search pitch.
    pub refinements: usize,
    /// Score at most this fraction of max(Φ_k) counts as annihilated.
    pub relative_tolerance: f64,
}

impl Default for AnnihilationOptions {
    fn default() -> Self {
        Self {
            refinements: 2,
            relative_tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnihilationResult {
    pub frequency: Vec<f64>,
    pub score: f64,
    /// Largest Φ_k seen on the coarsest search grid.
    pub max_score: f64,
    /// (search pitch, minimum score) for the coarse grid and each refinement.
    pub refinements: Vec<(f64, f64)>,
    pub score_decreasing: bool,
    pub annihilable: bool,
}

/// Trapezoid weights times the sampled values.
fn quadrature_weights(trace: &TransformTrace) -> Vec<Complex64> {
    let g = &trace.grid;
    let cell = g.cell_volume();
    trace
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let idx = g.unflatten(i);
            let edge: f64 = idx
                .iter()
                .zip(&g.resolution)
                .map(|(k, r)| if *k == 0 || *k + 1 == *r { 0.5 } else { 1.0 })
                .product();
            v * (cell * edge)
        })
        .collect()
}

fn refine_grid(grid: &FrequencyGrid) -> FrequencyGrid {
    FrequencyGrid {
        center: grid.center.clone(),
        half_widths: grid.half_widths.clone(),
        resolution: grid.resolution.iter().map(|r| 2 * (r - 1) + 1).collect(),
    }
}

pub fn find_annihilating_frequency(
    trace: &TransformTrace,
    tests: &[TestFunction],
    search: &FrequencyGrid,
    opts: &AnnihilationOptions,
) -> Result<AnnihilationResult> {
    let dim = trace.grid.dim();
    if search.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: search.dim(),
        });
    }
    if tests.is_empty() {
        return Err(Error::invalid("at least one test function is required"));
    }
    if let Some(t) = tests.iter().find(|t| t.center.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: t.center.len(),
        });
    }
    let base = quadrature_weights(trace);
    let points: Vec<Vec<f64>> = (0..base.len()).map(|i| trace.grid.point(i)).collect();
    // Weighted samples per test function, zeros dropped.
    let weighted: Vec<Vec<(usize, Complex64)>> = tests
        .iter()
        .map(|f| {
            base.iter()
                .enumerate()
                .filter(|(_, w)| w.norm() > 0.0)
                .map(|(i, w)| (i, w * f.eval(&points[i])))
                .filter(|(_, w)| w.norm() > 0.0)
                .collect()
        })
        .collect();
    let phi = |t: &[f64]| -> f64 {
        weighted
            .iter()
            .map(|samples| {
                let mut acc = ComplexSum::new();
                for (i, w) in samples {
                    let dot: f64 = points[*i].iter().zip(t).map(|(a, b)| a * b).sum();
                    acc.add(w * unit_phase(dot));
                }
                acc.value().norm_sqr()
            })
            .sum()
    };
    let scan = |grid: &FrequencyGrid| -> (usize, f64, f64) {
        let scores: Vec<f64> = (0..grid.size() as usize).into_par_iter().map(|i| phi(&grid.point(i))).collect();
        let (arg, min) = scores
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, s)| if *s < b.1 { (i, *s) } else { b });
        (arg, min, scores.iter().copied().fold(0.0, f64::max))
    };
    let mut grid = search.clone();
    let (mut arg, mut best, max_score) = scan(&grid);
    let mut best_grid = grid.clone();
    let mut refinements = vec![(grid.max_pitch(), best)];
    for _ in 0..opts.refinements {
        grid = refine_grid(&grid);
        let (a, s, _) = scan(&grid);
        refinements.push((grid.max_pitch(), s));
        if s < best {
            best = s;
            arg = a;
            best_grid = grid.clone();
        }
    }
    let score_decreasing = refinements.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(AnnihilationResult {
        frequency: best_grid.point(arg),
        score: best,
        max_score,
        refinements,
        score_decreasing,
        annihilable: best <= opts.relative_tolerance * max_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Normalization;
    use crate::numeric::sinc;

    fn lebesgue_unit(n: usize, atom: Option<(usize, f64)>) -> TransformTrace {
        let grid = FrequencyGrid::linspace(0.0, 1.0, n).unwrap();
        let h = grid.pitch(0);
        let mut values = vec![Complex64::new(1.0, 0.0); n];
        if let Some((i, c)) = atom {
            values[i] += c / h;
        }
        TransformTrace {
            grid,
            values,
            normalization: Normalization::None,
        }
    }

    #[test]
    fn zero_measure_scores_zero() {
        let mut tr = lebesgue_unit(101, None);
        tr.values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let tests = default_test_functions(&tr.grid, 2);
        let search = FrequencyGrid::linspace(-5.0, 5.0, 41).unwrap();
        let res = find_annihilating_frequency(&tr, &tests, &search, &AnnihilationOptions::default()).unwrap();
        assert_eq!(res.score, 0.0);
    }

    #[test]
    fn flat_test_function_gives_sinc_squared() {
        let tr = lebesgue_unit(2001, None);
        let flat = [TestFunction {
            center: vec![0.5],
            scale: 1e6,
        }];
        let search = FrequencyGrid::linspace(0.25, 0.75, 3).unwrap();
        let res = find_annihilating_frequency(&tr, &flat, &search, &AnnihilationOptions { refinements: 0, ..Default::default() }).unwrap();
        // min over {0.25, 0.5, 0.75} of sinc²(t) is at 0.75.
        assert!((res.score - sinc(0.75).powi(2)).abs() < 1e-6);
        assert!((res.frequency[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn continuous_scores_decay_and_atoms_floor() {
        let tr = lebesgue_unit(4001, None);
        let tests = default_test_functions(&tr.grid, 1);
        let opts = AnnihilationOptions::default();
        let min_at = |t: f64| {
            let g = FrequencyGrid::linspace(-t, t, (40.0 * t) as usize + 1).unwrap();
            find_annihilating_frequency(&tr, &tests, &g, &opts).unwrap()
        };
        let (a, b) = (min_at(10.0), min_at(100.0));
        assert!(b.score < 0.1 * a.score, "{} {}", a.score, b.score);
        assert!(b.annihilable && b.score_decreasing);

        let spiked = lebesgue_unit(4001, Some((1200, 1.0)));
        let g = FrequencyGrid::linspace(-100.0, 100.0, 4001).unwrap();
        let r = find_annihilating_frequency(&spiked, &tests, &g, &opts).unwrap();
        let floor = tests[0].eval(&[spiked.grid.point(1200)[0]]).powi(2);
        assert!(r.score > 0.5 * floor, "{} {floor}", r.score);
        assert!(!r.annihilable);
    }
}
