use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::numeric::{unit_phase, ComplexSum};

pub const DEFAULT_GRID_CAP: u64 = 1 << 24;

/// Regular grid of frequencies: `resolution[d]` points spanning
/// `[center_d − half_width_d, center_d + half_width_d]` on each axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl FrequencyGrid {
    pub fn new(center: Vec<f64>, half_widths: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let d = center.len();
        if half_widths.len() != d || resolution.len() != d || d == 0 {
            return Err(Error::invalid("grid axes disagree in count"));
        }
        if resolution.iter().any(|r| *r < 2) {
            return Err(Error::invalid("grid resolution must be at least 2 per axis"));
        }
        if half_widths.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::invalid("grid half-widths must be positive"));
        }
        Ok(Self {
            center,
            half_widths,
            resolution,
        })
    }

    /// 1D grid with `n` points from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![0.5 * (lo + hi)], vec![0.5 * (hi - lo)], vec![n])
    }

    /// Grid over `[lo, hi]` per axis with pitch at most `max_pitch`.
    pub fn with_max_pitch(lo: &[f64], hi: &[f64], max_pitch: f64) -> Result<Self> {
        let resolution = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| ((b - a) / max_pitch).ceil() as usize + 1)
            .collect();
        Self::new(
            lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect(),
            resolution,
        )
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn size(&self) -> u64 {
        self.resolution
            .iter()
            .try_fold(1u64, |acc, r| acc.checked_mul(*r as u64))
            .unwrap_or(u64::MAX)
    }

    pub fn check_cap(&self, cap: u64) -> Result<()> {
        let size = self.size();
        if size > cap {
            Err(Error::GridCap { size, cap })
        } else {
            Ok(())
        }
    }

    pub fn pitch(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / (self.resolution[axis] - 1) as f64
    }

    pub fn max_pitch(&self) -> f64 {
        (0..self.dim()).map(|d| self.pitch(d)).fold(0.0, f64::max)
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.center[axis] - self.half_widths[axis]
    }

    pub fn axis_value(&self, axis: usize, i: usize) -> f64 {
        self.lo(axis) + i as f64 * self.pitch(axis)
    }

    /// Multi-index of a flat index (row-major: last axis fastest).
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        for a in (0..d).rev() {
            idx[a] = flat % self.resolution[a];
            flat /= self.resolution[a];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.resolution).fold(0, |acc, (i, r)| acc * r + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.axis_value(a, i))
            .collect()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|d| self.pitch(d)).product()
    }
}

/// Normalization applied to a [`TransformTrace`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// Values divided by `(2R)^n`.
    PerVolume { r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformTrace {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub normalization: Normalization,
}

impl TransformTrace {
    /// CSV with columns `t0..t{n-1}, re, im, abs`, 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (0..self.grid.dim()).map(|d| format!("t{d}")).collect();
        header.extend(["re", "im", "abs"].map(String::from));
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.point(i).iter().map(|x| fmt17(*x)).collect();
            row.push(fmt17(v.re));
            row.push(fmt17(v.im));
            row.push(fmt17(v.norm()));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Decimal with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Σ_λ μ(λ) exp(−2πi⟨λ, t⟩) at a single frequency, compensated.
pub fn ft_point(mu: &DiscreteMeasure, t: &[f64]) -> Complex64 {
    let mut acc = ComplexSum::new();
    if mu.dim() == 1 {
        let t0 = t[0];
        for (x, w) in mu.positions().iter().zip(mu.weights()) {
            acc.add(w * unit_phase(x * t0));
        }
    } else {
        for (p, w) in mu.atoms() {
            let dot: f64 = p.iter().zip(t).map(|(a, b)| a * b).sum();
            acc.add(w * unit_phase(dot));
        }
    }
    acc.value()
}

/// Transform at a list of frequencies.
pub fn ft_at(mu: &DiscreteMeasure, freqs: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    if let Some(t) = freqs.iter().find(|t| t.len() != mu.dim()) {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: t.len(),
        });
    }
    Ok(freqs.par_iter().map(|t| ft_point(mu, t)).collect())
}

/// Grid points per exactly evaluated phase; the rest follow by recurrence,
/// which keeps the accumulated rounding below `PHASE_BLOCK · 2ε` relative.
const PHASE_BLOCK: usize = 32;

/// Transform at `t0 + k·step·e_last` for `k < len`.
fn ft_block(mu: &DiscreteMeasure, t0: &[f64], step: f64, len: usize) -> Vec<Complex64> {
    let dim = mu.dim();
    let mut acc = vec![ComplexSum::new(); len];
    for (p, w) in mu.atoms() {
        let dot: f64 = p.iter().zip(t0).map(|(a, b)| a * b).sum();
        let mut cur = w * unit_phase(dot);
        let rot = unit_phase(p[dim - 1] * step);
        for a in acc.iter_mut() {
            a.add(cur);
            cur *= rot;
        }
    }
    acc.iter().map(|a| a.value()).collect()
}

/// Transform on a regular grid, parallel over blocks of frequencies along the last axis.
pub fn ft_grid(mu: &DiscreteMeasure, grid: &FrequencyGrid) -> Result<TransformTrace> {
    ft_grid_capped(mu, grid, DEFAULT_GRID_CAP)
}

pub fn ft_grid_capped(mu: &DiscreteMeasure, grid: &FrequencyGrid, cap: u64) -> Result<TransformTrace> {
    if grid.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: grid.dim(),
        });
    }
    grid.check_cap(cap)?;
    let dim = grid.dim();
    let row = grid.resolution[dim - 1];
    let step = if row > 1 { grid.pitch(dim - 1) } else { 0.0 };
    let blocks_per_row = row.div_ceil(PHASE_BLOCK);
    let rows = grid.size() as usize / row;
    let blocks: Vec<Vec<Complex64>> = (0..rows * blocks_per_row)
        .into_par_iter()
        .map(|b| {
            let start = (b / blocks_per_row) * row + (b % blocks_per_row) * PHASE_BLOCK;
            let len = PHASE_BLOCK.min(row - (b % blocks_per_row) * PHASE_BLOCK);
            ft_block(mu, &grid.point(start), step, len)
        })
        .collect();
    let values = blocks.into_iter().flatten().collect();
    Ok(TransformTrace {
        grid: grid.clone(),
        values,
        normalization: Normalization::None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comb(n: i64) -> DiscreteMeasure {
        let p: Vec<f64> = (-n..=n).map(|k| k as f64).collect();
        DiscreteMeasure::from_1d(&p, &vec![1.0; p.len()], -(n as f64), n as f64).unwrap()
    }

    #[test]
    fn ft_examples() {
        let d0 = DiscreteMeasure::from_1d(&[0.0], &[1.0], -1.0, 1.0).unwrap();
        assert_eq!(ft_point(&d0, &[0.731]), Complex64::new(1.0, 0.0));
        let n = 25;
        assert_eq!(ft_point(&comb(n), &[0.0]).re, (2 * n + 1) as f64);
        let half = ft_point(&comb(n), &[0.5]);
        assert!((half - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let two = DiscreteMeasure::from_1d(&[0.0, 0.5], &[1.0, 1.0], 0.0, 1.0).unwrap();
        assert!(ft_point(&two, &[1.0]).norm() < 1e-15);
    }

    #[test]
    fn grid_matches_pointwise_and_dirichlet() {
        let n = 30;
        let mu = comb(n);
        let grid = FrequencyGrid::linspace(-0.2, 0.2, 101).unwrap();
        let tr = ft_grid(&mu, &grid).unwrap();
        for (i, v) in tr.values.iter().enumerate() {
            let t = grid.point(i)[0];
            assert!((*v - ft_point(&mu, &[t])).norm() < 1e-12);
            let m = (2 * n + 1) as f64;
            let dir = if t.abs() < 1e-15 {
                m
            } else {
                (std::f64::consts::PI * m * t).sin() / (std::f64::consts::PI * t).sin()
            };
            assert!((v.re - dir).abs() < 1e-10);
        }
        assert!((tr.values[50].re - 61.0).abs() < 1e-12);
    }

    #[test]
    fn blocked_recurrence_matches_direct_sum_in_2d() {
        let pts: Vec<Vec<f64>> = (0..200).map(|i| vec![(i as f64 * 0.618).sin() * 300.0, (i as f64 * 1.7).cos() * 300.0]).collect();
        let atoms: Vec<(Vec<f64>, Complex64)> = pts.iter().enumerate().map(|(i, p)| (p.clone(), Complex64::new(1.0, i as f64 * 0.01))).collect();
        let mu = DiscreteMeasure::from_atoms(&atoms, crate::geometry::BoxRegion::new(vec![-300.0; 2], vec![300.0; 2]).unwrap()).unwrap();
        let g = FrequencyGrid::new(vec![0.1, -0.2], vec![0.5, 0.3], vec![7, 75]).unwrap();
        let tr = ft_grid(&mu, &g).unwrap();
        for (i, v) in tr.values.iter().enumerate() {
            assert!((*v - ft_point(&mu, &g.point(i))).norm() < 1e-10, "{i}");
        }
    }

    #[test]
    fn grid_cap_enforced() {
        let g = FrequencyGrid::linspace(0.0, 1.0, 1000).unwrap();
        assert!(matches!(ft_grid_capped(&comb(2), &g, 10), Err(Error::GridCap { .. })));
    }

    #[test]
    fn flatten_round_trip() {
        let g = FrequencyGrid::new(vec![0.0, 1.0], vec![1.0, 2.0], vec![3, 5]).unwrap();
        for f in 0..15 {
            assert_eq!(g.flatten(&g.unflatten(f)), f);
        }
        assert_eq!(g.point(0), vec![-1.0, -1.0]);
        assert_eq!(g.point(14), vec![1.0, 3.0]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = FrequencyGrid::linspace(0.0, 1.0, 3).unwrap();
        let tr = ft_grid(&comb(1), &g).unwrap();
        let s = tr.to_csv().unwrap();
        assert!(s.starts_with("t0,re,im,abs"));
        assert_eq!(s.lines().count(), 4);
    }
}
