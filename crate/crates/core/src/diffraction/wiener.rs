//! Box averages of ν̂ and |ν̂|² over [−R, R] for finite measures on the line,
//! which recover the atom at a point and the sum of squared atom masses.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::numeric::{gauss_legendre, sinc, unit_phase, ComplexSum, CompensatedSum};

/// Quadrature nodes per panel; panels are at most 1/(oscillation frequency) wide.
const NODES: usize = 8;
const PHASE_BLOCK: usize = 32;
pub const DEFAULT_MAX_PANELS: u64 = 1 << 26;

/// Density sampled at `start + k·step`, read as its piecewise-linear interpolant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledDensity {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl SampledDensity {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("density needs a positive step and finite samples"));
        }
        Ok(Self { start, step, values })
    }

    /// Samples `f` on `[lo, hi]` with `n` points.
    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::invalid("density sampling needs n ≥ 2 and hi > lo"));
        }
        let step = (hi - lo) / (n - 1) as f64;
        Self::new(lo, step, (0..n).map(|k| f(lo + k as f64 * step)).collect())
    }

    pub fn abscissa(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    /// ∫ of the interpolant: h·Σ f_k.
    pub fn mass(&self) -> f64 {
        self.step * self.values.iter().sum::<f64>()
    }

    /// Support of the interpolant (one step beyond the extreme samples).
    pub fn extent(&self) -> (f64, f64) {
        let n = self.values.len().max(1) - 1;
        (self.start - self.step, self.abscissa(n) + self.step)
    }

    /// sinc²(ht)·Σ h f_k e^{−2πi x_k t}. Phases advance by a fixed rotation
    /// and are recomputed exactly every `PHASE_BLOCK` samples.
    pub fn transform(&self, t: f64) -> Complex64 {
        let rot = unit_phase(self.step * t);
        let mut acc = ComplexSum::new();
        for (b, block) in self.values.chunks(PHASE_BLOCK).enumerate() {
            let mut phase = unit_phase(self.abscissa(b * PHASE_BLOCK) * t);
            for f in block {
                if *f != 0.0 {
                    acc.add(phase * f);
                }
                phase *= rot;
            }
        }
        acc.value() * (self.step * sinc(self.step * t).powi(2))
    }
}

/// Finite measure on R: atoms plus an optional sampled density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure {
    pub atoms: DiscreteMeasure,
    pub density: Option<SampledDensity>,
}

impl FiniteMeasure {
    pub fn new(atoms: DiscreteMeasure, density: Option<SampledDensity>) -> Result<Self> {
        if atoms.dim() != 1 {
            return Err(Error::UnsupportedDimension(atoms.dim()));
        }
        Ok(Self { atoms, density })
    }

    pub fn transform(&self, t: f64) -> Complex64 {
        let mut acc = ComplexSum::new();
        for (x, w) in self.atoms.positions().iter().zip(self.atoms.weights()) {
            acc.add(w * unit_phase(x * t));
        }
        if let Some(d) = &self.density {
            acc.add(d.transform(t));
        }
        acc.value()
    }

    /// Smallest interval holding all atoms and the density support.
    pub fn hull(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in self.atoms.positions() {
            lo = lo.min(*x);
            hi = hi.max(*x);
        }
        if let Some(d) = &self.density {
            let (a, b) = d.extent();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn diameter(&self) -> f64 {
        self.hull().map_or(0.0, |(a, b)| b - a)
    }
}

/// (1/2R) ∫_{−R}^{R} f over panels no wider than `panel`; chunked, ordered reduction.
fn box_mean<F>(f: F, r: f64, panel: f64, max_panels: u64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let panels = ((2.0 * r / panel).ceil() as u64).max(1);
    if panels > max_panels {
        return Err(Error::GridCap {
            size: panels,
            cap: max_panels,
        });
    }
    let h = 2.0 * r / panels as f64;
    let (nodes, weights) = gauss_legendre(NODES);
    const CHUNK: u64 = 256;
    let chunks = panels.div_ceil(CHUNK);
    let partial: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = ComplexSum::new();
            for p in c * CHUNK..((c + 1) * CHUNK).min(panels) {
                let mid = -r + (p as f64 + 0.5) * h;
                for (x, w) in nodes.iter().zip(&weights) {
                    acc.add(f(mid + 0.5 * h * x) * (0.5 * h * w));
                }
            }
            acc.value()
        })
        .collect();
    let mut total = ComplexSum::new();
    for v in partial {
        total.add(v);
    }
    Ok(total.value() / (2.0 * r))
}

fn check_radii(r_list: &[f64]) -> Result<()> {
    if r_list.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("radii must be positive and finite"));
    }
    Ok(())
}

/// (2R)^{−1} ∫_{−R}^{R} ν̂(t) e^{2πiat} dt for each R; tends to ν({a}).
pub fn wiener_atom(nu: &FiniteMeasure, a: f64, r_list: &[f64]) -> Result<Vec<Complex64>> {
    check_radii(r_list)?;
    let spread = nu.hull().map_or(0.0, |(lo, hi)| (lo - a).abs().max((hi - a).abs()));
    r_list
        .iter()
        .map(|&r| {
            let panel = if spread > 0.0 { (1.0 / spread).min(2.0 * r) } else { 2.0 * r };
            box_mean(|t| nu.transform(t) * unit_phase(-a * t), r, panel, DEFAULT_MAX_PANELS)
        })
        .collect()
}

/// (2R)^{−1} ∫_{−R}^{R} |ν̂(t)|² dt for each R; tends to Σ_a |ν({a})|².
/// Quadrature nodes are spaced at most 1/(8·diameter) apart.
pub fn wiener_energy(nu: &FiniteMeasure, r_list: &[f64]) -> Result<Vec<f64>> {
    check_radii(r_list)?;
    let diam = nu.diameter();
    r_list
        .iter()
        .map(|&r| {
            let panel = if diam > 0.0 { (1.0 / diam).min(2.0 * r) } else { 2.0 * r };
            box_mean(|t| Complex64::new(nu.transform(t).norm_sqr(), 0.0), r, panel, DEFAULT_MAX_PANELS).map(|z| z.re)
        })
        .collect()
}

/// Σ_a |ν({a})|², the limit of [`wiener_energy`].
pub fn atom_energy(nu: &FiniteMeasure) -> f64 {
    let mut acc = CompensatedSum::new();
    for w in nu.atoms.weights() {
        acc.add(w.norm_sqr());
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxRegion;

    fn atoms(pts: &[(f64, f64)]) -> DiscreteMeasure {
        let a: Vec<(Vec<f64>, Complex64)> = pts.iter().map(|(x, w)| (vec![*x], Complex64::new(*w, 0.0))).collect();
        DiscreteMeasure::from_atoms(&a, BoxRegion::cube(1, 10.0)).unwrap()
    }

    fn gaussian(mass: f64) -> SampledDensity {
        let s = 1.0;
        SampledDensity::from_fn(-6.0, 6.0, 241, |x| {
            mass * (-x * x / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
        })
        .unwrap()
    }

    /// Σ w_k conj(w_l) sinc(2R(x_k − x_l)).
    fn pair_sum(m: &DiscreteMeasure, r: f64) -> f64 {
        let mut s = 0.0;
        for (x, w) in m.atoms() {
            for (y, v) in m.atoms() {
                s += (w * v.conj()).re * sinc(2.0 * r * (x[0] - y[0]));
            }
        }
        s
    }

    #[test]
    fn atom_examples() {
        let nu = FiniteMeasure::new(atoms(&[(0.0, 3.0)]), None).unwrap();
        for v in wiener_atom(&nu, 0.0, &[1.0, 10.0, 100.0]).unwrap() {
            assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        }
        let half = FiniteMeasure::new(atoms(&[(0.5, 1.0)]), None).unwrap();
        let v = wiener_atom(&half, 0.0, &[10.3, 100.3, 1000.3]).unwrap();
        for (z, r) in v.iter().zip([10.3, 100.3, 1000.3]) {
            assert!((z.re - sinc(r)).abs() < 1e-10);
        }
        assert!(v[2].norm() < 1e-3);
    }

    #[test]
    fn atom_with_gaussian_background() {
        let nu = FiniteMeasure::new(atoms(&[(0.0, 1.0)]), Some(gaussian(1.0))).unwrap();
        let v = wiener_atom(&nu, 0.0, &[1e4]).unwrap();
        assert!((v[0].re - 1.0).abs() < 0.02, "{}", v[0]);
    }

    #[test]
    fn energy_matches_pair_sum_oracle() {
        let m = atoms(&[(0.0, 1.0), (0.7, 1.0), (-2.3, 0.5)]);
        let nu = FiniteMeasure::new(m.clone(), None).unwrap();
        let rs = [1.0, 7.5, 100.0];
        let e = wiener_energy(&nu, &rs).unwrap();
        for (v, r) in e.iter().zip(rs) {
            assert!((v - pair_sum(&m, r)).abs() < 1e-9, "{v} vs {}", pair_sum(&m, r));
        }
        let single = FiniteMeasure::new(atoms(&[(0.0, 1.0)]), None).unwrap();
        assert!((wiener_energy(&single, &[3.0]).unwrap()[0] - 1.0).abs() < 1e-12);
        let two = FiniteMeasure::new(atoms(&[(0.0, 1.0), (1.3, 1.0)]), None).unwrap();
        let e = wiener_energy(&two, &[10.0, 1000.0]).unwrap();
        assert!((e[1] - 2.0).abs() < (e[0] - 2.0).abs().max(1e-3));
        assert!((e[1] - 2.0).abs() < 1e-2);
    }

    #[test]
    fn density_transform_matches_direct_sum() {
        let d = gaussian(1.0);
        for t in [0.0, 0.37, 12.5, 9_876.5] {
            let direct: Complex64 = d
                .values
                .iter()
                .enumerate()
                .map(|(k, f)| unit_phase(d.abscissa(k) * t) * f)
                .sum::<Complex64>()
                * (d.step * sinc(d.step * t).powi(2));
            assert!((d.transform(t) - direct).norm() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn gaussian_energy_vanishes() {
        let nu = FiniteMeasure::new(DiscreteMeasure::empty(BoxRegion::cube(1, 1.0)), Some(gaussian(1.0))).unwrap();
        let e = wiener_energy(&nu, &[10.0, 100.0, 1000.0]).unwrap();
        // ∫|ĝ|² = ∫g² = 1/(2√π) for σ = 1, so the mean is ≈ 0.282/(2R).
        let target = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((e[0] * 20.0 - target).abs() < 1e-3 * target, "{}", e[0] * 20.0);
        assert!(e[2] < 2e-4);
    }
}
