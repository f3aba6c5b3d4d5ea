//! The shifted-overlap measures `ν_h` built from a spectrum and their
//! support check against a truncated difference set.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::measure::DiscreteMeasure;
use super::transform::{ft_grid, FrequencyGrid};
use crate::error::{Error, Result};
use crate::geometry::{GridIndex, PointSet};
use crate::numeric::{cardinal_bspline, compensated_sum};

pub const DEFAULT_MATCH_TOL: f64 = 1e-6;

/// For each atom `s`, the index of the atom nearest to `s + h` within `tol`.
fn shifted_partners(spec: &DiscreteMeasure, h: &[f64], tol: f64) -> Result<Vec<Option<usize>>> {
    if h.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: h.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("match tolerance must be positive"));
    }
    if spec.is_empty() {
        return Ok(vec![]);
    }
    let idx = GridIndex::new(spec.dim(), spec.positions(), tol.max(1e-12) * 4.0);
    let mut out = Vec::with_capacity(spec.len());
    let mut q = vec![0.0; spec.dim()];
    for i in 0..spec.len() {
        for (d, slot) in q.iter_mut().enumerate() {
            *slot = spec.position(i)[d] + h[d];
        }
        let best = idx
            .within(&q, tol)
            .into_iter()
            .map(|j| {
                let d2: f64 = spec.position(j).iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
                (j, d2)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out.push(best.map(|(j, _)| j));
    }
    Ok(out)
}

/// `S_h = S ∩ (S − h)`: atom locations `s` with an atom within `tol` of `s + h`.
pub fn s_h(spec: &DiscreteMeasure, h: &[f64], tol: f64) -> Result<PointSet> {
    let partners = shifted_partners(spec, h, tol)?;
    let coords: Vec<f64> = partners
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_some())
        .flat_map(|(i, _)| spec.position(i).to_vec())
        .collect();
    PointSet::new(spec.dim(), coords, spec.bbox().clone(), spec.dedup_tol())
}

/// `ν_h = Σ_{s ∈ S_h} μ̂(s)·conj(μ̂(s + h)) δ_s`.
pub fn nu_h(spec: &DiscreteMeasure, h: &[f64], tol: f64) -> Result<DiscreteMeasure> {
    let partners = shifted_partners(spec, h, tol)?;
    let mut positions = Vec::new();
    let mut weights = Vec::new();
    for (i, p) in partners.iter().enumerate() {
        if let Some(j) = p {
            positions.extend_from_slice(spec.position(i));
            weights.push(spec.weights()[i] * spec.weights()[*j].conj());
        }
    }
    DiscreteMeasure::new(spec.dim(), positions, weights, spec.bbox().clone(), spec.dedup_tol())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakOptions {
    /// Radius of the neighbourhood around the support set counted as "inside".
    pub neighborhood: f64,
    /// Tolerance for matching `s + h` against atoms.
    pub match_tol: f64,
    /// Order of the B-spline taper applied across the extent of `ν_h`
    /// (0 disables the taper).
    pub taper_order: u32,
}

impl Default for LeakOptions {
    fn default() -> Self {
        Self {
            neighborhood: 1e-2,
            match_tol: DEFAULT_MATCH_TOL,
            taper_order: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakReport {
    /// Outside mass over total mass of `|ν̂_h|` on the grid.
    pub leak: f64,
    pub outside_mass: f64,
    pub total_mass: f64,
    pub atoms: usize,
    /// False when `ν_h` sits on a single location, so `|ν̂_h|` is constant.
    pub localizable: bool,
    pub taper_order: u32,
    pub neighborhood: f64,
}

/// Taper weights `Π_d M_k(k u_d / 2) / M_k(0)` with `u_d ∈ [−1, 1]` spanning
/// the bounding box of the atoms.
fn taper(nu: &DiscreteMeasure, order: u32) -> DiscreteMeasure {
    if order == 0 || nu.is_empty() {
        return nu.clone();
    }
    let dim = nu.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for (p, _) in nu.atoms() {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let k = order as f64;
    let peak = cardinal_bspline(order, 0.0);
    let positions = nu.positions().to_vec();
    let weights: Vec<Complex64> = nu
        .atoms()
        .map(|(p, w)| {
            let mut f = 1.0;
            for d in 0..dim {
                let hw = 0.5 * (hi[d] - lo[d]);
                if hw > 0.0 {
                    // Pad by one part in 10^3 so the extreme atoms keep a little weight.
                    let u = (p[d] - 0.5 * (lo[d] + hi[d])) / (hw * 1.001);
                    f *= cardinal_bspline(order, u * k / 2.0) / peak;
                }
            }
            w * f
        })
        .collect();
    DiscreteMeasure::new(dim, positions, weights, nu.bbox().clone(), nu.dedup_tol()).expect("same support")
}

/// Evaluates the transform of (tapered) `ν_h` on `grid` and measures the share
/// of `|ν̂_h|` lying farther than `opts.neighborhood` from `support_set`.
pub fn nu_h_support_check(
    spec: &DiscreteMeasure,
    h: &[f64],
    support_set: &PointSet,
    grid: &FrequencyGrid,
    opts: &LeakOptions,
) -> Result<LeakReport> {
    if support_set.dim() != spec.dim() || grid.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: support_set.dim(),
        });
    }
    let nu = nu_h(spec, h, opts.match_tol)?;
    if nu.is_empty() {
        return Err(Error::ZeroMass);
    }
    let localizable = nu.len() >= 2;
    let tapered = taper(&nu, opts.taper_order);
    let trace = ft_grid(&tapered, grid)?;
    let mags: Vec<f64> = trace.values.iter().map(|v| v.norm()).collect();
    let total = compensated_sum(mags.iter().copied());
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let outside = if support_set.is_empty() {
        total
    } else {
        let idx = GridIndex::new(support_set.dim(), support_set.coords(), opts.neighborhood.max(1e-12));
        compensated_sum(mags.iter().enumerate().filter_map(|(i, m)| {
            let (_, d) = idx.nearest(&grid.point(i)).expect("nonempty support");
            (d > opts.neighborhood).then_some(*m)
        }))
    };
    Ok(LeakReport {
        leak: outside / total,
        outside_mass: outside * grid.cell_volume(),
        total_mass: total * grid.cell_volume(),
        atoms: nu.len(),
        localizable,
        taper_order: opts.taper_order,
        neighborhood: opts.neighborhood,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxRegion;

    fn spec(points: &[f64], weights: &[Complex64]) -> DiscreteMeasure {
        let atoms: Vec<(Vec<f64>, Complex64)> = points.iter().zip(weights).map(|(p, w)| (vec![*p], *w)).collect();
        DiscreteMeasure::from_atoms(&atoms, BoxRegion::cube(1, 20.0)).unwrap()
    }

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
    }

    #[test]
    fn s_h_examples() {
        let s = spec(&[0.0, 1.0, 2.0], &re(&[1.0, 1.0, 1.0]));
        assert_eq!(s_h(&s, &[1.0], 1e-6).unwrap().coords(), &[0.0, 1.0]);
        assert!(s_h(&s, &[5.0], 1e-6).unwrap().is_empty());
        assert_eq!(s_h(&s, &[0.0], 1e-6).unwrap().coords(), s.positions());
        let ints: Vec<f64> = (-10..=10).map(|k| k as f64).collect();
        let z = spec(&ints, &re(&[1.0; 21]));
        let expect: Vec<f64> = (-10..=7).map(|k| k as f64).collect();
        assert_eq!(s_h(&z, &[3.0], 1e-6).unwrap().coords(), expect.as_slice());
    }

    #[test]
    fn nu_h_examples() {
        let s = spec(&[0.0, 1.0, 2.0], &re(&[1.0, 2.0, 3.0]));
        let nu = nu_h(&s, &[1.0], 1e-6).unwrap();
        assert_eq!(nu.positions(), &[0.0, 1.0]);
        assert_eq!(nu.weights(), re(&[2.0, 6.0]).as_slice());

        let s = spec(&[0.0, 1.0], &[Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]);
        let nu = nu_h(&s, &[1.0], 1e-6).unwrap();
        assert_eq!(nu.weights(), &[Complex64::new(0.0, 1.0)]);

        let s = spec(&[0.0, 1.5, 3.0], &[Complex64::new(0.3, -1.0), Complex64::new(-2.0, 0.5), Complex64::new(1.0, 1.0)]);
        let nu0 = nu_h(&s, &[0.0], 1e-6).unwrap();
        assert!(nu0.weights().iter().all(|w| w.im == 0.0 && w.re >= 0.0));
    }

    #[test]
    fn comb_leak_is_small() {
        let ints: Vec<f64> = (-500..500).map(|k| k as f64).collect();
        let atoms: Vec<(Vec<f64>, Complex64)> = ints.iter().map(|p| (vec![*p], Complex64::new(1.0, 0.0))).collect();
        let s = DiscreteMeasure::from_atoms(&atoms, BoxRegion::cube(1, 500.0)).unwrap();
        let support: Vec<f64> = (-3..=3).map(|k| k as f64).collect();
        let support = PointSet::from_1d(&support, -3.0, 3.0).unwrap();
        let grid = FrequencyGrid::linspace(-2.5, 2.5, 5001).unwrap();
        let rep = nu_h_support_check(&s, &[1.0], &support, &grid, &LeakOptions::default()).unwrap();
        assert!(rep.leak < 0.05, "{rep:?}");
        assert!(rep.localizable);
    }

    #[test]
    fn singleton_is_not_localizable() {
        let s = spec(&[0.25], &re(&[2.0]));
        let support = PointSet::from_1d(&[0.0], -1.0, 1.0).unwrap();
        let grid = FrequencyGrid::linspace(-2.0, 2.0, 401).unwrap();
        let rep = nu_h_support_check(&s, &[0.0], &support, &grid, &LeakOptions::default()).unwrap();
        assert!(!rep.localizable);
        assert!(rep.leak > 0.99);
        let far = nu_h_support_check(&s, &[7.0], &support, &grid, &LeakOptions::default());
        assert!(matches!(far, Err(Error::ZeroMass)));
    }
}
