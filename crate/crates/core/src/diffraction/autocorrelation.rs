use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, GridIndex, PointSet};
use crate::measures::DiscreteMeasure;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationOptions {
    /// Differences with max-norm above this are dropped (None keeps all).
    pub cap_radius: Option<f64>,
    /// Divide each weight by Π_d (1 − |v_d|/2R), undoing the overlap loss at the truncation edge.
    /// The factor vanishes at |v_d| = 2R, so an unset cap defaults to R when this is on.
    pub triangle_correction: bool,
}


/// γ^R = (2R)^{−n} μ_R ∗ μ̃_R restricted to differences within the cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Autocorrelation {
    pub measure: DiscreteMeasure,
    pub r: f64,
    pub cap_radius: Option<f64>,
    pub triangle_correction: bool,
    /// Ordered pairs whose difference exceeded the cap.
    pub dropped_pairs: u64,
}

impl Autocorrelation {
    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    /// Effective support radius per axis of the difference window.
    fn reach(&self) -> f64 {
        let full = 2.0 * self.r;
        self.cap_radius.map_or(full, |c| c.min(full))
    }

    /// Kernel carrying one unit of Bragg intensity in the transform.
    pub fn kernel(&self) -> PeakKernel {
        let c = self.reach();
        let axis = if self.triangle_correction {
            KernelAxis::Box { reach: c }
        } else if c >= 2.0 * self.r {
            KernelAxis::Fejer { r: self.r }
        } else {
            KernelAxis::Tapered { reach: c, r: self.r }
        };
        PeakKernel {
            axes: vec![axis; self.dim()],
        }
    }
}

/// Per-axis shape of the transform of the difference window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelAxis {
    /// Indicator of [−c, c]: 2c·sinc(2cs).
    Box { reach: f64 },
    /// Triangle (1 − |v|/2R) on [−2R, 2R]: 2R·sinc²(2Rs).
    Fejer { r: f64 },
    /// Triangle truncated to [−c, c] with c < 2R.
    Tapered { reach: f64, r: f64 },
}

impl KernelAxis {
    pub fn height(&self) -> f64 {
        match *self {
            KernelAxis::Box { reach } => 2.0 * reach,
            KernelAxis::Fejer { r } => 2.0 * r,
            KernelAxis::Tapered { reach, r } => 2.0 * reach - reach * reach / (2.0 * r),
        }
    }

    pub fn shape(&self, s: f64) -> f64 {
        use crate::numeric::sinc;
        use std::f64::consts::PI;
        match *self {
            KernelAxis::Box { reach } => 2.0 * reach * sinc(2.0 * reach * s),
            KernelAxis::Fejer { r } => 2.0 * r * sinc(2.0 * r * s).powi(2),
            KernelAxis::Tapered { reach: c, r } => {
                let w = 2.0 * PI * s;
                if w.abs() * c < 1e-6 {
                    return self.height();
                }
                // ∫_{−c}^{c} |v| cos(wv) dv = 2[c sin(wc)/w + (cos(wc) − 1)/w²]
                let abs_moment = 2.0 * (c * (w * c).sin() / w + ((w * c).cos() - 1.0) / (w * w));
                2.0 * c * sinc(2.0 * c * s) - abs_moment / (2.0 * r)
            }
        }
    }

    /// Upper bound on |shape(s)|/height away from the centre.
    pub fn envelope(&self, s: f64) -> f64 {
        use std::f64::consts::PI;
        let d = s.abs();
        match *self {
            KernelAxis::Fejer { .. } => {
                let k = self.height();
                (1.0 / (PI * k * d).powi(2)).min(1.0)
            }
            _ => (1.0 / (PI * self.height() * d)).min(1.0),
        }
    }

    /// Scale on which the kernel decays, about half its main lobe.
    pub fn width(&self) -> f64 {
        1.0 / self.height()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakKernel {
    pub axes: Vec<KernelAxis>,
}

impl PeakKernel {
    pub fn height(&self) -> f64 {
        self.axes.iter().map(KernelAxis::height).product()
    }

    pub fn shape(&self, s: &[f64]) -> f64 {
        self.axes.iter().zip(s).map(|(a, x)| a.shape(*x)).product()
    }

    pub fn envelope(&self, s: &[f64]) -> f64 {
        self.axes.iter().zip(s).map(|(a, x)| a.envelope(*x)).product()
    }

    /// Dirichlet-type kernel 2R·sinc(2Rs) per axis, the shape of a measure's
    /// own transform truncated to [−R, R]^n.
    pub fn dirichlet(dim: usize, r: f64) -> Self {
        Self {
            axes: vec![KernelAxis::Box { reach: r }; dim],
        }
    }
}

/// Autocorrelation of the unit comb on `ps ∩ [−R, R]^n`.
pub fn autocorrelation_points(ps: &PointSet, r: f64, opts: &AutocorrelationOptions) -> Result<Autocorrelation> {
    autocorrelation_measure(&DiscreteMeasure::unit_comb(ps), r, opts)
}

/// Autocorrelation of `μ` restricted to `[−R, R]^n`: atoms at `λ' − λ` with
/// weight `μ(λ')·conj(μ(λ))/(2R)^n`. Only differences in the positive
/// half-space are accumulated; the rest are their conjugate mirror images.
pub fn autocorrelation_measure(mu: &DiscreteMeasure, r: f64, opts: &AutocorrelationOptions) -> Result<Autocorrelation> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("truncation radius must be positive"));
    }
    if let Some(c) = opts.cap_radius {
        if !(c >= 0.0) {
            return Err(Error::invalid("cap radius must be nonnegative"));
        }
    }
    let n = mu.dim();
    let cube = BoxRegion::cube(n, r);
    let local = match mu.bbox().intersect(&cube) {
        Some(b) => mu.restrict(&b)?,
        None => DiscreteMeasure::empty(cube.clone()),
    };
    let scale = (2.0 * r).powi(n as i32);
    let cap_radius = opts.cap_radius.or(opts.triangle_correction.then_some(r));
    let cap = cap_radius.unwrap_or(f64::INFINITY);
    let pos = local.positions();
    let w = local.weights();
    let count = local.len();

    // Half-space pairs (i, j) with x_j − x_i lexicographically positive.
    let pairs: Vec<(Vec<f64>, Vec<Complex64>)> = if n == 1 {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut d = Vec::new();
                let mut v = Vec::new();
                for j in i + 1..count {
                    let diff = pos[j] - pos[i];
                    if diff > cap {
                        break;
                    }
                    d.push(diff);
                    v.push(w[j] * w[i].conj());
                }
                (d, v)
            })
            .collect()
    } else {
        let reach = if cap.is_finite() { cap } else { 2.0 * r };
        let index = GridIndex::new(n, pos, (reach / 8.0).max(1e-9));
        (0..count)
            .into_par_iter()
            .map(|i| {
                let p = local.position(i);
                let mut d = Vec::new();
                let mut v = Vec::new();
                let candidates = if cap.is_finite() {
                    index.within(p, cap * (n as f64).sqrt())
                } else {
                    (0..count).collect()
                };
                for j in candidates {
                    let q = local.position(j);
                    let diff: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
                    if diff.iter().fold(0.0f64, |m, x| m.max(x.abs())) > cap {
                        continue;
                    }
                    let positive = diff.iter().find(|x| **x != 0.0).is_some_and(|x| *x > 0.0);
                    if positive {
                        d.extend_from_slice(&diff);
                        v.push(w[j] * w[i].conj());
                    }
                }
                (d, v)
            })
            .collect()
    };

    let mut kept_half = 0u64;
    let mut diffs = Vec::new();
    let mut weights = Vec::new();
    for (d, v) in pairs {
        kept_half += v.len() as u64;
        diffs.extend(d);
        weights.extend(v);
    }
    let tol = mu.dedup_tol();
    let half = DiscreteMeasure::new(
        n,
        diffs,
        weights,
        BoxRegion::cube(n, 2.0 * r + tol),
        tol,
    )?;

    let correction = |v: &[f64]| -> f64 {
        if opts.triangle_correction {
            v.iter().map(|x| (1.0 - x.abs() / (2.0 * r)).max(f64::MIN_POSITIVE)).product()
        } else {
            1.0
        }
    };
    let mut positions = Vec::with_capacity((2 * half.len() + 1) * n);
    let mut out_w = Vec::with_capacity(2 * half.len() + 1);
    let diag: f64 = crate::numeric::compensated_sum(w.iter().map(|z| z.norm_sqr()));
    if count > 0 {
        positions.extend(std::iter::repeat_n(0.0, n));
        out_w.push(Complex64::new(diag / scale, 0.0));
    }
    for (p, z) in half.atoms() {
        let c = correction(p) * scale;
        positions.extend_from_slice(p);
        out_w.push(z / c);
        positions.extend(p.iter().map(|x| -x));
        out_w.push(z.conj() / c);
    }
    let measure = DiscreteMeasure::new(n, positions, out_w, BoxRegion::cube(n, 2.0 * r + tol), tol)?;
    let total_pairs = (count as u64) * (count as u64);
    let kept = count as u64 + 2 * kept_half;
    Ok(Autocorrelation {
        measure,
        r,
        cap_radius,
        triangle_correction: opts.triangle_correction,
        dropped_pairs: total_pairs - kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(lo: i64, hi: i64) -> PointSet {
        let v: Vec<f64> = (lo..=hi).map(|k| k as f64).collect();
        PointSet::from_1d(&v, lo as f64, hi as f64).unwrap()
    }

    #[test]
    fn integer_comb_weights() {
        let ac = autocorrelation_points(&ints(-2, 2), 2.0, &AutocorrelationOptions::default()).unwrap();
        let expect = [(0.0, 5.0), (1.0, 4.0), (2.0, 3.0), (3.0, 2.0), (4.0, 1.0)];
        assert_eq!(ac.measure.len(), 9);
        for (v, m) in expect {
            assert_eq!(ac.measure.weight_at(&[v], 1e-9).re, m / 4.0);
            assert_eq!(ac.measure.weight_at(&[-v], 1e-9).re, m / 4.0);
        }
        assert_eq!(ac.dropped_pairs, 0);
    }

    #[test]
    fn triangle_correction_caps_at_r_by_default() {
        let opts = AutocorrelationOptions { triangle_correction: true, ..Default::default() };
        let ac = autocorrelation_points(&ints(-4, 4), 4.0, &opts).unwrap();
        assert_eq!(ac.cap_radius, Some(4.0));
        assert_eq!(ac.measure.len(), 9);
        // 9 − |v| pairs, divided by 8·(1 − |v|/8).
        for v in 0..=4 {
            let expect = (9.0 - v as f64) / (8.0 - v as f64);
            assert!((ac.measure.weight_at(&[v as f64], 1e-9).re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn single_point_and_weighted_atom() {
        let one = PointSet::from_1d(&[0.3], -1.0, 1.0).unwrap();
        let ac = autocorrelation_points(&one, 1.0, &AutocorrelationOptions::default()).unwrap();
        assert_eq!(ac.measure.len(), 1);
        assert_eq!(ac.measure.weight_at(&[0.0], 1e-9).re, 0.5);
        let mu = DiscreteMeasure::from_atoms(&[(vec![0.0], Complex64::new(1.0, 2.0))], BoxRegion::cube(1, 1.0)).unwrap();
        let ac = autocorrelation_measure(&mu, 2.0, &AutocorrelationOptions::default()).unwrap();
        assert_eq!(ac.measure.weights(), &[Complex64::new(5.0 / 4.0, 0.0)]);
    }

    #[test]
    fn hermitian_symmetry_is_exact() {
        let atoms: Vec<(Vec<f64>, Complex64)> = (0..40)
            .map(|k| {
                let x = k as f64 * 0.731 - 14.0;
                (vec![x], Complex64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            })
            .collect();
        let mu = DiscreteMeasure::from_atoms(&atoms, BoxRegion::cube(1, 20.0)).unwrap();
        let ac = autocorrelation_measure(&mu, 20.0, &AutocorrelationOptions::default()).unwrap();
        for (p, w) in ac.measure.atoms() {
            assert_eq!(ac.measure.weight_at(&[-p[0]], 1e-12), w.conj());
        }
    }

    #[test]
    fn cap_drops_pairs_and_keeps_origin() {
        let ac = autocorrelation_points(
            &ints(-5, 5),
            5.0,
            &AutocorrelationOptions {
                cap_radius: Some(0.0),
                triangle_correction: false,
            },
        )
        .unwrap();
        assert_eq!(ac.measure.len(), 1);
        assert_eq!(ac.dropped_pairs, 121 - 11);
    }

    #[test]
    fn brute_force_2d() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.5, 2.0], vec![1.5, -1.0]];
        let ps = PointSet::from_points(&pts, BoxRegion::cube(2, 3.0)).unwrap();
        let ac = autocorrelation_points(&ps, 3.0, &AutocorrelationOptions::default()).unwrap();
        assert_eq!(ac.measure.len(), 13);
        for a in &pts {
            for b in &pts {
                let v = [a[0] - b[0], a[1] - b[1]];
                let expect = if v == [0.0, 0.0] { 4.0 / 36.0 } else { 1.0 / 36.0 };
                assert!((ac.measure.weight_at(&v, 1e-9).re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kernel_heights() {
        let k = KernelAxis::Tapered { reach: 10.0, r: 50.0 };
        assert!((k.shape(0.0) - k.height()).abs() < 1e-12);
        assert!((k.shape(1e-9) - k.height()).abs() < 1e-6);
        assert!((KernelAxis::Fejer { r: 5.0 }.shape(0.0) - 10.0).abs() < 1e-12);
        // Tapered at c = 2R coincides with Fejér.
        let t = KernelAxis::Tapered { reach: 10.0, r: 5.0 };
        for s in [0.013, 0.21, 0.77] {
            assert!((t.shape(s) - KernelAxis::Fejer { r: 5.0 }.shape(s)).abs() < 1e-9);
        }
    }
}
