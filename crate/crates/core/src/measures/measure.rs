use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{canonicalize, check_dim, BoxRegion, GridIndex, PointSet, DEFAULT_DEDUP_TOL};
use crate::numeric::{unit_phase, ComplexSum};

/// Weights with modulus below this are dropped after any arithmetic.
pub const PURGE_THRESHOLD: f64 = 1e-14;

/// Finite complex measure `Σ w_k δ_{λ_k}` in R^n with a truncation box.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    positions: Vec<f64>,
    weights: Vec<Complex64>,
    bbox: BoxRegion,
    dedup_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    dim: usize,
    atoms: Vec<(Vec<f64>, f64, f64)>,
    #[serde(rename = "box")]
    bbox: Vec<[f64; 2]>,
    #[serde(default = "default_tol")]
    dedup_tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_DEDUP_TOL
}

impl Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureRepr {
            dim: self.dim,
            atoms: self
                .atoms()
                .map(|(p, w)| (p.to_vec(), w.re, w.im))
                .collect(),
            bbox: self.bbox.pairs(),
            dedup_tol: self.dedup_tol,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MeasureRepr::deserialize(d)?;
        let mut positions = Vec::with_capacity(r.atoms.len() * r.dim);
        let mut weights = Vec::with_capacity(r.atoms.len());
        for (p, re, im) in r.atoms {
            if p.len() != r.dim {
                return Err(serde::de::Error::custom("atom dimension mismatch"));
            }
            positions.extend(p);
            weights.push(Complex64::new(re, im));
        }
        let bbox = BoxRegion::from_pairs(&r.bbox).map_err(serde::de::Error::custom)?;
        DiscreteMeasure::new(r.dim, positions, weights, bbox, r.dedup_tol).map_err(serde::de::Error::custom)
    }
}

impl DiscreteMeasure {
    /// Builds a measure: sorts atoms, merges locations within `dedup_tol`
    /// (weights summed) and purges weights below [`PURGE_THRESHOLD`].
    pub fn new(
        dim: usize,
        positions: Vec<f64>,
        weights: Vec<Complex64>,
        bbox: BoxRegion,
        dedup_tol: f64,
    ) -> Result<Self> {
        check_dim(dim)?;
        if bbox.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bbox.dim(),
            });
        }
        if positions.len() != weights.len() * dim {
            return Err(Error::invalid("positions and weights disagree in length"));
        }
        if positions.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite atom"));
        }
        if let Some(p) = positions.chunks_exact(dim).find(|p| !bbox.contains(p)) {
            return Err(Error::invalid(format!("atom {p:?} outside box")));
        }
        let (reps, group) = canonicalize(dim, &positions, dedup_tol);
        let m = reps.len() / dim;
        let mut sums = vec![ComplexSum::new(); m];
        for (g, w) in group.iter().zip(&weights) {
            sums[*g].add(*w);
        }
        let mut out_pos = Vec::with_capacity(reps.len());
        let mut out_w = Vec::with_capacity(m);
        for (k, s) in sums.iter().enumerate() {
            let w = s.value();
            if w.norm() >= PURGE_THRESHOLD {
                out_pos.extend_from_slice(&reps[k * dim..(k + 1) * dim]);
                out_w.push(w);
            }
        }
        Ok(Self {
            dim,
            positions: out_pos,
            weights: out_w,
            bbox,
            dedup_tol,
        })
    }

    pub fn from_atoms(atoms: &[(Vec<f64>, Complex64)], bbox: BoxRegion) -> Result<Self> {
        let dim = bbox.dim();
        let mut positions = Vec::with_capacity(atoms.len() * dim);
        let mut weights = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            positions.extend_from_slice(p);
            weights.push(*w);
        }
        Self::new(dim, positions, weights, bbox, DEFAULT_DEDUP_TOL)
    }

    /// Real-weight 1D measure.
    pub fn from_1d(points: &[f64], weights: &[f64], lo: f64, hi: f64) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::invalid("points and weights disagree in length"));
        }
        Self::new(
            1,
            points.to_vec(),
            weights.iter().map(|w| Complex64::new(*w, 0.0)).collect(),
            BoxRegion::new(vec![lo], vec![hi])?,
            DEFAULT_DEDUP_TOL,
        )
    }

    /// Unit-weight comb on a point set.
    pub fn unit_comb(ps: &PointSet) -> Self {
        Self {
            dim: ps.dim(),
            positions: ps.coords().to_vec(),
            weights: vec![Complex64::new(1.0, 0.0); ps.len()],
            bbox: ps.bbox().clone(),
            dedup_tol: ps.dedup_tol(),
        }
    }

    pub fn empty(bbox: BoxRegion) -> Self {
        Self {
            dim: bbox.dim(),
            positions: vec![],
            weights: vec![],
            bbox,
            dedup_tol: DEFAULT_DEDUP_TOL,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn bbox(&self) -> &BoxRegion {
        &self.bbox
    }

    pub fn dedup_tol(&self) -> f64 {
        self.dedup_tol
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], Complex64)> + '_ {
        self.positions.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// Support as a point set (same box and tolerance).
    pub fn support(&self) -> PointSet {
        PointSet::new(self.dim, self.positions.clone(), self.bbox.clone(), self.dedup_tol)
            .expect("measure invariants imply point-set invariants")
    }

    pub fn total_mass(&self) -> Complex64 {
        let mut acc = ComplexSum::new();
        for w in &self.weights {
            acc.add(*w);
        }
        acc.value()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// Weight of the atom within `tol` of `x` (zero if none).
    pub fn weight_at(&self, x: &[f64], tol: f64) -> Complex64 {
        self.atoms()
            .filter(|(p, _)| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= tol * tol)
            .map(|(_, w)| w)
            .next()
            .unwrap_or_default()
    }

    fn with_weights(&self, weights: Vec<Complex64>) -> Self {
        let (positions, weights): (Vec<&[f64]>, Vec<Complex64>) = self
            .positions
            .chunks_exact(self.dim)
            .zip(weights)
            .filter(|(_, w)| w.norm() >= PURGE_THRESHOLD)
            .unzip();
        Self {
            dim: self.dim,
            positions: positions.concat(),
            weights,
            bbox: self.bbox.clone(),
            dedup_tol: self.dedup_tol,
        }
    }

    /// Shift every atom (and the box) by `v`.
    pub fn translate(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let positions = self
            .positions
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(v).map(|(a, b)| a + b))
            .collect();
        Self::new(self.dim, positions, self.weights.clone(), self.bbox.translate(v), self.dedup_tol)
    }

    /// Multiply the weight at `λ` by `exp(−2πi⟨ω, λ⟩)`.
    pub fn modulate(&self, omega: &[f64]) -> Result<Self> {
        if omega.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: omega.len(),
            });
        }
        let weights = self
            .atoms()
            .map(|(p, w)| {
                let dot: f64 = p.iter().zip(omega).map(|(a, b)| a * b).sum();
                w * unit_phase(dot)
            })
            .collect();
        Ok(self.with_weights(weights))
    }

    /// Multiply all weights by `c`; `c = 0` yields the empty measure.
    pub fn scale_weights(&self, c: Complex64) -> Self {
        self.with_weights(self.weights.iter().map(|w| w * c).collect())
    }

    pub fn conj(&self) -> Self {
        self.with_weights(self.weights.iter().map(|w| w.conj()).collect())
    }

    /// `α·self + β·other`; the box becomes the hull of both boxes.
    pub fn linear_combination(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let bbox = BoxRegion::new(
            self.bbox.lo.iter().zip(&other.bbox.lo).map(|(a, b)| a.min(*b)).collect(),
            self.bbox.hi.iter().zip(&other.bbox.hi).map(|(a, b)| a.max(*b)).collect(),
        )?;
        let mut positions = self.positions.clone();
        positions.extend_from_slice(&other.positions);
        let mut weights: Vec<Complex64> = self.weights.iter().map(|w| w * alpha).collect();
        weights.extend(other.weights.iter().map(|w| w * beta));
        Self::new(self.dim, positions, weights, bbox, self.dedup_tol.max(other.dedup_tol))
    }

    /// `μ̃(E) = conj(μ(−E))`.
    pub fn reflected_conj(&self) -> Self {
        let positions: Vec<f64> = self.positions.iter().map(|v| -v).collect();
        let bbox = BoxRegion {
            lo: self.bbox.hi.iter().map(|v| -v).collect(),
            hi: self.bbox.lo.iter().map(|v| -v).collect(),
        };
        Self::new(
            self.dim,
            positions,
            self.weights.iter().map(|w| w.conj()).collect(),
            bbox,
            self.dedup_tol,
        )
        .expect("reflection preserves invariants")
    }

    /// `(μ + μ̃)/2`, whose transform is real.
    pub fn hermitian_part(&self) -> Result<Self> {
        let half = Complex64::new(0.5, 0.0);
        self.linear_combination(half, &self.reflected_conj(), half)
    }

    /// Restriction to a sub-box.
    pub fn restrict(&self, region: &BoxRegion) -> Result<Self> {
        let bbox = self
            .bbox
            .intersect(region)
            .ok_or_else(|| Error::invalid("restriction box does not meet the measure box"))?;
        let (positions, weights): (Vec<&[f64]>, Vec<Complex64>) =
            self.atoms().filter(|(p, _)| bbox.contains(p)).unzip();
        Ok(Self {
            dim: self.dim,
            positions: positions.concat(),
            weights,
            bbox,
            dedup_tol: self.dedup_tol,
        })
    }

    /// Keep atoms with `|w| ≥ floor`.
    pub fn above(&self, floor: f64) -> Self {
        let (positions, weights): (Vec<&[f64]>, Vec<Complex64>) =
            self.atoms().filter(|(_, w)| w.norm() >= floor).unzip();
        Self {
            dim: self.dim,
            positions: positions.concat(),
            weights,
            bbox: self.bbox.clone(),
            dedup_tol: self.dedup_tol,
        }
    }

    /// `sup_x |μ|(x + B_1)`, taken over closed unit balls centred at atoms.
    pub fn translation_bounded_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if self.dim == 1 {
            let x = &self.positions;
            let a: Vec<f64> = self.weights.iter().map(|w| w.norm()).collect();
            let (mut lo, mut hi) = (0usize, 0usize);
            let mut best = 0.0f64;
            for i in 0..x.len() {
                while x[lo] < x[i] - 1.0 {
                    lo += 1;
                }
                while hi < x.len() && x[hi] <= x[i] + 1.0 {
                    hi += 1;
                }
                let s = crate::numeric::compensated_sum(a[lo..hi].iter().copied());
                best = best.max(s);
            }
            return best;
        }
        let idx = GridIndex::new(self.dim, &self.positions, 0.5);
        (0..self.len())
            .map(|i| {
                crate::numeric::compensated_sum(
                    idx.within(self.position(i), 1.0).into_iter().map(|j| self.weights[j].norm()),
                )
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn comb(n: i64) -> DiscreteMeasure {
        let p: Vec<f64> = (-n..=n).map(|k| k as f64).collect();
        DiscreteMeasure::from_1d(&p, &vec![1.0; p.len()], -(n as f64), n as f64).unwrap()
    }

    #[test]
    fn merges_and_purges() {
        let m = DiscreteMeasure::from_1d(&[0.0, 1e-12, 1.0, 2.0], &[1.0, 2.0, 1e-15, -1.0], -1.0, 3.0).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights()[0], c(3.0));
        assert_eq!(m.position(1), &[2.0]);
    }

    #[test]
    fn modulate_examples() {
        let d0 = DiscreteMeasure::from_1d(&[0.0], &[1.0], -1.0, 1.0).unwrap();
        assert_eq!(d0.modulate(&[0.37]).unwrap().weights()[0], c(1.0));
        let d1 = DiscreteMeasure::from_1d(&[1.0], &[1.0], -1.0, 1.0).unwrap();
        let w = d1.modulate(&[0.5]).unwrap().weights()[0];
        assert!((w - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn translate_comb_keeps_atoms_inside_overlap() {
        let z = comb(10);
        let t = z.translate(&[1.0]).unwrap();
        let region = BoxRegion::new(vec![-9.0], vec![10.0]).unwrap();
        assert_eq!(
            z.restrict(&region).unwrap().positions(),
            t.restrict(&region).unwrap().positions()
        );
    }

    #[test]
    fn zero_scaling_empties() {
        assert!(comb(3).scale_weights(c(0.0)).is_empty());
    }

    #[test]
    fn translation_bounded_examples() {
        assert_eq!(comb(10).translation_bounded_norm(), 3.0);
        let d = DiscreteMeasure::from_1d(&[0.0], &[5.0], -1.0, 1.0).unwrap();
        assert_eq!(d.translation_bounded_norm(), 5.0);
    }

    #[test]
    fn hermitian_part_is_conjugate_symmetric() {
        let m = DiscreteMeasure::from_atoms(
            &[(vec![0.5], Complex64::new(1.0, 2.0)), (vec![-0.2], Complex64::new(0.0, -1.0))],
            BoxRegion::cube(1, 1.0),
        )
        .unwrap();
        let h = m.hermitian_part().unwrap();
        for (p, w) in h.atoms() {
            let mirror = h.weight_at(&[-p[0]], 1e-12);
            assert!((mirror - w.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = DiscreteMeasure::from_atoms(
            &[(vec![0.5, 1.0], Complex64::new(1.0, 2.0)), (vec![-0.2, 0.0], Complex64::new(0.1, -1.0))],
            BoxRegion::cube(2, 1.0),
        )
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: DiscreteMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
