use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full-rank lattice in R^d. Basis vectors are the rows of `basis`, so the
/// lattice point with integer coefficients `k` is `kᵀ B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    dim: usize,
    basis: Vec<f64>,
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeRepr {
            dim: self.dim(),
            basis: self.basis_row_major(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = LatticeRepr::deserialize(d)?;
        Lattice::from_row_major(r.dim, &r.basis).map_err(serde::de::Error::custom)
    }
}

impl Lattice {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != basis.ncols() || basis.nrows() == 0 {
            return Err(Error::invalid("lattice basis must be square and nonempty"));
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite basis entry"));
        }
        let det = basis.determinant();
        let scale: f64 = basis
            .row_iter()
            .map(|r| r.norm())
            .product::<f64>()
            .max(f64::MIN_POSITIVE);
        if det.abs() <= 1e-12 * scale {
            return Err(Error::SingularBasis(det));
        }
        let inverse = basis
            .clone()
            .try_inverse()
            .ok_or(Error::SingularBasis(det))?;
        Ok(Self {
            basis,
            inverse,
            det: det.abs(),
        })
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(d, &flat)
    }

    /// The scaled integer lattice `c·Z^d`.
    pub fn scaled_integer(dim: usize, c: f64) -> Result<Self> {
        Self::new(DMatrix::from_diagonal_element(dim, dim, c))
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.basis[(i, j)]);
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> Vec<f64> {
        self.basis.row(i).iter().copied().collect()
    }

    /// Dual lattice {y : ⟨x, y⟩ ∈ Z for all x ∈ L}, basis (B⁻¹)ᵀ.
    pub fn dual(&self) -> Self {
        let basis = self.inverse.transpose();
        let inverse = self.basis.transpose();
        Self {
            basis,
            inverse,
            det: 1.0 / self.det,
        }
    }

    /// Lattice point for integer coefficients.
    pub fn point(&self, coeffs: &[i64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (i, &k) in coeffs.iter().enumerate() {
            if k == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += k as f64 * self.basis[(i, j)];
            }
        }
        out
    }

    /// Point with real coefficients: `cᵀ B`.
    pub fn point_real(&self, coeffs: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|j| coeffs.iter().enumerate().map(|(i, c)| c * self.basis[(i, j)]).sum())
            .collect()
    }

    /// Real coefficients of `x` in the basis: `x B⁻¹`.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|j| (0..d).map(|i| x[i] * self.inverse[(i, j)]).sum())
            .collect()
    }

    /// Distance (Euclidean) from `x` to the nearest lattice point found by
    /// rounding coordinates and checking the neighbouring coefficient cube.
    pub fn distance_to_lattice(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let c = self.coords(x);
        let base: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
        let mut best = f64::INFINITY;
        let total = 3usize.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let k: Vec<i64> = base
                .iter()
                .map(|b| {
                    let off = (rem % 3) as i64 - 1;
                    rem /= 3;
                    b + off
                })
                .collect();
            let p = self.point(&k);
            let dist: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            best = best.min(dist);
        }
        best
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.basis.scale(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn determinant_and_dual_involution() {
        let phi = golden();
        let l = Lattice::from_row_major(2, &[1.0, 1.0, phi, -1.0 / phi]).unwrap();
        assert!((l.det() - 5f64.sqrt()).abs() < 1e-12 * 5f64.sqrt());
        let dd = l.dual().dual();
        for (a, b) in dd.basis().iter().zip(l.basis().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((l.dual().det() * l.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_pairing_is_integral() {
        let l = Lattice::from_row_major(3, &[1.0, 0.2, 0.0, 0.3, 2.0, 0.1, 0.0, 0.5, 1.5]).unwrap();
        let dual = l.dual();
        for i in 0..3 {
            for j in 0..3 {
                let a = l.basis_vector(i);
                let b = dual.basis_vector(j);
                let ip: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coordinates_invert_points() {
        let l = Lattice::from_row_major(2, &[2.0, 0.5, 0.0, 1.0]).unwrap();
        let p = l.point(&[3, -2]);
        let c = l.coords(&p);
        assert!((c[0] - 3.0).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-12);
        assert!(l.distance_to_lattice(&p) < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        assert!(matches!(
            Lattice::from_row_major(2, &[1.0, 2.0, 2.0, 4.0]),
            Err(Error::SingularBasis(_))
        ));
    }

    #[test]
    fn serde_round_trip() {
        let l = Lattice::from_row_major(2, &[1.0, 0.25, 0.0, 3.0]).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        let back: Lattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back.basis(), l.basis());
    }
}
