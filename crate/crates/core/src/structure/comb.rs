use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutproject::{enumerate_box, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Lattice, DEFAULT_DEDUP_TOL};
use crate::measures::DiscreteMeasure;
use crate::numeric::{unit_phase, ComplexSum};

/// P(λ) = Σ c_k exp(2πi⟨ω_k, λ⟩).
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    freqs: Vec<Vec<f64>>,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TrigRepr {
    freqs: Vec<Vec<f64>>,
    coeffs_re_im: Vec<[f64; 2]>,
}

impl Serialize for TrigPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrigRepr {
            freqs: self.freqs.clone(),
            coeffs_re_im: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TrigRepr::deserialize(d)?;
        let dim = r.freqs.first().map_or(1, Vec::len);
        let coeffs = r.coeffs_re_im.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        TrigPolynomial::new(dim, r.freqs, coeffs).map_err(serde::de::Error::custom)
    }
}

impl TrigPolynomial {
    /// Frequencies must be pairwise distinct; zero coefficients are dropped.
    pub fn new(dim: usize, freqs: Vec<Vec<f64>>, coeffs: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(Error::invalid("frequency and coefficient counts differ"));
        }
        if let Some(f) = freqs.iter().find(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: f.len(),
            });
        }
        if freqs.iter().flatten().any(|v| !v.is_finite()) || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite polynomial term"));
        }
        for (i, a) in freqs.iter().enumerate() {
            for b in &freqs[i + 1..] {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                if d <= DEFAULT_DEDUP_TOL {
                    return Err(Error::invalid(format!("repeated frequency {a:?}")));
                }
            }
        }
        let (freqs, coeffs) = freqs.into_iter().zip(coeffs).filter(|(_, c)| c.norm() > 0.0).unzip();
        Ok(Self { dim, freqs, coeffs })
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::new(dim, vec![vec![0.0; dim]], vec![c]).expect("single finite term")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[f64], Complex64)> + '_ {
        self.freqs.iter().map(Vec::as_slice).zip(self.coeffs.iter().copied())
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = ComplexSum::new();
        for (w, c) in self.terms() {
            let dot: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
            // unit_phase is e^{−2πi·}; the polynomial uses the opposite sign.
            acc.add(c * unit_phase(-dot));
        }
        acc.value()
    }
}

/// μ = Σ_j Σ_{λ ∈ L+τ_j} P_j(λ) δ_λ.
#[derive(Clone, Debug, PartialEq)]
pub struct CombRepresentation {
    pub lattice: Lattice,
    pub translates: Vec<Vec<f64>>,
    pub polys: Vec<TrigPolynomial>,
    /// Largest fit error over the atoms the representation was recovered from.
    pub residual: f64,
}

#[derive(Serialize, Deserialize)]
struct CombRepr {
    lattice_basis: Vec<Vec<f64>>,
    translates: Vec<Vec<f64>>,
    polys: Vec<TrigPolynomial>,
    residual: f64,
}

impl Serialize for CombRepresentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CombRepr {
            lattice_basis: (0..self.lattice.dim()).map(|i| self.lattice.basis_vector(i)).collect(),
            translates: self.translates.clone(),
            polys: self.polys.clone(),
            residual: self.residual,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CombRepresentation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CombRepr::deserialize(d)?;
        let lattice = Lattice::from_rows(&r.lattice_basis).map_err(serde::de::Error::custom)?;
        CombRepresentation::new(lattice, r.translates, r.polys, r.residual).map_err(serde::de::Error::custom)
    }
}

impl CombRepresentation {
    pub fn new(lattice: Lattice, translates: Vec<Vec<f64>>, polys: Vec<TrigPolynomial>, residual: f64) -> Result<Self> {
        let dim = lattice.dim();
        if translates.is_empty() {
            return Err(Error::Empty("a comb representation needs at least one coset"));
        }
        if translates.len() != polys.len() {
            return Err(Error::invalid("one polynomial per translate is required"));
        }
        if let Some(t) = translates.iter().find(|t| t.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: t.len(),
            });
        }
        if let Some(p) = polys.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        let tol = coset_tol(&lattice);
        for (i, a) in translates.iter().enumerate() {
            for b in &translates[i + 1..] {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                if lattice.distance_to_lattice(&d) <= tol {
                    return Err(Error::invalid(format!("translates {a:?} and {b:?} agree mod L")));
                }
            }
        }
        Ok(Self {
            lattice,
            translates,
            polys,
            residual,
        })
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn cosets(&self) -> usize {
        self.translates.len()
    }

    /// Index of the coset within `tol` of `x`, nearest first.
    pub fn coset_of(&self, x: &[f64], tol: f64) -> Option<usize> {
        self.translates
            .iter()
            .enumerate()
            .map(|(j, t)| {
                let d: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
                (j, self.lattice.distance_to_lattice(&d))
            })
            .filter(|(_, d)| *d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
    }

    /// μ({x}); zero off the cosets.
    pub fn weight_at(&self, x: &[f64], tol: f64) -> Complex64 {
        self.coset_of(x, tol).map_or(Complex64::new(0.0, 0.0), |j| self.polys[j].eval(x))
    }

    /// The represented measure restricted to `bbox`.
    pub fn to_measure(&self, bbox: &BoxRegion) -> Result<DiscreteMeasure> {
        let dim = self.dim();
        let mut positions = Vec::new();
        let mut weights = Vec::new();
        for (t, p) in self.translates.iter().zip(&self.polys) {
            let shifted = bbox.translate(&t.iter().map(|v| -v).collect::<Vec<_>>());
            let pts = enumerate_box(&self.lattice, &shifted, DEFAULT_ENUMERATION_CAP)?;
            for q in pts.chunks_exact(dim) {
                let x: Vec<f64> = q.iter().zip(t).map(|(a, b)| a + b).collect();
                if bbox.contains(&x) {
                    weights.push(p.eval(&x));
                    positions.extend(x);
                }
            }
        }
        DiscreteMeasure::new(dim, positions, weights, bbox.clone(), DEFAULT_DEDUP_TOL)
    }

    /// Fourier transform restricted to `freq_box`: atoms at ω + γ* (γ* ∈ L*)
    /// with weight c·e^{−2πi⟨γ*, τ⟩}/det L, summed over cosets and terms.
    pub fn spectrum(&self, freq_box: &BoxRegion) -> Result<DiscreteMeasure> {
        let dim = self.dim();
        let dual = self.lattice.dual();
        let det = self.lattice.det().abs();
        let mut positions = Vec::new();
        let mut weights = Vec::new();
        for (t, p) in self.translates.iter().zip(&self.polys) {
            for (w, c) in p.terms() {
                let shifted = freq_box.translate(&w.iter().map(|v| -v).collect::<Vec<_>>());
                let pts = enumerate_box(&dual, &shifted, DEFAULT_ENUMERATION_CAP)?;
                for g in pts.chunks_exact(dim) {
                    let x: Vec<f64> = g.iter().zip(w).map(|(a, b)| a + b).collect();
                    if freq_box.contains(&x) {
                        let dot: f64 = g.iter().zip(t).map(|(a, b)| a * b).sum();
                        weights.push(c * unit_phase(dot) / det);
                        positions.extend(x);
                    }
                }
            }
        }
        DiscreteMeasure::new(dim, positions, weights, freq_box.clone(), DEFAULT_DEDUP_TOL)
    }

    /// max |μ(λ) − P(λ)| over the atoms of `mu` and the represented atoms in
    /// its box: equality of the evaluated measures, not of the parameters.
    pub fn evaluated_error(&self, mu: &DiscreteMeasure) -> Result<f64> {
        let own = self.to_measure(mu.bbox())?;
        let diff = mu.linear_combination(Complex64::new(1.0, 0.0), &own, Complex64::new(-1.0, 0.0))?;
        Ok(diff.max_weight())
    }
}

/// Tolerance for coset identity: 1e-9 of the lattice scale.
pub(crate) fn coset_tol(lattice: &Lattice) -> f64 {
    1e-9 * lattice.det().abs().powf(1.0 / lattice.dim() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polynomial_eval_and_validation() {
        let p = TrigPolynomial::new(1, vec![vec![0.0], vec![0.25]], vec![c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((p.eval(&[1.0]) - c(2.0, 1.0)).norm() < 1e-15);
        assert!(TrigPolynomial::new(1, vec![vec![0.1], vec![0.1]], vec![c(1.0, 0.0); 2]).is_err());
        let z = TrigPolynomial::new(1, vec![vec![0.1]], vec![c(0.0, 0.0)]).unwrap();
        assert!(z.is_empty());
    }

    #[test]
    fn measure_and_spectrum_of_integer_comb() {
        let rep = CombRepresentation::new(
            Lattice::scaled_integer(1, 1.0).unwrap(),
            vec![vec![0.0]],
            vec![TrigPolynomial::constant(1, c(1.0, 0.0))],
            0.0,
        )
        .unwrap();
        let m = rep.to_measure(&BoxRegion::cube(1, 10.0)).unwrap();
        assert_eq!(m.len(), 21);
        let s = rep.spectrum(&BoxRegion::cube(1, 2.5)).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.weights().iter().all(|w| (w - c(1.0, 0.0)).norm() < 1e-12));
        assert_eq!(rep.evaluated_error(&m).unwrap(), 0.0);
    }

    #[test]
    fn translated_coset_spectrum_phases() {
        // Comb on 2Z + 1/2: atoms at k/2 with weight e^{−πik/2}/2.
        let rep = CombRepresentation::new(
            Lattice::scaled_integer(1, 2.0).unwrap(),
            vec![vec![0.5]],
            vec![TrigPolynomial::constant(1, c(1.0, 0.0))],
            0.0,
        )
        .unwrap();
        let s = rep.spectrum(&BoxRegion::cube(1, 1.1)).unwrap();
        for (x, w) in s.atoms() {
            let k = (2.0 * x[0]).round();
            let expect = unit_phase(0.5 * k * 0.5) / 2.0;
            assert!((w - expect).norm() < 1e-12, "{x:?} {w}");
        }
    }

    #[test]
    fn duplicate_translates_rejected_and_json_round_trip() {
        let l = Lattice::scaled_integer(1, 1.0).unwrap();
        let one = TrigPolynomial::constant(1, c(1.0, 0.0));
        assert!(CombRepresentation::new(l.clone(), vec![vec![0.2], vec![1.2]], vec![one.clone(); 2], 0.0).is_err());
        let rep = CombRepresentation::new(l, vec![vec![0.0], vec![1.0 / 3.0]], vec![one.clone(), one], 1e-15).unwrap();
        let s = serde_json::to_string(&rep).unwrap();
        assert!(s.contains("lattice_basis") && s.contains("coeffs_re_im"));
        let back: CombRepresentation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);
    }
}
