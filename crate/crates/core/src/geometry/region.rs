use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lo_d, hi_d]` per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::invalid("box must have at least one axis"));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite()) || a > b {
                return Err(Error::invalid(format!("bad box axis [{a}, {b}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-r, r]^n`.
    pub fn cube(dim: usize, r: f64) -> Self {
        Self {
            lo: vec![-r; dim],
            hi: vec![r; dim],
        }
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|p| p[0]).collect(),
            pairs.iter().map(|p| p[1]).collect(),
        )
    }

    pub fn pairs(&self) -> Vec<[f64; 2]> {
        self.lo.iter().zip(&self.hi).map(|(&a, &b)| [a, b]).collect()
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    /// Shrink every side by `margin`; `None` if the box collapses.
    pub fn shrink(&self, margin: f64) -> Option<Self> {
        let lo: Vec<f64> = self.lo.iter().map(|a| a + margin).collect();
        let hi: Vec<f64> = self.hi.iter().map(|b| b - margin).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            None
        } else {
            Some(Self { lo, hi })
        }
    }

    pub fn translate(&self, v: &[f64]) -> Self {
        Self {
            lo: self.lo.iter().zip(v).map(|(a, d)| a + d).collect(),
            hi: self.hi.iter().zip(v).map(|(b, d)| b + d).collect(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            None
        } else {
            Some(Self { lo, hi })
        }
    }

    /// Half-width if the box is a cube centered at the origin.
    pub fn symmetric_half_width(&self) -> Option<f64> {
        let r = self.hi[0];
        let ok = self
            .lo
            .iter()
            .zip(&self.hi)
            .all(|(a, b)| (a + b).abs() <= 1e-12 * b.abs().max(1.0) && (b - r).abs() <= 1e-12 * r.abs().max(1.0));
        ok.then_some(r)
    }

    /// Largest distance from the origin to a point of the box (max-norm).
    pub fn max_abs(&self) -> f64 {
        self.lo
            .iter()
            .chain(&self.hi)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
