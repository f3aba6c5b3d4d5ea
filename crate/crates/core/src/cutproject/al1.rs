//! A real band-limited function with zero integral that is strictly positive
//! outside a computable radius.
//!
//! ψ(x) = sinc⁴(ax) + ½[sinc⁴(ax + ½) + sinc⁴(ax − ½)] with a = 1/6 is
//! positive everywhere and ψ̂(t) = M₄(t/a)(1 + cos(πt/a))/a lives on [−1/3, 1/3].
//! φ = αψ − βψ² with α = 1/∫ψ and β = 1/∫ψ² has ∫φ = 0 and φ̂ on [−2/3, 2/3].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::numeric::{cardinal_bspline, gauss_legendre, sinc};

const DEFAULT_SCALE: f64 = 1.0 / 6.0;
const GL_NODES: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Al1Function {
    /// Frequency scale `a` of ψ.
    pub scale: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Radius from the tail bound beyond which φ > 0.
    pub certified_radius: f64,
    /// max(certified radius, requested radius).
    pub reported_radius: f64,
}

impl Al1Function {
    pub fn psi(&self, x: f64) -> f64 {
        let u = self.scale * x;
        sinc(u).powi(4) + 0.5 * (sinc(u + 0.5).powi(4) + sinc(u - 0.5).powi(4))
    }

    pub fn psi_transform(&self, t: f64) -> f64 {
        let a = self.scale;
        let m = cardinal_bspline(4, t / a);
        if m == 0.0 {
            return 0.0;
        }
        m * (1.0 + (PI * t / a).cos()) / a
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.psi(x);
        p * (self.alpha - self.beta * p)
    }

    /// (ψ̂ ∗ ψ̂)(t), exact up to quadrature on each smooth piece.
    pub fn psi_transform_autoconv(&self, t: f64) -> f64 {
        let a = self.scale;
        let s = 2.0 * a;
        let lo = (-s).max(t - s);
        let hi = s.min(t + s);
        if hi <= lo {
            return 0.0;
        }
        let mut knots: Vec<f64> = (-2..=2)
            .flat_map(|k| [k as f64 * a, t - k as f64 * a])
            .filter(|x| *x > lo && *x < hi)
            .collect();
        knots.push(lo);
        knots.push(hi);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let (nodes, weights) = gauss_legendre(GL_NODES);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in nodes.iter().zip(&weights) {
                let u = c + h * x;
                total += wt * h * self.psi_transform(u) * self.psi_transform(t - u);
            }
        }
        total
    }

    pub fn transform(&self, t: f64) -> f64 {
        if t.abs() >= self.transform_radius() {
            return 0.0;
        }
        self.alpha * self.psi_transform(t) - self.beta * self.psi_transform_autoconv(t)
    }

    /// φ̂ vanishes for |t| ≥ 4a.
    pub fn transform_radius(&self) -> f64 {
        4.0 * self.scale
    }

    /// Radius beyond which |φ(x)| ≤ `threshold`, from ψ ≤ 2/(π(a|x| − ½))⁴.
    pub fn envelope_radius(&self, threshold: f64) -> f64 {
        let c = 2.0 * (self.alpha + 2.0 * self.beta);
        (0.5 + (c / threshold).powf(0.25) / PI) / self.scale
    }

    /// ∫φ, which the construction makes zero.
    pub fn integral(&self) -> f64 {
        self.transform(0.0)
    }
}

/// ∫ψ² = ∫ψ̂², integrated piecewise between the spline knots.
fn psi_square_integral(f: &Al1Function) -> f64 {
    let a = f.scale;
    let (nodes, weights) = gauss_legendre(GL_NODES);
    let mut total = 0.0;
    for k in -2..2 {
        let (l, r) = (k as f64 * a, (k + 1) as f64 * a);
        let (c, h) = (0.5 * (l + r), 0.5 * (r - l));
        for (x, w) in nodes.iter().zip(&weights) {
            total += w * h * f.psi_transform(c + h * x).powi(2);
        }
    }
    total
}

/// Builds φ = αψ − βψ². The reported radius is the larger of the certified
/// positivity radius and `r_target`.
pub fn lemma_al1_function(r_target: f64) -> Al1Function {
    let mut f = Al1Function {
        scale: DEFAULT_SCALE,
        alpha: 0.0,
        beta: 0.0,
        certified_radius: 0.0,
        reported_radius: 0.0,
    };
    // ∫ψ = ψ̂(0) = 2·M₄(0)/a.
    f.alpha = 1.0 / f.psi_transform(0.0);
    f.beta = 1.0 / psi_square_integral(&f);
    // φ > 0 iff ψ < α/β; the tail bound gives that for a|x| > ½ + (2β/α)^{1/4}/π.
    let r = (0.5 + (2.0 * f.beta / f.alpha).powf(0.25) / PI) / f.scale;
    f.certified_radius = r * (1.0 + 1e-9);
    f.reported_radius = f.certified_radius.max(if r_target.is_finite() { r_target } else { 0.0 });
    f
}
