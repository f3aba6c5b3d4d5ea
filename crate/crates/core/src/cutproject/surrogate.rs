//! Finite band-limited surrogate for a function vanishing on a prescribed set:
//! φ = |ψ|² with ψ(x) = sinc^p(ηx) · Π_q sin(πδ(x − q)) / N.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{cardinal_bspline, sinc};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroProductWindow {
    /// Points where φ vanishes exactly.
    pub zeros: Vec<f64>,
    /// Frequency of each sine factor.
    pub delta: f64,
    /// Scale and power of the sinc envelope.
    pub eta: f64,
    pub power: u32,
    /// Location used to normalize, and ln N = ln|ψ·N|(anchor).
    pub anchor: f64,
    pub log_norm: f64,
    /// Coefficients of Π_q sin²(πδ(x − q)) in powers of e^{2πiδx}, from −K to K.
    pub laurent: Vec<Complex64>,
}

impl ZeroProductWindow {
    /// Builds the surrogate with φ̂ supported on `[−bandwidth, bandwidth]`,
    /// split evenly between the sine product and the sinc envelope.
    pub fn new(zeros: Vec<f64>, bandwidth: f64, power: u32) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::Infeasible("no zeros to impose".into()));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) || power == 0 {
            return Err(Error::invalid("surrogate bandwidth and power must be positive"));
        }
        let k = zeros.len();
        let delta = bandwidth / (2.0 * k as f64);
        let eta = bandwidth / (2.0 * power as f64);
        let mut w = ZeroProductWindow {
            zeros,
            delta,
            eta,
            power,
            anchor: 0.0,
            log_norm: 0.0,
            laurent: Vec::new(),
        };
        // Normalize at the largest |ψ| over a fine scan of the main sinc lobe.
        let step = 1.0 / (32.0 * bandwidth);
        let half = 1.0 / eta;
        let n = (2.0 * half / step).ceil() as i64;
        let (anchor, log_norm) = (0..=n)
            .map(|i| {
                let x = -half + i as f64 * step;
                (x, w.log_abs_unnormalized(x))
            })
            .fold((0.0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        if !log_norm.is_finite() {
            return Err(Error::Infeasible("surrogate vanishes on its whole normalization scan".into()));
        }
        w.anchor = anchor;
        w.log_norm = log_norm;
        w.laurent = laurent_coefficients(&w.zeros, delta);
        Ok(w)
    }

    /// ln|sinc^p(ηx) Π sin(πδ(x − q))|.
    fn log_abs_unnormalized(&self, x: f64) -> f64 {
        let g = sinc(self.eta * x).abs();
        let mut acc = self.power as f64 * g.ln();
        for q in &self.zeros {
            acc += (PI * self.delta * (x - q)).sin().abs().ln();
        }
        acc
    }

    pub fn eval(&self, x: f64) -> f64 {
        let l = self.log_abs_unnormalized(x);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            (2.0 * (l - self.log_norm)).exp()
        }
    }

    /// φ̂(t) = N⁻² Σ_m c_m G(t − mδ) with G the transform of sinc^{2p}(η·).
    pub fn transform(&self, t: f64) -> Complex64 {
        let k = self.zeros.len() as i64;
        let order = 2 * self.power;
        let scale = (-2.0 * self.log_norm).exp() / self.eta;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.laurent.iter().enumerate() {
            let m = i as i64 - k;
            let g = cardinal_bspline(order, (t - m as f64 * self.delta) / self.eta);
            if g != 0.0 {
                acc += c * g;
            }
        }
        acc * scale
    }

    pub fn transform_radius(&self) -> f64 {
        self.zeros.len() as f64 * self.delta + self.power as f64 * self.eta
    }

    /// From |φ(x)| ≤ (πη|x|)^{−2p} / N².
    pub fn envelope_radius(&self, threshold: f64) -> f64 {
        let p2 = 2.0 * self.power as f64;
        ((-threshold.ln() - 2.0 * self.log_norm) / p2).exp() / (PI * self.eta)
    }

    /// Largest |φ| over the zero set (zero up to rounding).
    pub fn max_at_zeros(&self) -> f64 {
        self.zeros.iter().map(|q| self.eval(*q)).fold(0.0, f64::max)
    }
}

/// Π_q (½ − ¼ e^{−2πiδq} z − ¼ e^{2πiδq} z⁻¹), coefficients from z^{−K} to z^{K}.
fn laurent_coefficients(zeros: &[f64], delta: f64) -> Vec<Complex64> {
    let k = zeros.len();
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * k + 1];
    c[k] = Complex64::new(1.0, 0.0);
    let mut next = c.clone();
    for (done, q) in zeros.iter().enumerate() {
        let zeta = Complex64::from_polar(1.0, 2.0 * PI * delta * q);
        let (lo, hi) = (k - done, k + done);
        for v in next.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        for m in lo..=hi {
            let v = c[m];
            next[m] += v * 0.5;
            next[m + 1] -= v * zeta.conj() * 0.25;
            next[m - 1] -= v * zeta * 0.25;
        }
        std::mem::swap(&mut c, &mut next);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::gauss_legendre;

    fn sample() -> ZeroProductWindow {
        ZeroProductWindow::new(vec![3.7, 5.2, -4.4, 9.9], 0.5, 4).unwrap()
    }

    #[test]
    fn vanishes_on_zeros_and_is_normalized() {
        let w = sample();
        assert_eq!(w.max_at_zeros(), 0.0);
        assert!((w.eval(w.anchor) - 1.0).abs() < 1e-12);
        assert!((w.transform_radius() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laurent_product_matches_direct() {
        let w = sample();
        let k = w.zeros.len() as i64;
        for x in [0.3, -2.0, 7.7] {
            let z = Complex64::from_polar(1.0, 2.0 * PI * w.delta * x);
            let poly: Complex64 = w
                .laurent
                .iter()
                .enumerate()
                .map(|(i, c)| c * z.powi((i as i64 - k) as i32))
                .sum();
            let direct: f64 = w.zeros.iter().map(|q| (PI * w.delta * (x - q)).sin().powi(2)).product();
            assert!((poly.re - direct).abs() < 1e-14 && poly.im.abs() < 1e-14);
        }
    }

    #[test]
    fn transform_inverts_to_eval() {
        let w = sample();
        let r = w.transform_radius();
        let (nodes, weights) = gauss_legendre(32);
        // G has knots every η, shifted by multiples of δ; fine panels keep quadrature exact enough.
        let panels = 2000;
        for x in [0.0, 1.1, -3.0] {
            let mut s = Complex64::new(0.0, 0.0);
            for p in 0..panels {
                let l = -r + 2.0 * r * p as f64 / panels as f64;
                let h = r / panels as f64;
                for (u, wt) in nodes.iter().zip(&weights) {
                    let t = l + h + h * u;
                    s += w.transform(t) * Complex64::from_polar(1.0, 2.0 * PI * x * t) * (wt * h);
                }
            }
            assert!((s.re - w.eval(x)).abs() < 1e-8 && s.im.abs() < 1e-8, "x={x} {s} {}", w.eval(x));
        }
    }

    #[test]
    fn envelope_bounds_tail() {
        let w = sample();
        let r = w.envelope_radius(1e-6);
        for i in 0..2000 {
            let x = r + i as f64 * 0.31;
            assert!(w.eval(x) <= 1e-6 && w.eval(-x) <= 1e-6);
        }
    }
}
