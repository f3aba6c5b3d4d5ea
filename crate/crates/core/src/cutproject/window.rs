use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::al1::Al1Function;
use super::surrogate::ZeroProductWindow;
use crate::error::{Error, Result};
use crate::numeric::{cardinal_bspline, sinc};

/// Weight-generating functions on the internal space (m = 1) with exactly
/// known transform support. `eval` is φ, `transform` is φ̂(t) = ∫ φ(x) e^{−2πixt} dx.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowFunction {
    /// φ(x) = sinc(wx)^k with w = 2a/k; φ̂ = M_k(t/w)/w supported on [−a, a].
    Bspline { order: u32, half_width: f64 },
    /// Order-2 B-spline: φ = sinc², φ̂ a triangle on [−a, a].
    Fejer { half_width: f64 },
    /// |ψ|² of a B-spline-type ψ.
    Squared { inner: Box<WindowFunction> },
    /// αψ − βψ² with zero integral and positive tails.
    LemmaAl1(Al1Function),
    /// Band-limited nonnegative function vanishing on a finite set.
    ZeroProduct(ZeroProductWindow),
}

impl WindowFunction {
    pub fn bspline(order: u32, half_width: f64) -> Result<Self> {
        let wf = WindowFunction::Bspline { order, half_width };
        wf.validate()?;
        Ok(wf)
    }

    pub fn squared(inner: WindowFunction) -> Result<Self> {
        let wf = WindowFunction::Squared { inner: Box::new(inner) };
        wf.validate()?;
        Ok(wf)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WindowFunction::Bspline { order, half_width } => {
                if *order == 0 || *order > 32 {
                    return Err(Error::invalid("B-spline order must be in 1..=32"));
                }
                if !(*half_width > 0.0 && half_width.is_finite()) {
                    return Err(Error::invalid("half-width must be positive"));
                }
                Ok(())
            }
            WindowFunction::Fejer { half_width } => {
                WindowFunction::Bspline { order: 2, half_width: *half_width }.validate()
            }
            WindowFunction::Squared { inner } => {
                inner.validate()?;
                if inner.as_bspline().is_none() {
                    return Err(Error::invalid("squared kind requires a B-spline or Fejér inner function"));
                }
                Ok(())
            }
            WindowFunction::LemmaAl1(_) | WindowFunction::ZeroProduct(_) => Ok(()),
        }
    }

    /// Equivalent `(order, half_width)` for the B-spline family.
    pub fn as_bspline(&self) -> Option<(u32, f64)> {
        match self {
            WindowFunction::Bspline { order, half_width } => Some((*order, *half_width)),
            WindowFunction::Fejer { half_width } => Some((2, *half_width)),
            WindowFunction::Squared { inner } => inner.as_bspline().map(|(k, a)| (2 * k, 2.0 * a)),
            _ => None,
        }
    }

    /// φ(x).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WindowFunction::LemmaAl1(f) => f.eval(x),
            WindowFunction::ZeroProduct(z) => z.eval(x),
            _ => {
                let (k, a) = self.as_bspline().expect("validated B-spline family");
                let w = 2.0 * a / k as f64;
                sinc(w * x).powi(k as i32)
            }
        }
    }

    /// φ̂(t).
    pub fn transform(&self, t: f64) -> Complex64 {
        match self {
            WindowFunction::LemmaAl1(f) => Complex64::new(f.transform(t), 0.0),
            WindowFunction::ZeroProduct(z) => z.transform(t),
            _ => {
                let (k, a) = self.as_bspline().expect("validated B-spline family");
                let w = 2.0 * a / k as f64;
                Complex64::new(cardinal_bspline(k, t / w) / w, 0.0)
            }
        }
    }

    /// Closed interval outside which φ̂ vanishes.
    pub fn transform_support(&self) -> (f64, f64) {
        match self {
            WindowFunction::LemmaAl1(f) => {
                let s = f.transform_radius();
                (-s, s)
            }
            WindowFunction::ZeroProduct(z) => {
                let s = z.transform_radius();
                (-s, s)
            }
            _ => {
                let (_, a) = self.as_bspline().expect("validated B-spline family");
                (-a, a)
            }
        }
    }

    /// Whether φ ≥ 0 everywhere.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            WindowFunction::Squared { .. } | WindowFunction::ZeroProduct(_) => true,
            WindowFunction::LemmaAl1(_) => false,
            _ => self.as_bspline().is_some_and(|(k, _)| k % 2 == 0),
        }
    }

    /// A radius beyond which |φ(x)| ≤ `threshold`.
    pub fn envelope_radius(&self, threshold: f64) -> Option<f64> {
        if !(threshold > 0.0) {
            return None;
        }
        match self {
            WindowFunction::LemmaAl1(f) => Some(f.envelope_radius(threshold)),
            WindowFunction::ZeroProduct(z) => Some(z.envelope_radius(threshold)),
            _ => {
                // |sinc(wx)|^k ≤ (π w |x|)^{-k}
                let (k, a) = self.as_bspline()?;
                let w = 2.0 * a / k as f64;
                Some(threshold.powf(-1.0 / k as f64) / (std::f64::consts::PI * w))
            }
        }
    }

    /// Short human-readable description, e.g. `bspline:4:0.9`.
    pub fn label(&self) -> String {
        match self {
            WindowFunction::Bspline { order, half_width } => format!("bspline:{order}:{half_width}"),
            WindowFunction::Fejer { half_width } => format!("fejer:{half_width}"),
            WindowFunction::Squared { inner } => format!("squared:{}", inner.label()),
            WindowFunction::LemmaAl1(_) => "al1".into(),
            WindowFunction::ZeroProduct(z) => format!("zero-product:{}", z.zeros.len()),
        }
    }

    /// Parses `bspline:K:A`, `fejer:A`, `squared:<spec>`, `al1` or `al1:R`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.splitn(2, ':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{s}' in window spec '{spec}'")))
        };
        match parts[0] {
            "bspline" => {
                let rest = parts.get(1).ok_or_else(|| Error::Parse("bspline:K:A expected".into()))?;
                let (k, a) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse("bspline:K:A expected".into()))?;
                let order = k
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad order '{k}'")))?;
                Self::bspline(order, num(a)?)
            }
            "fejer" => {
                let a = num(parts.get(1).ok_or_else(|| Error::Parse("fejer:A expected".into()))?)?;
                let wf = WindowFunction::Fejer { half_width: a };
                wf.validate()?;
                Ok(wf)
            }
            "squared" => Self::squared(Self::parse(
                parts.get(1).ok_or_else(|| Error::Parse("squared:<spec> expected".into()))?,
            )?),
            "al1" => {
                let r = match parts.get(1) {
                    Some(s) => num(s)?,
                    None => 0.0,
                };
                Ok(WindowFunction::LemmaAl1(super::al1::lemma_al1_function(r)))
            }
            other => Err(Error::Parse(format!("unknown window function kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    #[test]
    fn bspline_transform_pair_is_consistent() {
        // φ(0) = ∫ φ̂ and φ̂(0) = ∫ φ (the latter via band-limited trapezoid sums).
        for (k, a) in [(2u32, 0.5), (4, 0.9), (3, 1.2)] {
            let wf = WindowFunction::bspline(k, a).unwrap();
            let int_hat = integrate(|t| wf.transform(t).re, -a, a, 16 * k as usize, 12);
            assert!((int_hat - wf.eval(0.0)).abs() < 1e-12, "k={k}");
            let h = 0.37;
            let s: f64 = (-200_000..=200_000).map(|i| wf.eval(i as f64 * h)).sum::<f64>() * h;
            assert!((s - wf.transform(0.0).re).abs() < 1e-4 * (1.0 + s.abs()), "k={k} s={s}");
        }
    }

    #[test]
    fn squared_doubles_order_and_support() {
        let inner = WindowFunction::bspline(2, 0.45).unwrap();
        let sq = WindowFunction::squared(inner.clone()).unwrap();
        assert_eq!(sq.as_bspline(), Some((4, 0.9)));
        assert_eq!(sq.transform_support(), (-0.9, 0.9));
        for x in [0.0, 0.3, 1.7, -4.2] {
            assert!((sq.eval(x) - inner.eval(x).powi(2)).abs() < 1e-15);
        }
        assert!(sq.is_nonnegative());
        assert!(!WindowFunction::bspline(1, 0.5).unwrap().is_nonnegative());
    }

    #[test]
    fn transform_vanishes_outside_support() {
        let wf = WindowFunction::bspline(4, 0.9).unwrap();
        assert_eq!(wf.transform(0.9).re, 0.0);
        assert_eq!(wf.transform(-1.3).re, 0.0);
        assert!(wf.transform(0.89).re > 0.0);
    }

    #[test]
    fn envelope_bounds_tail() {
        let wf = WindowFunction::bspline(4, 0.9).unwrap();
        let r = wf.envelope_radius(1e-8).unwrap();
        for i in 0..1000 {
            let x = r + i as f64 * 0.013;
            assert!(wf.eval(x).abs() <= 1e-8);
        }
    }

    #[test]
    fn parse_specs() {
        assert_eq!(WindowFunction::parse("bspline:4:0.9").unwrap().as_bspline(), Some((4, 0.9)));
        assert_eq!(WindowFunction::parse("fejer:0.5").unwrap().as_bspline(), Some((2, 0.5)));
        assert_eq!(
            WindowFunction::parse("squared:bspline:2:0.45").unwrap().as_bspline(),
            Some((4, 0.9))
        );
        assert!(WindowFunction::parse("gauss:1").is_err());
        assert!(WindowFunction::parse("bspline:0:1").is_err());
    }
}
