//! Small numerical building blocks shared across modules.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Neumaier-compensated accumulator for real sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex sums (componentwise).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `exp(-2πi x)` with the argument reduced to [-1/2, 1/2] before the trig call.
#[inline]
pub fn unit_phase(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (2.0 * PI * r).sin_cos();
    Complex64::new(c, -s)
}

/// Normalized sinc: sin(πx)/(πx).
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        let y = PI * x;
        1.0 - y * y / 6.0
    } else {
        let y = PI * x;
        y.sin() / y
    }
}

/// Centered cardinal B-spline of order `k` (support [-k/2, k/2], unit integral).
pub fn cardinal_bspline(k: u32, x: f64) -> f64 {
    let half = k as f64 / 2.0;
    if x <= -half || x >= half {
        return 0.0;
    }
    // Use symmetry so the truncated power sum runs over the short side.
    let x = -x.abs();
    let mut acc = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for i in 1..k {
        fact *= i as f64;
    }
    for j in 0..=k {
        let arg = x + half - j as f64;
        if arg > 0.0 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * arg.powi(k as i32 - 1);
        }
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    (acc / fact).max(0.0)
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` split into `pieces` Gauss-Legendre panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / pieces as f64;
    let mut acc = CompensatedSum::new();
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        let mid = lo + h / 2.0;
        for (x, w) in xs.iter().zip(&ws) {
            acc.add(w * f(mid + x * h / 2.0) * h / 2.0);
        }
    }
    acc.value()
}

/// Volume of the Euclidean unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut v = vec![1.0, 2.0];
    for k in 2..=n {
        v.push(v[k - 2] * 2.0 * PI / k as f64);
    }
    v[n]
}
