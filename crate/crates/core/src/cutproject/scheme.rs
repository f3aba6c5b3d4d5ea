use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{canonicalize, BoxRegion, Lattice, PointSet, DEFAULT_DEDUP_TOL};

/// Default cap on the number of outer coefficient tuples visited while
/// enumerating lattice points in a box.
pub const DEFAULT_ENUMERATION_CAP: u64 = 200_000_000;

/// Finite union of disjoint half-open boxes `[lo, hi)` in internal space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<WindowBoxRepr>", into = "Vec<WindowBoxRepr>")]
pub struct Window {
    dim: usize,
    boxes: Vec<BoxRegion>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WindowBoxRepr {
    Interval([f64; 2]),
    Box(Vec<[f64; 2]>),
}

impl TryFrom<Vec<WindowBoxRepr>> for Window {
    type Error = Error;
    fn try_from(v: Vec<WindowBoxRepr>) -> Result<Self> {
        let boxes = v
            .iter()
            .map(|b| match b {
                WindowBoxRepr::Interval(p) => BoxRegion::from_pairs(&[*p]),
                WindowBoxRepr::Box(ps) => BoxRegion::from_pairs(ps),
            })
            .collect::<Result<Vec<_>>>()?;
        let dim = boxes.first().map_or(1, BoxRegion::dim);
        Window::new(dim, boxes)
    }
}

impl From<Window> for Vec<WindowBoxRepr> {
    fn from(w: Window) -> Self {
        w.boxes
            .iter()
            .map(|b| {
                if b.dim() == 1 {
                    WindowBoxRepr::Interval([b.lo[0], b.hi[0]])
                } else {
                    WindowBoxRepr::Box(b.pairs())
                }
            })
            .collect()
    }
}

impl Window {
    /// Degenerate boxes are dropped; overlapping boxes are rejected.
    pub fn new(dim: usize, boxes: Vec<BoxRegion>) -> Result<Self> {
        if let Some(b) = boxes.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: b.dim(),
            });
        }
        let boxes: Vec<BoxRegion> = boxes.into_iter().filter(|b| b.volume() > 0.0).collect();
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                if a.intersect(b).is_some_and(|c| c.volume() > 0.0) {
                    return Err(Error::invalid("window boxes overlap"));
                }
            }
        }
        Ok(Self { dim, boxes })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(1, vec![BoxRegion::new(vec![lo], vec![hi])?])
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, boxes: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Half-open membership: `lo ≤ x < hi` on every axis of some box.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| {
            x.iter()
                .zip(b.lo.iter().zip(&b.hi))
                .all(|(v, (lo, hi))| *v >= *lo && *v < *hi)
        })
    }

    pub fn measure(&self) -> f64 {
        self.boxes.iter().map(BoxRegion::volume).sum()
    }

    pub fn bounding_box(&self) -> Option<BoxRegion> {
        let first = self.boxes.first()?;
        let mut lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for b in &self.boxes[1..] {
            for d in 0..self.dim {
                lo[d] = lo[d].min(b.lo[d]);
                hi[d] = hi[d].max(b.hi[d]);
            }
        }
        Some(BoxRegion { lo, hi })
    }

    /// Whether the closed box `region` lies inside one of the window boxes.
    pub fn covers(&self, region: &BoxRegion) -> bool {
        self.boxes.iter().any(|b| {
            (0..self.dim).all(|d| region.lo[d] >= b.lo[d] && region.hi[d] <= b.hi[d])
        })
    }
}

/// Finite-radius evidence for the injectivity and density assumptions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeDiagnostics {
    /// Coefficient radius `K` of the cube `|k_i| ≤ K` that was checked.
    pub certificate_radius: i64,
    pub p1_injective: bool,
    pub p2_injective: bool,
    /// Smallest nonzero |p2(γ)| over the full cube and over the quarter cube.
    pub p2_min_norm: f64,
    pub p2_min_norm_quarter: f64,
    pub p1_min_norm: f64,
    pub p1_min_norm_quarter: f64,
    pub p1_dense: bool,
    pub p2_dense: bool,
}

impl SchemeDiagnostics {
    pub fn assumptions_hold(&self) -> bool {
        self.p1_injective && self.p2_injective && self.p1_dense && self.p2_dense
    }
}

/// Lattice Γ ⊂ R^{n+m} with projections onto the first `n` and last `m`
/// coordinates and a window in R^m.
#[derive(Clone, Debug, PartialEq)]
pub struct CutProjectScheme {
    lattice: Lattice,
    dual: Lattice,
    n: usize,
    m: usize,
    window: Window,
    diagnostics: SchemeDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct SchemeRepr {
    n: usize,
    m: usize,
    basis: Vec<f64>,
    window: Window,
}

#[derive(Serialize)]
struct SchemeOut<'a> {
    n: usize,
    m: usize,
    basis: Vec<f64>,
    window: &'a Window,
    det: f64,
    diagnostics: &'a SchemeDiagnostics,
}

impl Serialize for CutProjectScheme {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SchemeOut {
            n: self.n,
            m: self.m,
            basis: self.lattice.basis_row_major(),
            window: &self.window,
            det: self.det(),
            diagnostics: &self.diagnostics,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CutProjectScheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SchemeRepr::deserialize(d)?;
        let lattice = Lattice::from_row_major(r.n + r.m, &r.basis).map_err(serde::de::Error::custom)?;
        CutProjectScheme::new(lattice, r.n, r.m, r.window).map_err(serde::de::Error::custom)
    }
}

impl CutProjectScheme {
    pub fn new(lattice: Lattice, n: usize, m: usize, window: Window) -> Result<Self> {
        if n == 0 || m == 0 || n > 4 || m > 4 {
            return Err(Error::invalid("physical and internal dimensions must be in 1..=4"));
        }
        if lattice.dim() != n + m {
            return Err(Error::DimensionMismatch {
                expected: n + m,
                got: lattice.dim(),
            });
        }
        if !window.is_empty() && window.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: window.dim(),
            });
        }
        let diagnostics = diagnose(&lattice, n);
        let dual = lattice.dual();
        Ok(Self {
            lattice,
            dual,
            n,
            m,
            window,
            diagnostics,
        })
    }

    pub fn with_window(&self, window: Window) -> Result<Self> {
        if !window.is_empty() && window.dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: window.dim(),
            });
        }
        Ok(Self {
            window,
            ..self.clone()
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dual(&self) -> &Lattice {
        &self.dual
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn det(&self) -> f64 {
        self.lattice.det().abs()
    }

    pub fn diagnostics(&self) -> &SchemeDiagnostics {
        &self.diagnostics
    }

    pub fn p1<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.n]
    }

    pub fn p2<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.n..]
    }

    /// Uniform density mes(Ω)/det Γ predicted for the model set.
    pub fn density(&self) -> f64 {
        self.window.measure() / self.det()
    }

    pub fn model_set(&self, bbox: &BoxRegion) -> Result<PointSet> {
        model_set(self, &self.window, bbox)
    }
}

/// Γ = {(a + bφ, a − b/φ)} with window [−1/φ, 1).
pub fn fibonacci_scheme() -> CutProjectScheme {
    let phi = golden_ratio();
    let lattice = Lattice::from_rows(&[vec![1.0, 1.0], vec![phi, -1.0 / phi]]).expect("nonsingular");
    let window = Window::interval(-1.0 / phi, 1.0).expect("valid interval");
    CutProjectScheme::new(lattice, 1, 1, window).expect("valid scheme")
}

pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn certificate_radius(dim: usize) -> i64 {
    match dim {
        2 => 100,
        3 => 20,
        4 => 8,
        _ => 4,
    }
}

fn diagnose(lattice: &Lattice, n: usize) -> SchemeDiagnostics {
    let d = lattice.dim();
    let k = certificate_radius(d);
    let side = (2 * k + 1) as usize;
    let total = side.pow(d as u32);
    let mut p1 = Vec::with_capacity(total * n);
    let mut p2 = Vec::with_capacity(total * (d - n));
    let mut min1 = [f64::INFINITY; 2];
    let mut min2 = [f64::INFINITY; 2];
    let mut coeffs = vec![0i64; d];
    for idx in 0..total {
        let mut rem = idx;
        for c in coeffs.iter_mut() {
            *c = (rem % side) as i64 - k;
            rem /= side;
        }
        let x = lattice.point(&coeffs);
        p1.extend_from_slice(&x[..n]);
        p2.extend_from_slice(&x[n..]);
        if coeffs.iter().all(|c| *c == 0) {
            continue;
        }
        let quarter = coeffs.iter().all(|c| c.abs() <= k / 4);
        let n1 = x[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
        let n2 = x[n..].iter().map(|v| v * v).sum::<f64>().sqrt();
        for (mins, v) in [(&mut min1, n1), (&mut min2, n2)] {
            if v > DEFAULT_DEDUP_TOL {
                mins[0] = mins[0].min(v);
                if quarter {
                    mins[1] = mins[1].min(v);
                }
            }
        }
    }
    let inj1 = canonicalize(n, &p1, DEFAULT_DEDUP_TOL).0.len() == total * n;
    let inj2 = canonicalize(d - n, &p2, DEFAULT_DEDUP_TOL).0.len() == total * (d - n);
    let dense = |m: [f64; 2]| m[0] < 0.5 * m[1];
    SchemeDiagnostics {
        certificate_radius: k,
        p1_injective: inj1,
        p2_injective: inj2,
        p1_min_norm: min1[0],
        p1_min_norm_quarter: min1[1],
        p2_min_norm: min2[0],
        p2_min_norm_quarter: min2[1],
        p1_dense: dense(min1),
        p2_dense: dense(min2),
    }
}

/// All lattice points in the closed box `region`, as flat coordinates in a
/// deterministic order. Coefficient ranges come from the inverse basis at the
/// box corners with 10% slack; the coefficient with the widest range is solved
/// for directly on each line.
pub fn enumerate_box(lattice: &Lattice, region: &BoxRegion, cap: u64) -> Result<Vec<f64>> {
    let d = lattice.dim();
    if region.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: region.dim(),
        });
    }
    let dual = lattice.dual();
    // Column j of B⁻¹ is row j of the dual basis.
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|j| {
            let col = dual.basis_vector(j);
            let (mut lo, mut hi) = (0.0, 0.0);
            for ((l, h), c) in region.lo.iter().zip(&region.hi).zip(&col) {
                let (a, b) = (l * c, h * c);
                lo += a.min(b);
                hi += a.max(b);
            }
            let slack = 0.1 * (hi - lo) + 1.0;
            ((lo - slack).floor() as i64, (hi + slack).ceil() as i64)
        })
        .collect();
    let solved = (0..d)
        .max_by_key(|j| (ranges[*j].1 - ranges[*j].0, std::cmp::Reverse(*j)))
        .expect("nonzero dimension");
    let others: Vec<usize> = (0..d).filter(|j| *j != solved).collect();
    let outer: f64 = others
        .iter()
        .map(|j| (ranges[*j].1 - ranges[*j].0 + 1) as f64)
        .product();
    if outer > cap as f64 {
        let factor = (cap as f64 / outer).powf(1.0 / others.len().max(1) as f64);
        let half = region.widths().iter().fold(0.0f64, |a, w| a.max(0.5 * w));
        return Err(Error::EnumerationCap {
            requested: outer,
            cap,
            suggested_half_width: half * factor,
        });
    }
    let basis: Vec<Vec<f64>> = (0..d).map(|i| lattice.basis_vector(i)).collect();
    let line = |outer_coeffs: &[i64], out: &mut Vec<f64>| {
        let mut base = vec![0.0; d];
        for (slot, &j) in outer_coeffs.iter().zip(&others) {
            for c in 0..d {
                base[c] += *slot as f64 * basis[j][c];
            }
        }
        let (mut klo, mut khi) = (ranges[solved].0 as f64, ranges[solved].1 as f64);
        let v = &basis[solved];
        for c in 0..d {
            if v[c].abs() < 1e-300 {
                if base[c] < region.lo[c] - 1e-9 || base[c] > region.hi[c] + 1e-9 {
                    return;
                }
                continue;
            }
            let a = (region.lo[c] - base[c]) / v[c];
            let b = (region.hi[c] - base[c]) / v[c];
            klo = klo.max(a.min(b));
            khi = khi.min(a.max(b));
        }
        if klo > khi + 1e-6 {
            return;
        }
        let mut coeffs = vec![0i64; d];
        for (slot, &j) in outer_coeffs.iter().zip(&others) {
            coeffs[j] = *slot;
        }
        let k0 = (klo - 1e-6).ceil() as i64;
        let k1 = (khi + 1e-6).floor() as i64;
        for k in k0..=k1 {
            coeffs[solved] = k;
            let x = lattice.point(&coeffs);
            if region.contains(&x) {
                out.extend_from_slice(&x);
            }
        }
    };
    if others.is_empty() {
        let mut out = Vec::new();
        line(&[], &mut out);
        return Ok(out);
    }
    let first = others[0];
    let rest = &others[1..];
    let slabs: Vec<Vec<f64>> = (ranges[first].0..=ranges[first].1)
        .into_par_iter()
        .map(|k_first| {
            let mut out = Vec::new();
            let mut odo: Vec<i64> = rest.iter().map(|j| ranges[*j].0).collect();
            let mut coeffs = vec![0i64; others.len()];
            loop {
                coeffs[0] = k_first;
                coeffs[1..].copy_from_slice(&odo);
                line(&coeffs, &mut out);
                let mut pos = 0;
                loop {
                    if pos == odo.len() {
                        return out;
                    }
                    odo[pos] += 1;
                    if odo[pos] <= ranges[rest[pos]].1 {
                        break;
                    }
                    odo[pos] = ranges[rest[pos]].0;
                    pos += 1;
                }
            }
        })
        .collect();
    Ok(slabs.concat())
}

/// Λ(Γ, Ω) ∩ box: `p1(γ)` for lattice points with `p1(γ) ∈ box` and `p2(γ) ∈ Ω`.
pub fn model_set(scheme: &CutProjectScheme, window: &Window, bbox: &BoxRegion) -> Result<PointSet> {
    model_set_capped(scheme, window, bbox, DEFAULT_ENUMERATION_CAP)
}

pub fn model_set_capped(
    scheme: &CutProjectScheme,
    window: &Window,
    bbox: &BoxRegion,
    cap: u64,
) -> Result<PointSet> {
    let n = scheme.n();
    if bbox.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bbox.dim(),
        });
    }
    let Some(wbox) = window.bounding_box() else {
        return PointSet::new(n, vec![], bbox.clone(), DEFAULT_DEDUP_TOL);
    };
    if wbox.dim() != scheme.m() {
        return Err(Error::DimensionMismatch {
            expected: scheme.m(),
            got: wbox.dim(),
        });
    }
    let region = product_box(bbox, &wbox);
    let pts = enumerate_box(scheme.lattice(), &region, cap)?;
    let d = n + scheme.m();
    let coords: Vec<f64> = pts
        .chunks_exact(d)
        .filter(|x| window.contains(&x[n..]))
        .flat_map(|x| x[..n].to_vec())
        .collect();
    PointSet::new(n, coords, bbox.clone(), DEFAULT_DEDUP_TOL)
}

pub(crate) fn product_box(a: &BoxRegion, b: &BoxRegion) -> BoxRegion {
    BoxRegion {
        lo: a.lo.iter().chain(&b.lo).copied().collect(),
        hi: a.hi.iter().chain(&b.hi).copied().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::min_separation;

    #[test]
    fn fibonacci_det_and_dual() {
        let s = fibonacci_scheme();
        assert!((s.det() - 5f64.sqrt()).abs() < 1e-14);
        let dd = s.dual().dual();
        for (a, b) in dd.basis_row_major().iter().zip(s.lattice().basis_row_major()) {
            assert!((a - b).abs() < 1e-10);
        }
        let diag = s.diagnostics();
        assert!(diag.p1_injective && diag.p2_injective && diag.p1_dense && diag.p2_dense);
        assert_eq!(diag.certificate_radius, 100);
    }

    #[test]
    fn integer_lattice_flags_density_failure() {
        let lattice = Lattice::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = CutProjectScheme::new(lattice, 1, 1, Window::interval(0.0, 1.0).unwrap()).unwrap();
        assert!(!s.diagnostics().p2_dense);
        assert!(!s.diagnostics().assumptions_hold());
    }

    #[test]
    fn fibonacci_chain_has_two_gaps() {
        let s = fibonacci_scheme();
        let ps = s.model_set(&BoxRegion::cube(1, 10.0)).unwrap();
        let v = ps.values_1d().unwrap();
        let phi = golden_ratio();
        for w in v.windows(2) {
            let g = w[1] - w[0];
            assert!((g - 1.0).abs() < 1e-9 || (g - phi).abs() < 1e-9, "gap {g}");
        }
        // Oracle: direct scan of |a|, |b| ≤ 20.
        let mut brute: Vec<f64> = vec![];
        for a in -20i64..=20 {
            for b in -20i64..=20 {
                let x = a as f64 + b as f64 * phi;
                let y = a as f64 - b as f64 / phi;
                if (-10.0..=10.0).contains(&x) && y >= -1.0 / phi && y < 1.0 {
                    brute.push(x);
                }
            }
        }
        brute.sort_by(f64::total_cmp);
        assert_eq!(brute.len(), v.len());
        for (a, b) in brute.iter().zip(v) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((min_separation(&ps).distance - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_window_gives_empty_set() {
        let s = fibonacci_scheme();
        let ps = model_set(&s, &Window::empty(1), &BoxRegion::cube(1, 10.0)).unwrap();
        assert!(ps.is_empty());
    }

    #[test]
    fn enumeration_matches_brute_force_in_3d() {
        let l = Lattice::from_rows(&[vec![1.0, 0.3, 0.1], vec![0.2, 1.1, -0.4], vec![0.0, 0.5, 0.9]]).unwrap();
        let region = BoxRegion::new(vec![-3.0, -2.0, -1.5], vec![2.5, 3.0, 1.0]).unwrap();
        let pts = enumerate_box(&l, &region, 1_000_000).unwrap();
        let mut brute = vec![];
        for a in -15i64..=15 {
            for b in -15i64..=15 {
                for c in -15i64..=15 {
                    let x = l.point(&[a, b, c]);
                    if region.contains(&x) {
                        brute.push(x);
                    }
                }
            }
        }
        assert_eq!(pts.len() / 3, brute.len());
    }

    #[test]
    fn enumeration_cap_suggests_smaller_box() {
        let s = fibonacci_scheme();
        let err = model_set_capped(&s, s.window(), &BoxRegion::cube(1, 1e6), 1000).unwrap_err();
        match err {
            Error::EnumerationCap { suggested_half_width, .. } => assert!(suggested_half_width < 1e6),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn scheme_json_round_trip() {
        let s = fibonacci_scheme();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"window\":[["));
        let back: CutProjectScheme = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        let raw = r#"{"n":1,"m":1,"basis":[1,1,1.618033988749895,-0.6180339887498948],"window":[[-0.5,0.5]]}"#;
        let t: CutProjectScheme = serde_json::from_str(raw).unwrap();
        assert_eq!(t.window().measure(), 1.0);
    }

    #[test]
    fn window_membership_is_half_open() {
        let w = Window::interval(-1.0, 1.0).unwrap();
        assert!(w.contains(&[-1.0]) && !w.contains(&[1.0]));
        assert!(Window::new(1, vec![BoxRegion::cube(1, 1.0), BoxRegion::cube(1, 0.5)]).is_err());
    }
}
