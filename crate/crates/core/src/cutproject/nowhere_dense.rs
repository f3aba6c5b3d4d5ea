//! Spectral gaps from a window function vanishing on internal projections of
//! dual points: each ball `B_j` of frequencies yields a set `Q_j` in internal
//! space, a length `M_j` above which `Q_j` has controlled counts, the cut-off
//! `T_j = M_j³ + M_j`, and a gap `Ω_j ⊂ B_j` free of spectrum.

use serde::{Deserialize, Serialize};

use super::model::{predicted_spectrum, SpectrumOptions};
use super::scheme::{enumerate_box, product_box, CutProjectScheme, Window, DEFAULT_ENUMERATION_CAP};
use super::surrogate::ZeroProductWindow;
use super::window::WindowFunction;
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, GridIndex};
use crate::numeric::unit_ball_volume;

/// Upper limit on imposed zeros; the surrogate costs O(K) per evaluation.
pub const MAX_ZEROS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NowhereDenseConfig {
    /// Ball centers `x_j` in frequency space.
    pub dense_seq: Vec<Vec<f64>>,
    pub ball_radii: Vec<f64>,
    /// Window budget: Σ mes(B_j) must stay below ε/det Γ.
    pub epsilon: f64,
    /// Largest |p2| at which zeros are imposed; default `max T_j + zero_band / Σ D(Q_j)`.
    pub truncation: Option<f64>,
    /// Expected zeros per side when `truncation` is defaulted.
    pub zero_band: f64,
    /// γ_j = gamma_factor · D(Q_j).
    pub gamma_factor: f64,
    /// Half-length of the internal-space sample used to certify the counting bound.
    pub search_extent: f64,
    /// Share of ε used by the spectrum of φ.
    pub bandwidth_fraction: f64,
    /// Power of the sinc envelope in the surrogate.
    pub envelope_power: u32,
    /// Frequency box scanned for spectrum atoms inside the gaps.
    pub check_box: Option<Vec<[f64; 2]>>,
    pub check_threshold: f64,
}

impl Default for NowhereDenseConfig {
    fn default() -> Self {
        Self {
            dense_seq: vec![vec![0.5]],
            ball_radii: vec![0.1],
            epsilon: 0.6,
            truncation: None,
            zero_band: 8.0,
            gamma_factor: 1.1,
            search_extent: 4096.0,
            bandwidth_fraction: 0.9,
            envelope_power: 4,
            check_box: None,
            check_threshold: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallReport {
    pub center: Vec<f64>,
    pub radius: f64,
    pub measure: f64,
    /// D(Q_j) = det Γ · mes(B_j).
    pub density: f64,
    /// Count of the certification sample over its length.
    pub sample_density: f64,
    pub sample_size: usize,
    pub gamma: f64,
    pub m: f64,
    pub t: f64,
    /// Interval lengths at which the counting bound was checked.
    pub certified_scales: usize,
    pub zeros: usize,
    /// Dual points with p1 ∈ B_j and |p2| < T_j.
    pub forbidden: usize,
    pub gap: Gap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSummary {
    pub zeros: usize,
    pub delta: f64,
    pub eta: f64,
    pub power: u32,
    pub transform_support: (f64, f64),
    pub log_norm: f64,
    pub max_at_zeros: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub freq_box: Vec<[f64; 2]>,
    pub threshold: f64,
    pub atoms: usize,
    pub atoms_in_gaps: usize,
    pub max_weight_in_gaps: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NowhereDenseReport {
    pub epsilon: f64,
    pub det: f64,
    pub budget_used: f64,
    pub budget_limit: f64,
    pub truncation: f64,
    pub balls: Vec<BallReport>,
    pub surrogate: SurrogateSummary,
    pub check: SpectrumCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NowhereDenseConstruction {
    pub report: NowhereDenseReport,
    pub window: WindowFunction,
}

/// T = M³ + M.
pub fn cutoff_from_length(m: f64) -> f64 {
    m * m * m + m
}

/// Largest number of sorted values in a closed interval of length `len`.
pub fn max_count(sorted: &[f64], len: f64) -> usize {
    let mut best = 0;
    let mut j = 0;
    for i in 0..sorted.len() {
        if j < i {
            j = i;
        }
        while j < sorted.len() && sorted[j] <= sorted[i] + len {
            j += 1;
        }
        best = best.max(j - i);
    }
    best
}

/// Smallest power-of-two length `M` with `max_count(ℓ(1 + r)) ≤ γℓ` for every
/// ℓ = M(1 + r)^i up to half the sample extent. Covers all |I| ≥ M at that scale.
fn find_length(sorted: &[f64], extent: f64, gamma: f64, r: f64) -> Option<(f64, usize)> {
    let mut m = 1.0;
    while m <= extent / 4.0 {
        let mut len = m;
        let mut scales = 0;
        let mut ok = true;
        while len <= extent / 2.0 {
            scales += 1;
            if max_count(sorted, len * (1.0 + r)) as f64 > gamma * len {
                ok = false;
                break;
            }
            len *= 1.0 + r;
        }
        if ok {
            return Some((m, scales));
        }
        m *= 2.0;
    }
    None
}

fn in_ball(p: &[f64], c: &[f64], r: f64) -> bool {
    p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < r * r
}

/// Dual points with `p1` in the open ball and `p2` in `[lo, hi]`, returned as (p1, p2) pairs.
fn dual_points(
    scheme: &CutProjectScheme,
    center: &[f64],
    radius: f64,
    lo: f64,
    hi: f64,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = scheme.n();
    let ball = BoxRegion::new(
        center.iter().map(|c| c - radius).collect(),
        center.iter().map(|c| c + radius).collect(),
    )?;
    let region = product_box(&ball, &BoxRegion::new(vec![lo], vec![hi])?);
    let pts = enumerate_box(scheme.dual(), &region, DEFAULT_ENUMERATION_CAP)?;
    Ok(pts
        .chunks_exact(n + 1)
        .filter(|x| in_ball(&x[..n], center, radius))
        .map(|x| (x[..n].to_vec(), x[n]))
        .collect())
}

/// Largest open ball inside `B(center, radius)` avoiding `forbidden` (1D exact,
/// higher dimensions by grid search).
fn largest_gap(center: &[f64], radius: f64, forbidden: &[Vec<f64>]) -> Gap {
    let n = center.len();
    if n == 1 {
        let mut v: Vec<f64> = forbidden.iter().map(|p| p[0]).collect();
        v.push(center[0] - radius);
        v.push(center[0] + radius);
        v.sort_by(f64::total_cmp);
        let (a, b) = v
            .windows(2)
            .map(|w| (w[0], w[1]))
            .fold((v[0], v[0]), |best, g| if g.1 - g.0 > best.1 - best.0 { g } else { best });
        return Gap {
            center: vec![0.5 * (a + b)],
            radius: 0.5 * (b - a),
        };
    }
    let coords: Vec<f64> = forbidden.iter().flatten().copied().collect();
    let index = GridIndex::new(n, &coords, radius / 16.0);
    let steps = 64i64;
    let h = radius / steps as f64;
    let mut best = Gap {
        center: center.to_vec(),
        radius: 0.0,
    };
    let side = (2 * steps + 1) as usize;
    let mut q = vec![0.0; n];
    for idx in 0..side.pow(n as u32) {
        let mut rem = idx;
        for (d, slot) in q.iter_mut().enumerate() {
            *slot = center[d] + ((rem % side) as i64 - steps) as f64 * h;
            rem /= side;
        }
        let to_center = q.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let mut r = radius - to_center;
        if r <= best.radius {
            continue;
        }
        if let Some((_, d)) = index.nearest(&q) {
            r = r.min(d);
        }
        if r > best.radius {
            best = Gap {
                center: q.clone(),
                radius: r,
            };
        }
    }
    best
}

pub fn nowhere_dense_construction(scheme: &CutProjectScheme, cfg: &NowhereDenseConfig) -> Result<NowhereDenseConstruction> {
    if scheme.m() != 1 {
        return Err(Error::UnsupportedDimension(scheme.m()));
    }
    let n = scheme.n();
    if cfg.dense_seq.is_empty() || cfg.dense_seq.len() != cfg.ball_radii.len() {
        return Err(Error::invalid("dense_seq and ball_radii must be nonempty and of equal length"));
    }
    if let Some(x) = cfg.dense_seq.iter().find(|x| x.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if !(cfg.epsilon > 0.0) || cfg.ball_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("epsilon and ball radii must be positive"));
    }
    if !(cfg.gamma_factor > 1.0) {
        return Err(Error::invalid("gamma_factor must exceed 1"));
    }
    if !(cfg.bandwidth_fraction > 0.0 && cfg.bandwidth_fraction < 1.0) {
        return Err(Error::Budget {
            used: cfg.bandwidth_fraction * cfg.epsilon,
            limit: cfg.epsilon,
        });
    }
    let det = scheme.det();
    let vn = unit_ball_volume(n);
    let measures: Vec<f64> = cfg.ball_radii.iter().map(|r| vn * r.powi(n as i32)).collect();
    let used: f64 = measures.iter().sum();
    let limit = cfg.epsilon / det;
    if used >= limit {
        return Err(Error::Budget { used, limit });
    }

    struct Partial {
        density: f64,
        sample_density: f64,
        sample_size: usize,
        gamma: f64,
        m: f64,
        t: f64,
        scales: usize,
    }
    let mut partial = Vec::with_capacity(measures.len());
    for (j, (center, radius)) in cfg.dense_seq.iter().zip(&cfg.ball_radii).enumerate() {
        let density = det * measures[j];
        let gamma = cfg.gamma_factor * density;
        let r = (cfg.gamma_factor - 1.0) / 3.0;
        let e = cfg.search_extent;
        let mut sample: Vec<f64> = dual_points(scheme, center, *radius, -e, e)?
            .into_iter()
            .map(|(_, q)| q)
            .collect();
        sample.sort_by(f64::total_cmp);
        let (m, scales) = find_length(&sample, e, gamma, r).ok_or_else(|| {
            Error::Infeasible(format!(
                "ball {j}: no length up to {} satisfies the counting bound with γ = {gamma}",
                e / 4.0
            ))
        })?;
        partial.push(Partial {
            density,
            sample_density: sample.len() as f64 / (2.0 * e),
            sample_size: sample.len(),
            gamma,
            m,
            t: cutoff_from_length(m),
            scales,
        });
    }

    let t_max = partial.iter().map(|p| p.t).fold(0.0, f64::max);
    let total_density: f64 = partial.iter().map(|p| p.density).sum();
    let truncation = cfg.truncation.unwrap_or(t_max + cfg.zero_band / total_density);

    let mut zeros = Vec::new();
    let mut zero_counts = Vec::new();
    for (j, (center, radius)) in cfg.dense_seq.iter().zip(&cfg.ball_radii).enumerate() {
        let t = partial[j].t;
        let before = zeros.len();
        if truncation >= t {
            for (lo, hi) in [(-truncation, -t), (t, truncation)] {
                zeros.extend(dual_points(scheme, center, *radius, lo, hi)?.into_iter().map(|(_, q)| q));
            }
        }
        zero_counts.push(zeros.len() - before);
        if zeros.len() > MAX_ZEROS {
            return Err(Error::Infeasible(format!(
                "{} zeros exceed the surrogate limit {MAX_ZEROS}; lower the truncation",
                zeros.len()
            )));
        }
    }
    zeros.sort_by(f64::total_cmp);
    zeros.dedup();
    if zeros.is_empty() {
        return Err(Error::Infeasible(format!(
            "no internal points with T ≤ |p2| ≤ {truncation}; surrogate has nothing to vanish on"
        )));
    }
    let bandwidth = cfg.bandwidth_fraction * cfg.epsilon;
    let surrogate = ZeroProductWindow::new(zeros, bandwidth, cfg.envelope_power)?;
    let support = surrogate.transform_radius();
    if support >= cfg.epsilon {
        return Err(Error::Budget {
            used: support,
            limit: cfg.epsilon,
        });
    }

    let mut balls = Vec::with_capacity(partial.len());
    for (j, (center, radius)) in cfg.dense_seq.iter().zip(&cfg.ball_radii).enumerate() {
        let t = partial[j].t;
        let forbidden: Vec<Vec<f64>> = dual_points(scheme, center, *radius, -t, t)?
            .into_iter()
            .filter(|(_, q)| q.abs() < t)
            .map(|(p, _)| p)
            .collect();
        let gap = largest_gap(center, *radius, &forbidden);
        let p = &partial[j];
        balls.push(BallReport {
            center: center.clone(),
            radius: *radius,
            measure: measures[j],
            density: p.density,
            sample_density: p.sample_density,
            sample_size: p.sample_size,
            gamma: p.gamma,
            m: p.m,
            t: p.t,
            certified_scales: p.scales,
            zeros: zero_counts[j],
            forbidden: forbidden.len(),
            gap,
        });
    }

    let window = WindowFunction::ZeroProduct(surrogate.clone());
    let check_pairs = cfg.check_box.clone().unwrap_or_else(|| vec![[0.0, 1.0]; n]);
    let check_box = BoxRegion::from_pairs(&check_pairs)?;
    let spectral_scheme = scheme.with_window(Window::interval(-support, support)?)?;
    let spectrum = predicted_spectrum(
        &spectral_scheme,
        &window,
        &check_box,
        &SpectrumOptions {
            min_weight: cfg.check_threshold,
            ..Default::default()
        },
    )?;
    let mut in_gaps = 0;
    let mut max_in_gaps = 0.0f64;
    for (p, w) in spectrum.atoms() {
        if balls.iter().any(|b| in_ball(p, &b.gap.center, b.gap.radius)) {
            in_gaps += 1;
            max_in_gaps = max_in_gaps.max(w.norm());
        }
    }
    let report = NowhereDenseReport {
        epsilon: cfg.epsilon,
        det,
        budget_used: used,
        budget_limit: limit,
        truncation,
        balls,
        surrogate: SurrogateSummary {
            zeros: surrogate.zeros.len(),
            delta: surrogate.delta,
            eta: surrogate.eta,
            power: surrogate.power,
            transform_support: (-support, support),
            log_norm: surrogate.log_norm,
            max_at_zeros: surrogate.max_at_zeros(),
        },
        check: SpectrumCheck {
            freq_box: check_pairs,
            threshold: cfg.check_threshold,
            atoms: spectrum.len(),
            atoms_in_gaps: in_gaps,
            max_weight_in_gaps: max_in_gaps,
            passed: in_gaps == 0,
        },
    };
    Ok(NowhereDenseConstruction { report, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutproject::fibonacci_scheme;

    #[test]
    fn cutoff_formula() {
        assert_eq!(cutoff_from_length(3.0), 30.0);
        assert_eq!(cutoff_from_length(64.0), 262_208.0);
    }

    #[test]
    fn max_count_sliding_window() {
        let v = [0.0, 0.5, 1.0, 1.2, 3.0];
        assert_eq!(max_count(&v, 1.0), 3);
        assert_eq!(max_count(&v, 0.1), 1);
        assert_eq!(max_count(&[], 1.0), 0);
    }

    #[test]
    fn budget_violation_is_rejected() {
        let cfg = NowhereDenseConfig {
            dense_seq: vec![vec![0.5]],
            ball_radii: vec![0.2],
            ..Default::default()
        };
        let err = nowhere_dense_construction(&fibonacci_scheme(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn single_ball_construction() {
        let cfg = NowhereDenseConfig::default();
        let out = nowhere_dense_construction(&fibonacci_scheme(), &cfg).unwrap();
        let rep = &out.report;
        let b = &rep.balls[0];
        assert!((b.density - 5f64.sqrt() * 0.2).abs() < 1e-12);
        assert!((b.sample_density - b.density).abs() < 0.01 * b.density);
        assert_eq!(b.t, cutoff_from_length(b.m));
        assert!(b.gap.radius > 0.0);
        assert!(b.gap.center[0] - b.gap.radius >= 0.4 - 1e-12 && b.gap.center[0] + b.gap.radius <= 0.6 + 1e-12);
        assert_eq!(rep.surrogate.max_at_zeros, 0.0);
        assert!(rep.surrogate.transform_support.1 < cfg.epsilon);
        assert!(rep.check.passed, "{:?}", rep.check);
        assert!(rep.check.atoms > 0);
    }
}
