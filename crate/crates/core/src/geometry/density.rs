use serde::{Deserialize, Serialize};

use super::index::GridIndex;
use super::pointset::PointSet;
use crate::error::{Error, Result};
use crate::numeric::unit_ball_volume;

/// Maximum number of points in a closed unit interval `[x, x+1]` (1D).
pub fn rho_density(ps: &PointSet) -> Result<f64> {
    let v = ps.values_1d()?;
    let mut best = 0usize;
    let mut j = 0usize;
    for i in 0..v.len() {
        if j < i {
            j = i;
        }
        while j < v.len() && v[j] <= v[i] + 1.0 {
            j += 1;
        }
        best = best.max(j - i);
    }
    Ok(best as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerDensity {
    /// `#(Λ ∩ (−R, R)) / 2R` at the box half-width.
    pub value: f64,
    /// `(R, value)` at R, R/2, R/4.
    pub sequence: Vec<(f64, f64)>,
}

/// Counting estimate of the lower density at the box half-width (1D,
/// box symmetric about 0).
pub fn lower_density(ps: &PointSet) -> Result<LowerDensity> {
    let v = ps.values_1d()?;
    let r = ps
        .bbox()
        .symmetric_half_width()
        .ok_or_else(|| Error::invalid("lower_density needs a box symmetric about 0"))?;
    let count = |radius: f64| v.iter().filter(|x| x.abs() < radius).count() as f64 / (2.0 * radius);
    let sequence: Vec<(f64, f64)> = [r, r / 2.0, r / 4.0].iter().map(|&s| (s, count(s))).collect();
    Ok(LowerDensity {
        value: sequence[0].1,
        sequence,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformDensity {
    pub mean: f64,
    /// Max over centers of `|count/volume − mean| / mean`.
    pub max_deviation: f64,
    pub converged: bool,
    pub centers_used: usize,
    pub ball_radius: f64,
}

pub const CONVERGENCE_DEVIATION: f64 = 0.05;

/// Ball-count density estimate over a deterministic grid of centers inside the
/// box shrunk by `ball_radius`.
pub fn uniform_density(ps: &PointSet, ball_radius: f64, num_centers: usize) -> Result<UniformDensity> {
    if !(ball_radius > 0.0) {
        return Err(Error::invalid("ball_radius must be positive"));
    }
    let dim = ps.dim();
    let inner = ps.bbox().shrink(ball_radius).ok_or(Error::TooFewCenters {
        got: 0,
        need: 2,
    })?;
    let per_axis = ((num_centers as f64).powf(1.0 / dim as f64).ceil() as usize).max(1);
    let total = per_axis.pow(dim as u32);
    if num_centers < 2 || total < 2 {
        return Err(Error::TooFewCenters {
            got: num_centers,
            need: 2,
        });
    }
    let widths = inner.widths();
    let centers: Vec<Vec<f64>> = (0..total)
        .map(|flat| {
            let mut rem = flat;
            (0..dim)
                .map(|d| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    if per_axis == 1 {
                        inner.lo[d] + 0.5 * widths[d]
                    } else {
                        inner.lo[d] + widths[d] * i as f64 / (per_axis - 1) as f64
                    }
                })
                .collect()
        })
        .collect();
    let volume = unit_ball_volume(dim) * ball_radius.powi(dim as i32);
    let counts: Vec<f64> = if dim == 1 {
        let v = ps.coords();
        centers
            .iter()
            .map(|c| {
                let lo = v.partition_point(|x| *x < c[0] - ball_radius);
                let hi = v.partition_point(|x| *x <= c[0] + ball_radius);
                (hi - lo) as f64
            })
            .collect()
    } else {
        let idx = GridIndex::new(dim, ps.coords(), ball_radius / 4.0);
        centers.iter().map(|c| idx.within(c, ball_radius).len() as f64).collect()
    };
    let dens: Vec<f64> = counts.iter().map(|c| c / volume).collect();
    let mean = crate::numeric::compensated_sum(dens.iter().copied()) / dens.len() as f64;
    let max_deviation = if mean > 0.0 {
        dens.iter().map(|d| (d - mean).abs() / mean).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(UniformDensity {
        mean,
        max_deviation,
        converged: max_deviation < CONVERGENCE_DEVIATION,
        centers_used: total,
        ball_radius,
    })
}

/// Parameters of the dyadic interval families scanned by [`bm_upper_density`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicFamily {
    /// Interval length as a fraction of its distance to the origin.
    pub ratios: Vec<f64>,
    /// Number of dyadic shells `[X/2^(j+1), X/2^j)` below the box scale `X`.
    pub shells: usize,
    /// Minimum number of consecutive shells in a candidate system.
    pub min_run: usize,
}

impl Default for DyadicFamily {
    fn default() -> Self {
        Self {
            ratios: vec![1.0, 0.5, 0.25],
            shells: 8,
            min_run: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmDensity {
    /// One-sided estimate: a lower bound for the upper density at this scale.
    pub value: f64,
    pub ratio: f64,
    /// +1 for intervals right of the origin, −1 for left.
    pub side: i8,
    /// Shell indices `[first, last]` of the winning run (0 = outermost).
    pub shells: [usize; 2],
    pub intervals: usize,
    /// Partial sum of `(|I|/(1 + dist(0, I)))²` over the winning system.
    pub substantial_sum: f64,
}

/// Dyadic-family scan for systems of disjoint intervals with
/// `|I| ≍ dist(0, I)`. Each such family has a substantial sum growing by a
/// fixed amount per shell, so runs of shells model the divergence test at
/// finite scale. Returns the best minimum density over a run.
pub fn bm_upper_density(ps: &PointSet, family: &DyadicFamily) -> Result<BmDensity> {
    let v = ps.values_1d()?;
    if family.ratios.iter().any(|c| !(*c > 0.0)) || family.shells == 0 || family.min_run == 0 {
        return Err(Error::invalid("bad dyadic family parameters"));
    }
    let bbox = ps.bbox();
    let count_open = |a: f64, b: f64| {
        let lo = v.partition_point(|x| *x <= a);
        let hi = v.partition_point(|x| *x < b);
        hi.saturating_sub(lo) as f64
    };
    let mut best = BmDensity {
        value: 0.0,
        ratio: family.ratios[0],
        side: 1,
        shells: [0, 0],
        intervals: 0,
        substantial_sum: 0.0,
    };
    for side in [1i8, -1i8] {
        let scale = if side > 0 { bbox.hi[0] } else { -bbox.lo[0] };
        if !(scale > 0.0) {
            continue;
        }
        for &c in &family.ratios {
            // Per shell: (min density, interval count, substantial contribution).
            let mut shell_stats: Vec<Option<(f64, usize, f64)>> = Vec::with_capacity(family.shells);
            for j in 0..family.shells {
                let outer = scale / 2f64.powi(j as i32);
                let inner = outer / 2.0;
                let mut x = inner;
                let mut stat: Option<(f64, usize, f64)> = None;
                while x * (1.0 + c) <= outer * (1.0 + 1e-12) {
                    let (a, b) = (x, x * (1.0 + c));
                    let (a, b) = if side > 0 { (a, b) } else { (-b, -a) };
                    let len = b - a;
                    let d = count_open(a, b) / len;
                    let sub = (len / (1.0 + x)).powi(2);
                    stat = Some(match stat {
                        None => (d, 1, sub),
                        Some((m, k, s)) => (m.min(d), k + 1, s + sub),
                    });
                    x *= 1.0 + c;
                }
                shell_stats.push(stat);
            }
            for first in 0..family.shells {
                let mut min_d = f64::INFINITY;
                let mut intervals = 0usize;
                let mut sum = 0.0;
                for (last, stat) in shell_stats.iter().enumerate().skip(first) {
                    let Some((d, k, s)) = *stat else {
                        break;
                    };
                    min_d = min_d.min(d);
                    intervals += k;
                    sum += s;
                    if last + 1 - first >= family.min_run && min_d > best.value {
                        best = BmDensity {
                            value: min_d,
                            ratio: c,
                            side,
                            shells: [first, last],
                            intervals,
                            substantial_sum: sum,
                        };
                    }
                }
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub rho: Option<f64>,
    pub lower_density: Option<LowerDensity>,
    pub uniform_density: Option<UniformDensity>,
    pub bm_upper_density: Option<BmDensity>,
}

/// All density functionals that apply to `ps` (1D-only ones are skipped otherwise).
pub fn density_report(ps: &PointSet, ball_radius: f64, num_centers: usize) -> Result<DensityReport> {
    let one_d = ps.dim() == 1;
    Ok(DensityReport {
        rho: if one_d { Some(rho_density(ps)?) } else { None },
        lower_density: if one_d && ps.bbox().symmetric_half_width().is_some() {
            Some(lower_density(ps)?)
        } else {
            None
        },
        uniform_density: uniform_density(ps, ball_radius, num_centers).ok(),
        bm_upper_density: if one_d {
            Some(bm_upper_density(ps, &DyadicFamily::default())?)
        } else {
            None
        },
    })
}
