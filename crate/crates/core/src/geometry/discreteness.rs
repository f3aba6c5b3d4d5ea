use serde::{Deserialize, Serialize};

use super::index::{dist2, GridIndex};
use super::pointset::{canonicalize, PointSet};
use super::region::BoxRegion;
use crate::error::{Error, Result};

/// Closest pair of a point set.
#[derive(Clone, Debug, PartialEq)]
pub struct Separation {
    /// `f64::INFINITY` when the set has fewer than two points.
    pub distance: f64,
    pub pair: Option<[usize; 2]>,
}

impl Separation {
    pub fn is_infinite(&self) -> bool {
        self.pair.is_none()
    }
}

/// Minimum Euclidean distance between distinct points.
pub fn min_separation(ps: &PointSet) -> Separation {
    let n = ps.len();
    if n < 2 {
        return Separation {
            distance: f64::INFINITY,
            pair: None,
        };
    }
    if ps.dim() == 1 {
        let v = ps.coords();
        let (i, d) = v
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, w[1] - w[0]))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        return Separation {
            distance: d,
            pair: Some([i, i + 1]),
        };
    }
    let dim = ps.dim();
    let mut cell = mean_spacing(ps).max(f64::MIN_POSITIVE);
    loop {
        let idx = GridIndex::new(dim, ps.coords(), cell);
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in idx.within(ps.point(i), cell) {
                if j <= i {
                    continue;
                }
                let d2 = dist2(ps.point(i), ps.point(j));
                if best.is_none_or(|b| d2 < b.2) {
                    best = Some((i, j, d2));
                }
            }
        }
        if let Some((i, j, d2)) = best {
            return Separation {
                distance: d2.sqrt(),
                pair: Some([i, j]),
            };
        }
        cell *= 2.0;
    }
}

/// `(volume / count)^(1/n)` over the truncation box.
pub fn mean_spacing(ps: &PointSet) -> f64 {
    let n = ps.len().max(1) as f64;
    let vol = ps.bbox().volume();
    if vol > 0.0 {
        (vol / n).powf(1.0 / ps.dim() as f64)
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    /// Largest sampled distance to the nearest point.
    pub radius: f64,
    /// Added uncertainty from sampling: `pitch·√n`.
    pub error_bound: f64,
    pub pitch: f64,
    /// Grid point where the maximum was attained.
    pub witness: Vec<f64>,
    /// Whether `region` sits inside the box shrunk by `radius + error_bound`.
    pub edge_guard_ok: bool,
}

pub const DEFAULT_GRID_CAP: u64 = 4_000_000;

/// Sup over a sampling grid in `region` of the distance to the nearest point.
pub fn covering_radius(ps: &PointSet, region: &BoxRegion) -> Result<CoveringReport> {
    if ps.is_empty() {
        return Err(Error::Empty("covering_radius needs a nonempty point set"));
    }
    if region.dim() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: region.dim(),
        });
    }
    let dim = ps.dim();
    let sep = min_separation(ps);
    let widths = region.widths();
    let max_w = widths.iter().cloned().fold(0.0, f64::max);
    let pitch = if sep.is_infinite() {
        (max_w / 256.0).max(1e-12)
    } else {
        sep.distance / 4.0
    };
    let steps: Vec<u64> = widths.iter().map(|w| (w / pitch).ceil() as u64 + 1).collect();
    let size = steps.iter().try_fold(1u64, |acc, s| acc.checked_mul(*s)).unwrap_or(u64::MAX);
    if size > DEFAULT_GRID_CAP {
        return Err(Error::GridCap {
            size,
            cap: DEFAULT_GRID_CAP,
        });
    }
    let cell = mean_spacing(ps).max(pitch);
    let idx = GridIndex::new(dim, ps.coords(), cell);
    let mut best = (-1.0f64, vec![0.0; dim]);
    let mut q = vec![0.0; dim];
    for flat in 0..size {
        let mut rem = flat;
        for d in 0..dim {
            let s = steps[d];
            let i = rem % s;
            rem /= s;
            q[d] = (region.lo[d] + i as f64 * pitch).min(region.hi[d]);
        }
        let (_, dist) = idx.nearest(&q).expect("nonempty");
        if dist > best.0 {
            best = (dist, q.clone());
        }
    }
    let error_bound = pitch * (dim as f64).sqrt();
    let guard = ps.bbox().shrink(best.0 + error_bound);
    let edge_guard_ok = guard.is_some_and(|g| {
        g.lo.iter().zip(&region.lo).all(|(a, b)| a <= b) && g.hi.iter().zip(&region.hi).all(|(a, b)| a >= b)
    });
    Ok(CoveringReport {
        radius: best.0,
        error_bound,
        pitch,
        witness: best.1,
        edge_guard_ok,
    })
}

/// Truncated difference set with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSet {
    pub points: PointSet,
    /// Multiplicity of each point of `points` (same order).
    pub multiplicities: Vec<u64>,
    pub cap_radius: f64,
}

impl DifferenceSet {
    pub fn multiplicity_at(&self, v: &[f64]) -> u64 {
        let tol = self.points.dedup_tol().max(1e-12);
        self.points
            .iter()
            .position(|p| dist2(p, v) <= tol * tol)
            .map_or(0, |i| self.multiplicities[i])
    }
}

/// All differences `λ' − λ` with `|λ' − λ| ≤ cap_radius`, merged at the set's
/// dedup tolerance. Always contains 0 (multiplicity = #points).
pub fn difference_set(ps: &PointSet, cap_radius: f64) -> Result<DifferenceSet> {
    if !(cap_radius > 0.0) {
        return Err(Error::invalid("cap_radius must be positive"));
    }
    let dim = ps.dim();
    let n = ps.len();
    let cap2 = cap_radius * cap_radius;
    let mut half: Vec<f64> = Vec::new();
    // Points are sorted by first coordinate, so the sweep can stop early.
    for i in 0..n {
        let p = ps.point(i);
        for j in i + 1..n {
            let q = ps.point(j);
            if q[0] - p[0] > cap_radius {
                break;
            }
            let d2 = dist2(p, q);
            if d2 <= cap2 {
                half.extend(q.iter().zip(p).map(|(a, b)| a - b));
            }
        }
    }
    let tol = ps.dedup_tol();
    let (reps, group) = canonicalize(dim, &half, tol);
    let m = reps.len() / dim;
    let mut mult = vec![0u64; m];
    for g in group {
        mult[g] += 1;
    }
    let mut coords = Vec::with_capacity((2 * m + 1) * dim);
    let mut counts = Vec::with_capacity(2 * m + 1);
    coords.extend(std::iter::repeat_n(0.0, dim));
    counts.push(n as u64);
    for k in 0..m {
        coords.extend_from_slice(&reps[k * dim..(k + 1) * dim]);
        counts.push(mult[k]);
        coords.extend(reps[k * dim..(k + 1) * dim].iter().map(|v| -v));
        counts.push(mult[k]);
    }
    // Final merge keeps the dedup invariant in degenerate near-boundary cases.
    let (merged, group) = canonicalize(dim, &coords, tol);
    let mm = merged.len() / dim;
    let mut multiplicities = vec![0u64; mm];
    for (g, c) in group.into_iter().zip(counts) {
        multiplicities[g] += c;
    }
    let bbox = BoxRegion::cube(dim, cap_radius + tol);
    let points = PointSet::new(dim, merged, bbox, tol)?;
    Ok(DifferenceSet {
        points,
        multiplicities,
        cap_radius,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub property: String,
    pub points: Vec<Vec<f64>>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretenessReport {
    /// `None` encodes an infinite separation (fewer than two points).
    pub min_sep: Option<f64>,
    /// `None` encodes an infinite covering radius.
    pub covering_radius: Option<f64>,
    pub covering_error_bound: f64,
    pub is_uniformly_discrete: bool,
    pub is_relatively_dense: bool,
    pub is_delone: bool,
    pub is_flc: bool,
    pub is_meyer: bool,
    pub flc_radius: f64,
    pub flc_min_gap: Option<f64>,
    pub meyer_radius: f64,
    pub meyer_min_gap: Option<f64>,
    pub witnesses: Vec<Witness>,
    /// Always true: every verdict holds only at the truncation scale.
    pub truncation_caveat: bool,
}

/// Tuning for [`classify_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Local patch radius for the FLC test, in mean spacings.
    pub flc_radius_spacings: f64,
    /// Radius for the Meyer test, in mean spacings (capped at half the box).
    pub meyer_radius_spacings: f64,
    /// A difference-set gap below this fraction of `min_sep` counts as collapse.
    pub gap_ratio: f64,
    /// `min_sep` below this fraction of the mean spacing counts as collapse.
    pub separation_ratio: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            flc_radius_spacings: 4.0,
            meyer_radius_spacings: 32.0,
            gap_ratio: 1e-3,
            separation_ratio: 1e-6,
        }
    }
}

pub fn classify(ps: &PointSet) -> Result<DiscretenessReport> {
    classify_with(ps, &ClassifyOptions::default())
}

pub fn classify_with(ps: &PointSet, opts: &ClassifyOptions) -> Result<DiscretenessReport> {
    if ps.is_empty() {
        return Err(Error::Empty("classify needs a nonempty point set"));
    }
    let mut witnesses = Vec::new();
    let spacing = mean_spacing(ps);
    let sep = min_separation(ps);
    let is_ud = !sep.is_infinite() && sep.distance > opts.separation_ratio * spacing;
    if let Some([i, j]) = sep.pair {
        if !is_ud {
            witnesses.push(Witness {
                property: "uniformly_discrete".into(),
                points: vec![ps.point(i).to_vec(), ps.point(j).to_vec()],
                note: format!("closest pair at distance {:e}", sep.distance),
            });
        }
    } else {
        witnesses.push(Witness {
            property: "uniformly_discrete".into(),
            points: ps.iter().map(|p| p.to_vec()).collect(),
            note: "fewer than two points".into(),
        });
    }

    // Covering radius on the box shrunk by a quarter of its smallest width.
    let min_width = ps.bbox().widths().iter().cloned().fold(f64::INFINITY, f64::min);
    let margin = min_width / 4.0;
    let (covering, cover_err, is_rd) = match (sep.is_infinite(), ps.bbox().shrink(margin)) {
        (false, Some(region)) => match covering_radius(ps, &region) {
            Ok(rep) => {
                let ok = rep.radius + rep.error_bound < margin;
                if !ok {
                    witnesses.push(Witness {
                        property: "relatively_dense".into(),
                        points: vec![rep.witness.clone()],
                        note: format!("hole of radius {:e} exceeds margin {:e}", rep.radius, margin),
                    });
                }
                (Some(rep.radius), rep.error_bound, ok)
            }
            Err(Error::GridCap { .. }) => (None, 0.0, false),
            Err(e) => return Err(e),
        },
        _ => {
            witnesses.push(Witness {
                property: "relatively_dense".into(),
                points: vec![],
                note: "too few points or box too small for a guarded scan".into(),
            });
            (None, 0.0, false)
        }
    };
    let is_delone = is_ud && is_rd;

    let half_extent = min_width / 2.0;
    let flc_radius = (opts.flc_radius_spacings * spacing).min(half_extent).max(spacing);
    let meyer_radius = (opts.meyer_radius_spacings * spacing).min(half_extent).max(flc_radius);
    let threshold = if sep.is_infinite() {
        0.0
    } else {
        opts.gap_ratio * sep.distance
    };

    let mut gap_test = |radius: f64, property: &str| -> Result<(Option<f64>, bool)> {
        let ds = difference_set(ps, radius)?;
        let g = min_separation(&ds.points);
        if g.is_infinite() {
            return Ok((None, true));
        }
        let ok = g.distance >= threshold;
        if !ok {
            let [a, b] = g.pair.unwrap();
            witnesses.push(Witness {
                property: property.into(),
                points: vec![ds.points.point(a).to_vec(), ds.points.point(b).to_vec()],
                note: format!(
                    "difference-set gap {:e} below {:e} within radius {:e}",
                    g.distance, threshold, radius
                ),
            });
        }
        Ok((Some(g.distance), ok))
    };
    let (flc_gap, flc_ok) = gap_test(flc_radius, "flc")?;
    let (meyer_gap, meyer_ok) = if flc_ok {
        gap_test(meyer_radius, "meyer")?
    } else {
        (None, false)
    };

    Ok(DiscretenessReport {
        min_sep: (!sep.is_infinite()).then_some(sep.distance),
        covering_radius: covering,
        covering_error_bound: cover_err,
        is_uniformly_discrete: is_ud,
        is_relatively_dense: is_rd,
        is_delone,
        is_flc: is_delone && flc_ok,
        is_meyer: is_delone && flc_ok && meyer_ok,
        flc_radius,
        flc_min_gap: flc_gap,
        meyer_radius,
        meyer_min_gap: meyer_gap,
        witnesses,
        truncation_caveat: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integers(lo: i64, hi: i64) -> PointSet {
        let v: Vec<f64> = (lo..=hi).map(|k| k as f64).collect();
        PointSet::from_1d(&v, lo as f64, hi as f64).unwrap()
    }

    #[test]
    fn min_separation_examples() {
        assert_eq!(min_separation(&integers(-10, 10)).distance, 1.0);
        let ps = PointSet::from_1d(&[0.0, 0.5, 2.0], 0.0, 2.0).unwrap();
        assert_eq!(min_separation(&ps).distance, 0.5);
        let one = PointSet::from_1d(&[1.0], 0.0, 2.0).unwrap();
        assert!(min_separation(&one).is_infinite());
    }

    #[test]
    fn min_separation_nd_matches_brute_force() {
        let coords: Vec<f64> = (0..300)
            .flat_map(|i| {
                let t = i as f64;
                [(t * 0.618034).fract() * 10.0, (t * 0.41421356).fract() * 10.0]
            })
            .collect();
        let ps = PointSet::new(2, coords, BoxRegion::cube(2, 10.0), 1e-9).unwrap();
        let mut brute = f64::INFINITY;
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                brute = brute.min(dist2(ps.point(i), ps.point(j)).sqrt());
            }
        }
        assert!((min_separation(&ps).distance - brute).abs() < 1e-15);
    }

    #[test]
    fn covering_examples() {
        let z = integers(-10, 10);
        let r = covering_radius(&z, &BoxRegion::new(vec![-5.0], vec![5.0]).unwrap()).unwrap();
        assert!((r.radius - 0.5).abs() < 1e-12);
        assert!(r.edge_guard_ok);
        let evens: Vec<f64> = (-10..=10).map(|k| 2.0 * k as f64).collect();
        let ps = PointSet::from_1d(&evens, -20.0, 20.0).unwrap();
        let r = covering_radius(&ps, &BoxRegion::new(vec![-10.0], vec![10.0]).unwrap()).unwrap();
        assert!((r.radius - 1.0).abs() < 1e-12);
        let empty = PointSet::from_1d(&[], -1.0, 1.0).unwrap();
        assert!(covering_radius(&empty, &BoxRegion::cube(1, 0.5)).is_err());
    }

    #[test]
    fn difference_set_examples() {
        let ps = PointSet::from_1d(&[0.0, 1.0, 3.0], 0.0, 3.0).unwrap();
        let ds = difference_set(&ps, 10.0).unwrap();
        assert_eq!(ds.points.coords(), &[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(ds.multiplicity_at(&[0.0]), 3);
        assert_eq!(ds.multiplicity_at(&[2.0]), 1);

        let ds = difference_set(&integers(-5, 5), 3.0).unwrap();
        let expect = [(0.0, 11), (1.0, 10), (2.0, 9), (3.0, 8)];
        assert_eq!(ds.points.len(), 7);
        for (v, m) in expect {
            assert_eq!(ds.multiplicity_at(&[v]), m);
            assert_eq!(ds.multiplicity_at(&[-v]), m);
        }
    }

    #[test]
    fn classify_integers() {
        let rep = classify(&integers(-100, 100)).unwrap();
        assert_eq!(rep.min_sep, Some(1.0));
        assert!(rep.is_uniformly_discrete && rep.is_relatively_dense && rep.is_delone);
        assert!(rep.is_flc && rep.is_meyer);
        assert!(rep.truncation_caveat);
    }

    #[test]
    fn classify_k_plus_inverse_k() {
        let v: Vec<f64> = (2..=100).map(|k| k as f64 + 1.0 / k as f64).collect();
        let ps = PointSet::from_1d(&v, 2.0, 101.0).unwrap();
        let rep = classify(&ps).unwrap();
        assert!(rep.is_uniformly_discrete);
        assert!(!rep.is_flc);
        assert!(!rep.is_meyer);
        assert!(rep.witnesses.iter().any(|w| w.property == "flc"));
    }

    #[test]
    fn covering_detects_holes() {
        let mut v: Vec<f64> = (-100..=-60).map(|k| k as f64).collect();
        v.extend((60..=100).map(|k| k as f64));
        let ps = PointSet::from_1d(&v, -100.0, 100.0).unwrap();
        let rep = classify(&ps).unwrap();
        assert!(!rep.is_relatively_dense);
        assert!(!rep.is_delone && !rep.is_meyer);
    }
}
