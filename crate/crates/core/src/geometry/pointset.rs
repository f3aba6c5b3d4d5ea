use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::index::{dist2, MAX_DIM};
use super::region::BoxRegion;
use crate::error::{Error, Result};

pub const DEFAULT_DEDUP_TOL: f64 = 1e-9;

/// Finite point set in R^n (1 ≤ n ≤ 4), sorted lexicographically, with no two
/// points within `dedup_tol` of each other.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSetRepr", into = "PointSetRepr")]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    bbox: BoxRegion,
    dedup_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct PointSetRepr {
    dim: usize,
    #[serde(rename = "box")]
    bbox: Vec<[f64; 2]>,
    points: Vec<Vec<f64>>,
    #[serde(default = "default_tol")]
    dedup_tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_DEDUP_TOL
}

impl TryFrom<PointSetRepr> for PointSet {
    type Error = Error;
    fn try_from(r: PointSetRepr) -> Result<Self> {
        let mut coords = Vec::with_capacity(r.points.len() * r.dim);
        for p in &r.points {
            if p.len() != r.dim {
                return Err(Error::DimensionMismatch {
                    expected: r.dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        PointSet::new(r.dim, coords, BoxRegion::from_pairs(&r.bbox)?, r.dedup_tol)
    }
}

impl From<PointSet> for PointSetRepr {
    fn from(p: PointSet) -> Self {
        PointSetRepr {
            dim: p.dim,
            bbox: p.bbox.pairs(),
            points: p.iter().map(|x| x.to_vec()).collect(),
            dedup_tol: p.dedup_tol,
        }
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Sorts points lexicographically and merges points within `tol`.
///
/// Returns the representative coordinates and, for every input point, the
/// index of its representative. The first point of a cluster in sorted order
/// is the representative.
pub(crate) fn canonicalize(dim: usize, coords: &[f64], tol: f64) -> (Vec<f64>, Vec<usize>) {
    let n = coords.len() / dim;
    let pt = |i: usize| &coords[i * dim..(i + 1) * dim];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex_cmp(pt(a), pt(b)).then(a.cmp(&b)));

    let mut reps: Vec<f64> = Vec::with_capacity(coords.len());
    let mut group = vec![0usize; n];
    if dim == 1 || tol == 0.0 {
        let mut last: Option<usize> = None;
        for &i in &order {
            let p = pt(i);
            let merge = match last {
                Some(r) => {
                    let q = &reps[r * dim..(r + 1) * dim];
                    if tol == 0.0 {
                        p == q
                    } else {
                        (p[0] - q[0]).abs() <= tol
                    }
                }
                None => false,
            };
            if !merge {
                reps.extend_from_slice(p);
                last = Some(reps.len() / dim - 1);
            }
            group[i] = last.unwrap();
        }
        return (reps, group);
    }

    let mut cells: HashMap<[i64; MAX_DIM], Vec<usize>> = HashMap::new();
    let key = |p: &[f64]| {
        let mut k = [0i64; MAX_DIM];
        for (s, v) in k.iter_mut().zip(p) {
            *s = (v / tol).floor().clamp(-9.0e18, 9.0e18) as i64;
        }
        k
    };
    for &i in &order {
        let p = pt(i);
        let base = key(p);
        let mut found: Option<usize> = None;
        let total = 3usize.pow(dim as u32);
        for idx in 0..total {
            let mut k = base;
            let mut rem = idx;
            for s in k.iter_mut().take(dim) {
                *s += (rem % 3) as i64 - 1;
                rem /= 3;
            }
            if let Some(list) = cells.get(&k) {
                for &r in list {
                    if dist2(&reps[r * dim..(r + 1) * dim], p) <= tol * tol {
                        found = Some(found.map_or(r, |f: usize| f.min(r)));
                    }
                }
            }
        }
        let r = match found {
            Some(r) => r,
            None => {
                reps.extend_from_slice(p);
                let r = reps.len() / dim - 1;
                cells.entry(base).or_default().push(r);
                r
            }
        };
        group[i] = r;
    }
    (reps, group)
}

impl PointSet {
    /// Builds a point set; errors if any point lies outside `bbox`.
    pub fn new(dim: usize, coords: Vec<f64>, bbox: BoxRegion, dedup_tol: f64) -> Result<Self> {
        check_dim(dim)?;
        if bbox.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bbox.dim(),
            });
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid("coordinate count not a multiple of dim"));
        }
        if !(dedup_tol >= 0.0 && dedup_tol.is_finite()) {
            return Err(Error::invalid("dedup_tol must be finite and nonnegative"));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        if let Some(p) = coords.chunks_exact(dim).find(|p| !bbox.contains(p)) {
            return Err(Error::invalid(format!("point {p:?} outside box")));
        }
        let (coords, _) = canonicalize(dim, &coords, dedup_tol);
        Ok(Self {
            dim,
            coords,
            bbox,
            dedup_tol,
        })
    }

    /// Builds a point set keeping only points inside `bbox`.
    pub fn clipped(dim: usize, coords: Vec<f64>, bbox: BoxRegion, dedup_tol: f64) -> Result<Self> {
        check_dim(dim)?;
        let kept: Vec<f64> = coords
            .chunks_exact(dim)
            .filter(|p| bbox.contains(p))
            .flatten()
            .copied()
            .collect();
        Self::new(dim, kept, bbox, dedup_tol)
    }

    pub fn from_points(points: &[Vec<f64>], bbox: BoxRegion) -> Result<Self> {
        let dim = bbox.dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords, bbox, DEFAULT_DEDUP_TOL)
    }

    /// 1D convenience constructor.
    pub fn from_1d(values: &[f64], lo: f64, hi: f64) -> Result<Self> {
        Self::new(1, values.to_vec(), BoxRegion::new(vec![lo], vec![hi])?, DEFAULT_DEDUP_TOL)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn bbox(&self) -> &BoxRegion {
        &self.bbox
    }

    pub fn dedup_tol(&self) -> f64 {
        self.dedup_tol
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Restriction to a sub-box (the box metadata becomes the intersection).
    pub fn restrict(&self, region: &BoxRegion) -> Result<Self> {
        let bbox = self
            .bbox
            .intersect(region)
            .ok_or_else(|| Error::invalid("restriction box does not meet the point set box"))?;
        let coords = self
            .iter()
            .filter(|p| bbox.contains(p))
            .flatten()
            .copied()
            .collect();
        Ok(Self {
            dim: self.dim,
            coords,
            bbox,
            dedup_tol: self.dedup_tol,
        })
    }

    /// Scale all coordinates (and the box) by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid("scale factor must be positive"));
        }
        let bbox = BoxRegion::new(
            self.bbox.lo.iter().map(|v| v * c).collect(),
            self.bbox.hi.iter().map(|v| v * c).collect(),
        )?;
        Self::new(self.dim, self.coords.iter().map(|v| v * c).collect(), bbox, self.dedup_tol * c)
    }

    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let coords = self
            .iter()
            .flat_map(|p| p.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<_>>())
            .collect();
        Self::new(self.dim, coords, self.bbox.translate(v), self.dedup_tol)
    }

    /// First coordinates of a 1D set.
    pub fn values_1d(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        Ok(&self.coords)
    }

    /// Union of two point sets of equal dimension; box becomes the hull.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let bbox = BoxRegion::new(
            self.bbox.lo.iter().zip(&other.bbox.lo).map(|(a, b)| a.min(*b)).collect(),
            self.bbox.hi.iter().zip(&other.bbox.hi).map(|(a, b)| a.max(*b)).collect(),
        )?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Self::new(self.dim, coords, bbox, self.dedup_tol.max(other.dedup_tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_deduplicated() {
        let ps = PointSet::from_1d(&[3.0, 1.0, 1.0 + 1e-12, 2.0], 0.0, 5.0).unwrap();
        assert_eq!(ps.coords(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn nd_dedup_keeps_separated_points() {
        let coords = vec![0.0, 0.0, 1e-10, 0.0, 1.0, 1.0, 0.0, 1e-10, 1.0, 1.0 + 5e-10];
        let ps = PointSet::new(2, coords, BoxRegion::cube(2, 2.0), 1e-9).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.point(0), &[0.0, 0.0]);
    }

    #[test]
    fn rejects_points_outside_box() {
        assert!(PointSet::from_1d(&[3.0], 0.0, 1.0).is_err());
        let ps = PointSet::clipped(1, vec![3.0, 0.5], BoxRegion::new(vec![0.0], vec![1.0]).unwrap(), 0.0).unwrap();
        assert_eq!(ps.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let ps = PointSet::new(2, vec![0.1, 0.2, -0.3, 0.4], BoxRegion::cube(2, 1.0), 1e-9).unwrap();
        let s = serde_json::to_string(&ps).unwrap();
        assert!(s.contains("\"box\""));
        let back: PointSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ps);
    }

    #[test]
    fn rejects_high_dimension() {
        assert!(matches!(
            PointSet::new(5, vec![], BoxRegion::cube(5, 1.0), 0.0),
            Err(Error::UnsupportedDimension(5))
        ));
    }
}
