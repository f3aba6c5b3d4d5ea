//! Fitting a lattice L and at most `max_cosets` translates so that a point set
//! lies on ∪_j (L + τ_j).

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::comb::CombRepresentation;
use crate::cutproject::{enumerate_box, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Lattice, PointSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Absolute distance tolerance; `None` means `relative_tol` × median spacing.
    pub tol: Option<f64>,
    pub relative_tol: f64,
    pub max_cosets: usize,
    /// Minimum fraction of points on the chosen cosets.
    pub coverage_floor: f64,
    /// Minimum fraction of coset lattice points inside the box that are occupied.
    pub fill_floor: f64,
    /// Most frequent neighbour differences kept per neighbour order (1D).
    pub modes_per_order: usize,
    /// Points nearest the box centre used to build the difference set (nD).
    pub difference_sample: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: None,
            relative_tol: 1e-6,
            max_cosets: 8,
            coverage_floor: 0.999,
            fill_floor: 0.99,
            modes_per_order: 4,
            difference_sample: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeFit {
    /// Chosen lattice, or the best-covering candidate when the fit failed.
    pub lattice: Option<Lattice>,
    pub translates: Vec<Vec<f64>>,
    pub coverage: f64,
    pub fill: f64,
    pub fitted: bool,
    pub tol: f64,
    pub candidates_scanned: usize,
    /// Largest distance from a covered point to its coset after refinement.
    pub max_deviation: f64,
}

struct Evaluation {
    lattice: Lattice,
    translates: Vec<Vec<f64>>,
    coverage: f64,
    fill: f64,
}

impl Evaluation {
    fn succeeds(&self, opts: &FitOptions) -> bool {
        self.coverage >= opts.coverage_floor && self.fill >= opts.fill_floor
    }
}

/// Residue of `x` modulo L in fractional coordinates [0, 1)^n.
fn residue(lattice: &Lattice, x: &[f64]) -> Vec<f64> {
    lattice
        .coords(x)
        .iter()
        .map(|c| {
            let r = c - c.floor();
            // Rounding can leave a lattice point at 1 − ulp.
            if 1.0 - r <= 1e-12 {
                0.0
            } else {
                r
            }
        })
        .collect()
}

/// Physical length of the wrapped fractional difference.
fn torus_distance(lattice: &Lattice, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let v = x - y;
            v - v.round()
        })
        .collect();
    let p = lattice.point_real(&d);
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Leader clustering of residues on the torus R^n/L at distance `tol`.
/// Returns per-point cluster ids and, per cluster, its size and leader residue.
fn cluster_residues(lattice: &Lattice, ps: &PointSet, tol: f64) -> (Vec<usize>, Vec<(usize, Vec<f64>)>) {
    let dim = ps.dim();
    let dual = lattice.dual();
    // Points within tol differ by at most tol·|dual row| in each fractional coordinate.
    let cells: Vec<i64> = (0..dim)
        .map(|a| {
            let n: f64 = dual.basis_vector(a).iter().map(|v| v * v).sum::<f64>().sqrt();
            let h = (tol * n).max(1e-12);
            ((1.0 / h).floor() as i64).clamp(1, 1 << 40)
        })
        .collect();
    let mut by_cell: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut clusters: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut ids = Vec::with_capacity(ps.len());
    let offsets = 3usize.pow(dim as u32);
    for x in ps.iter() {
        let r = residue(lattice, x);
        let cell: Vec<i64> = r.iter().zip(&cells).map(|(v, k)| ((v * *k as f64).floor() as i64).rem_euclid(*k)).collect();
        let mut found = None;
        let mut seen: Vec<Vec<i64>> = Vec::new();
        'search: for o in 0..offsets {
            let mut rem = o;
            let nb: Vec<i64> = cell
                .iter()
                .zip(&cells)
                .map(|(c, k)| {
                    let off = (rem % 3) as i64 - 1;
                    rem /= 3;
                    (c + off).rem_euclid(*k)
                })
                .collect();
            if seen.contains(&nb) {
                continue;
            }
            if let Some(list) = by_cell.get(&nb) {
                for &id in list {
                    if torus_distance(lattice, &r, &clusters[id].1) <= tol {
                        found = Some(found.map_or(id, |f: usize| f.min(id)));
                        if found == Some(0) {
                            break 'search;
                        }
                    }
                }
            }
            seen.push(nb);
        }
        let id = match found {
            Some(id) => id,
            None => {
                clusters.push((0, r));
                by_cell.entry(cell).or_default().push(clusters.len() - 1);
                clusters.len() - 1
            }
        };
        clusters[id].0 += 1;
        ids.push(id);
    }
    (ids, clusters)
}

/// Lattice points of τ + L inside `bbox` grown by `tol`.
fn coset_count(lattice: &Lattice, tau: &[f64], bbox: &BoxRegion, tol: f64) -> Result<usize> {
    let region = BoxRegion::new(
        bbox.lo.iter().zip(tau).map(|(l, t)| l - t - tol).collect(),
        bbox.hi.iter().zip(tau).map(|(h, t)| h - t + tol).collect(),
    )?;
    Ok(enumerate_box(lattice, &region, DEFAULT_ENUMERATION_CAP)?.len() / lattice.dim())
}

fn evaluate(lattice: Lattice, ps: &PointSet, tol: f64, max_cosets: usize) -> Result<Evaluation> {
    let (_, mut clusters) = cluster_residues(&lattice, ps, tol);
    clusters.sort_by(|a, b| b.0.cmp(&a.0).then(crate::geometry::lex_cmp(&a.1, &b.1)));
    clusters.truncate(max_cosets);
    let covered: usize = clusters.iter().map(|c| c.0).sum();
    let mut expected = 0usize;
    let mut translates = Vec::with_capacity(clusters.len());
    for (_, r) in &clusters {
        let tau = lattice.point_real(r);
        expected += coset_count(&lattice, &tau, ps.bbox(), tol)?;
        translates.push(tau);
    }
    Ok(Evaluation {
        lattice,
        translates,
        coverage: covered as f64 / ps.len() as f64,
        fill: if expected == 0 { 0.0 } else { (covered as f64 / expected as f64).min(1.0) },
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Euclid on reals: remainders below `tol` count as zero. `None` when the
/// recursion drops below `floor` without terminating.
pub fn approximate_gcd(values: &[f64], tol: f64, floor: f64) -> Option<f64> {
    let mut g = values.iter().copied().map(f64::abs).find(|v| *v > tol)?;
    for &v in values {
        let (mut a, mut b) = (v.abs().max(g), v.abs().min(g));
        while b > tol {
            if b < floor {
                return None;
            }
            let mut r = a % b;
            if b - r <= tol {
                r = 0.0;
            }
            a = b;
            b = r;
        }
        g = a;
    }
    (g >= floor).then_some(g)
}

/// Distinct values at `tol` with multiplicities, most frequent first.
fn modes(mut values: Vec<f64>, tol: f64) -> Vec<(f64, usize)> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            let group = &values[start..i];
            out.push((group[group.len() / 2], group.len()));
            start = i;
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.total_cmp(&b.0)));
    out
}

/// Candidate periods: modes of x_{i+k} − x_i for k ≤ max_cosets (a set made
/// of N cosets of pZ has period p = x_{i+N} − x_i), plus multiples of their
/// approximate GCD.
fn candidates_1d(xs: &[f64], tol: f64, opts: &FitOptions) -> Vec<f64> {
    let mut out = Vec::new();
    let mut first_order = Vec::new();
    for k in 1..=opts.max_cosets.min(xs.len() - 1) {
        let diffs: Vec<f64> = xs.windows(k + 1).map(|w| w[k] - w[0]).collect();
        let m = modes(diffs, tol);
        if k == 1 {
            first_order = m.iter().map(|(v, _)| *v).collect();
        }
        out.extend(m.iter().take(opts.modes_per_order).map(|(v, _)| *v));
    }
    let smallest = first_order.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(g) = approximate_gcd(&first_order, tol, smallest / opts.max_cosets as f64) {
        out.extend((1..=opts.max_cosets).map(|m| m as f64 * g));
    }
    out.retain(|p| *p > tol);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= tol);
    out
}

/// Shortest independent vectors of the difference set near the box centre,
/// size-reduced.
fn generating_basis(ps: &PointSet, tol: f64, sample: usize) -> Option<Vec<Vec<f64>>> {
    let dim = ps.dim();
    let centre = ps.bbox().center();
    let mut idx: Vec<usize> = (0..ps.len()).collect();
    let dist = |i: usize| -> f64 { ps.point(i).iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum() };
    idx.sort_by(|a, b| dist(*a).total_cmp(&dist(*b)).then(a.cmp(b)));
    idx.truncate(sample);
    let mut diffs: Vec<(f64, Vec<f64>)> = Vec::new();
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            let mut d: Vec<f64> = ps.point(j).iter().zip(ps.point(i)).map(|(a, b)| a - b).collect();
            if let Some(first) = d.iter().find(|v| v.abs() > tol) {
                if *first < 0.0 {
                    d.iter_mut().for_each(|v| *v = -*v);
                }
                let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                diffs.push((n, d));
            }
        }
    }
    diffs.sort_by(|a, b| a.0.total_cmp(&b.0).then(crate::geometry::lex_cmp(&a.1, &b.1)));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for (n, d) in &diffs {
        let mut r = d.clone();
        for q in &ortho {
            let c: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn > 1e-3 * n && rn > tol {
            ortho.push(r.iter().map(|v| v / rn).collect());
            basis.push(d.clone());
            if basis.len() == dim {
                break;
            }
        }
    }
    if basis.len() < dim {
        return None;
    }
    // Size reduction against the Gram-Schmidt vectors.
    for j in 1..dim {
        for i in (0..j).rev() {
            let gs = gram_schmidt(&basis);
            let num: f64 = basis[j].iter().zip(&gs[i]).map(|(a, b)| a * b).sum();
            let den: f64 = gs[i].iter().map(|v| v * v).sum();
            let mu = (num / den).round();
            if mu != 0.0 {
                let bi = basis[i].clone();
                basis[j].iter_mut().zip(&bi).for_each(|(a, b)| *a -= mu * b);
            }
        }
    }
    Some(basis)
}

fn gram_schmidt(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        let mut r = b.clone();
        for q in &out {
            let c: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum::<f64>() / q.iter().map(|v| v * v).sum::<f64>();
            r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        out.push(r);
    }
    out
}

/// Lower-triangular Hermite normal forms of determinant `index` in dimension `dim`.
fn hermite_forms(dim: usize, index: usize) -> Vec<Vec<Vec<i64>>> {
    fn diagonals(dim: usize, index: usize) -> Vec<Vec<usize>> {
        if dim == 1 {
            return vec![vec![index]];
        }
        let mut out = Vec::new();
        for a in (1..=index).filter(|a| index.is_multiple_of(*a)) {
            for mut rest in diagonals(dim - 1, index / a) {
                rest.insert(0, a);
                out.push(rest);
            }
        }
        out
    }
    let mut out = Vec::new();
    for diag in diagonals(dim, index) {
        // Free entries H[i][j], j < i, range over 0..diag[j].
        let slots: Vec<(usize, usize)> = (0..dim).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let total: usize = slots.iter().map(|(_, j)| diag[*j]).product();
        for mut code in 0..total {
            let mut h = vec![vec![0i64; dim]; dim];
            for (i, d) in diag.iter().enumerate() {
                h[i][i] = *d as i64;
            }
            for (i, j) in &slots {
                h[*i][*j] = (code % diag[*j]) as i64;
                code /= diag[*j];
            }
            out.push(h);
        }
    }
    out
}

/// Least-squares refinement x_i ≈ τ_{c(i)} + k_i·B over covered points;
/// kept only when it lowers the largest deviation.
fn refine(eval: &Evaluation, ps: &PointSet, tol: f64) -> Result<(Lattice, Vec<Vec<f64>>, f64)> {
    let dim = ps.dim();
    let l = &eval.lattice;
    let n_cos = eval.translates.len();
    let mut rows: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    for x in ps.iter() {
        let hit = eval.translates.iter().enumerate().find_map(|(j, t)| {
            let d: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
            let k: Vec<f64> = l.coords(&d).iter().map(|c| c.round()).collect();
            let err: f64 = l.point_real(&k).iter().zip(&d).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (err <= tol).then_some((j, k))
        });
        if let Some((j, k)) = hit {
            rows.push((j, k, x.to_vec()));
        }
    }
    let deviation = |lat: &Lattice, taus: &[Vec<f64>]| -> f64 {
        rows.iter()
            .map(|(j, k, x)| {
                let p = lat.point_real(k);
                p.iter().zip(&taus[*j]).zip(x).map(|((a, t), v)| (a + t - v).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    };
    let before = deviation(l, &eval.translates);
    let cols = n_cos + dim;
    if rows.len() <= cols {
        return Ok((l.clone(), eval.translates.clone(), before));
    }
    let mut a = DMatrix::<f64>::zeros(rows.len(), cols);
    for (r, (j, k, _)) in rows.iter().enumerate() {
        a[(r, *j)] = 1.0;
        for (c, kv) in k.iter().enumerate() {
            a[(r, n_cos + c)] = *kv;
        }
    }
    let svd = a.svd(true, true);
    let mut basis = DMatrix::<f64>::zeros(dim, dim);
    let mut taus = vec![vec![0.0; dim]; n_cos];
    for d in 0..dim {
        let b = DMatrix::from_iterator(rows.len(), 1, rows.iter().map(|(_, _, x)| x[d]));
        let Ok(sol) = svd.solve(&b, 1e-14) else {
            return Ok((l.clone(), eval.translates.clone(), before));
        };
        for (j, t) in taus.iter_mut().enumerate() {
            t[d] = sol[(j, 0)];
        }
        for c in 0..dim {
            basis[(c, d)] = sol[(n_cos + c, 0)];
        }
    }
    let Ok(lat) = Lattice::new(basis) else {
        return Ok((l.clone(), eval.translates.clone(), before));
    };
    let after = deviation(&lat, &taus);
    if after < before {
        // Re-reduce translates into the fundamental cell.
        let taus = taus.iter().map(|t| lat.point_real(&residue(&lat, t))).collect();
        Ok((lat, taus, after))
    } else {
        Ok((l.clone(), eval.translates.clone(), before))
    }
}

/// Median consecutive gap in 1D, `(volume / count)^(1/n)` otherwise.
fn typical_spacing(ps: &PointSet) -> f64 {
    if ps.dim() == 1 {
        let xs: Vec<f64> = ps.iter().map(|p| p[0]).collect();
        return median(xs.windows(2).map(|w| w[1] - w[0]).collect());
    }
    crate::geometry::mean_spacing(ps)
}

/// Fits L and at most `max_cosets` translates. A failed fit is a result
/// (`fitted = false`) carrying the best coverage seen, not an error.
pub fn fit_lattice(ps: &PointSet, opts: &FitOptions) -> Result<LatticeFit> {
    let dim = ps.dim();
    if dim > 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if ps.len() < 2 * (dim + 1) {
        return Err(Error::invalid(format!(
            "lattice fitting needs at least {} points, got {}",
            2 * (dim + 1),
            ps.len()
        )));
    }
    let tol = opts.tol.unwrap_or_else(|| opts.relative_tol * typical_spacing(ps));
    if !(tol > 0.0) {
        return Err(Error::invalid("fit tolerance must be positive"));
    }
    let lattices: Vec<Lattice> = if dim == 1 {
        let xs: Vec<f64> = ps.iter().map(|p| p[0]).collect();
        candidates_1d(&xs, tol, opts)
            .into_iter()
            .filter_map(|p| Lattice::scaled_integer(1, p).ok())
            .collect()
    } else {
        match generating_basis(ps, tol, opts.difference_sample) {
            None => vec![],
            Some(rows) => {
                let g = Lattice::from_rows(&rows)?;
                let max_index = if dim == 2 { 2 * opts.max_cosets } else { opts.max_cosets };
                (1..=max_index)
                    .flat_map(|m| hermite_forms(dim, m))
                    .filter_map(|h| {
                        let rows: Vec<Vec<f64>> = h
                            .iter()
                            .map(|coeffs| g.point(&coeffs.to_vec()))
                            .collect();
                        Lattice::from_rows(&rows).ok()
                    })
                    .collect()
            }
        }
    };
    let scanned = lattices.len();
    let mut best: Option<Evaluation> = None;
    let mut chosen: Option<Evaluation> = None;
    for lat in lattices {
        let e = evaluate(lat, ps, tol, opts.max_cosets)?;
        if e.succeeds(opts) {
            // Candidates come in increasing period (1D) or index (nD) order.
            let better = chosen.as_ref().is_none_or(|c| {
                e.lattice.det().abs() < c.lattice.det().abs() * (1.0 - 1e-9)
                    || (e.translates.len() < c.translates.len() && (e.lattice.det().abs() - c.lattice.det().abs()).abs() <= 1e-9 * c.lattice.det().abs())
            });
            if better {
                chosen = Some(e);
            }
        } else if best.as_ref().is_none_or(|b| e.coverage > b.coverage) {
            best = Some(e);
        }
    }
    match chosen {
        Some(e) => {
            let (lattice, translates, dev) = refine(&e, ps, tol)?;
            Ok(LatticeFit {
                lattice: Some(lattice),
                translates,
                coverage: e.coverage,
                fill: e.fill,
                fitted: true,
                tol,
                candidates_scanned: scanned,
                max_deviation: dev,
            })
        }
        None => Ok(LatticeFit {
            coverage: best.as_ref().map_or(0.0, |b| b.coverage),
            fill: best.as_ref().map_or(0.0, |b| b.fill),
            translates: best.as_ref().map_or(vec![], |b| b.translates.clone()),
            lattice: best.map(|b| b.lattice),
            fitted: false,
            tol,
            candidates_scanned: scanned,
            max_deviation: f64::NAN,
        }),
    }
}

/// Fraction of points within `tol` of ∪_j (L + τ_j).
pub fn coset_cover_check(ps: &PointSet, rep: &CombRepresentation, tol: f64) -> Result<f64> {
    if ps.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: ps.dim(),
        });
    }
    if ps.is_empty() {
        return Ok(1.0);
    }
    let hits = ps.iter().filter(|x| rep.coset_of(x, tol).is_some()).count();
    Ok(hits as f64 / ps.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutproject::fibonacci_scheme;
    use crate::structure::TrigPolynomial;
    use num_complex::Complex64;

    fn comb(points: impl Iterator<Item = f64>, r: f64) -> PointSet {
        let v: Vec<f64> = points.collect();
        PointSet::from_1d(&v, -r, r).unwrap()
    }

    fn integers(n: i64) -> PointSet {
        comb((-n..=n).map(|k| k as f64), n as f64)
    }

    #[test]
    fn integers_fit_unit_lattice() {
        let fit = fit_lattice(&integers(100), &FitOptions::default()).unwrap();
        assert!(fit.fitted);
        assert!((fit.lattice.unwrap().det() - 1.0).abs() < 1e-12);
        assert_eq!(fit.translates.len(), 1);
        assert_eq!(fit.coverage, 1.0);
    }

    #[test]
    fn two_cosets_fit_unit_lattice() {
        let ps = comb((-100..100).flat_map(|k| [k as f64, k as f64 + 1.0 / 3.0]), 100.0);
        let fit = fit_lattice(&ps, &FitOptions::default()).unwrap();
        assert!(fit.fitted, "{fit:?}");
        assert!((fit.lattice.as_ref().unwrap().det() - 1.0).abs() < 1e-9, "{fit:?}");
        assert_eq!(fit.translates.len(), 2);
        assert_eq!(fit.coverage, 1.0);
        let mut taus: Vec<f64> = fit.translates.iter().map(|t| t[0]).collect();
        taus.sort_by(f64::total_cmp);
        assert!(taus[0].abs() < 1e-9 && (taus[1] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn fibonacci_coverage_stays_below_half() {
        let s = fibonacci_scheme();
        let ps = s.model_set(&BoxRegion::cube(1, 1000.0)).unwrap();
        let opts = FitOptions {
            tol: Some(1e-3),
            ..Default::default()
        };
        let fit = fit_lattice(&ps, &opts).unwrap();
        assert!(!fit.fitted);
        assert!(fit.coverage < 0.5, "{}", fit.coverage);
        assert!(fit.candidates_scanned > 0);
        // Independent scan over every neighbour difference up to order 8.
        let xs: Vec<f64> = ps.iter().map(|p| p[0]).collect();
        let mut periods: Vec<f64> = (1..=8).flat_map(|k| xs.windows(k + 1).map(move |w| w[k] - w[0])).collect();
        periods.sort_by(f64::total_cmp);
        periods.dedup_by(|a, b| (*a - *b).abs() <= 1e-3);
        for p in periods {
            let mut res: Vec<f64> = xs.iter().map(|x| x.rem_euclid(p)).collect();
            res.sort_by(f64::total_cmp);
            let mut sizes = Vec::new();
            let mut run = 1;
            for w in res.windows(2) {
                if w[1] - w[0] <= 1e-3 {
                    run += 1;
                } else {
                    sizes.push(run);
                    run = 1;
                }
            }
            sizes.push(run);
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            let top: usize = sizes.iter().take(8).sum();
            assert!((top as f64) < 0.5 * xs.len() as f64, "period {p}: {top}");
        }
    }

    #[test]
    fn scale_equivariance() {
        let ps = comb((-60..60).flat_map(|k| [0.7 * k as f64, 0.7 * k as f64 + 0.2]), 42.0);
        let a = fit_lattice(&ps, &FitOptions::default()).unwrap();
        let b = fit_lattice(&ps.scaled(3.0).unwrap(), &FitOptions::default()).unwrap();
        assert!(a.fitted && b.fitted);
        let (da, db) = (a.lattice.unwrap().det().abs(), b.lattice.unwrap().det().abs());
        assert!((db - 3.0 * da).abs() < 1e-9 * db, "{da} {db}");
    }

    #[test]
    fn two_dimensional_fits() {
        let lat = Lattice::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.8]]).unwrap();
        let bbox = BoxRegion::new(vec![-16.0, -8.0], vec![16.0, 8.0]).unwrap();
        let coords = enumerate_box(&lat, &bbox, DEFAULT_ENUMERATION_CAP).unwrap();
        let ps = PointSet::new(2, coords, bbox, crate::geometry::DEFAULT_DEDUP_TOL).unwrap();
        let fit = fit_lattice(&ps, &FitOptions::default()).unwrap();
        assert!(fit.fitted);
        assert!((fit.lattice.unwrap().det().abs() - 0.8).abs() < 1e-9);

        let mut two = Vec::new();
        for i in -6..=6 {
            for j in -6..=6 {
                two.push(vec![i as f64, j as f64]);
                two.push(vec![i as f64 + 0.5, j as f64 + 0.25]);
            }
        }
        let ps = PointSet::from_points(&two, BoxRegion::new(vec![-6.0; 2], vec![6.5; 2]).unwrap()).unwrap();
        let fit = fit_lattice(&ps, &FitOptions::default()).unwrap();
        assert!(fit.fitted, "{fit:?}");
        assert!((fit.lattice.unwrap().det().abs() - 1.0).abs() < 1e-9);
        assert_eq!(fit.translates.len(), 2);
    }

    #[test]
    fn cover_check_examples() {
        let rep = CombRepresentation::new(
            Lattice::scaled_integer(1, 1.0).unwrap(),
            vec![vec![0.0]],
            vec![TrigPolynomial::constant(1, Complex64::new(1.0, 0.0))],
            0.0,
        )
        .unwrap();
        assert_eq!(coset_cover_check(&integers(20), &rep, 1e-9).unwrap(), 1.0);
        let shifted = integers(20).translated(&[0.5]).unwrap();
        assert_eq!(coset_cover_check(&shifted, &rep, 1e-9).unwrap(), 0.0);
        let fib = fibonacci_scheme().model_set(&BoxRegion::cube(1, 100.0)).unwrap();
        assert!(coset_cover_check(&fib, &rep, 1e-3).unwrap() < 1.0);
    }

    #[test]
    fn approximate_gcd_cases() {
        assert!((approximate_gcd(&[1.0, 2.0 / 3.0], 1e-9, 1e-3).unwrap() - 1.0 / 3.0).abs() < 1e-9);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(approximate_gcd(&[1.0, phi], 1e-9, 0.1).is_none());
    }
}
