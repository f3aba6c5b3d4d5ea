//! Uniform hash grid over points in R^n (n ≤ 4) for neighbour queries.

use std::collections::HashMap;

pub(crate) const MAX_DIM: usize = 4;

type Key = [i64; MAX_DIM];

#[derive(Debug)]
pub struct GridIndex<'a> {
    dim: usize,
    cell: f64,
    coords: &'a [f64],
    cells: HashMap<Key, Vec<u32>>,
}

fn key_of(x: &[f64], cell: f64) -> Key {
    let mut k = [0i64; MAX_DIM];
    for (slot, v) in k.iter_mut().zip(x) {
        let q = (v / cell).floor();
        *slot = q.clamp(-9.0e18, 9.0e18) as i64;
    }
    k
}

impl<'a> GridIndex<'a> {
    /// Index the flat coordinate array `coords` (row-major, `dim` per point).
    pub fn new(dim: usize, coords: &'a [f64], cell: f64) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "grid index supports dimensions 1..=4");
        assert!(cell > 0.0 && cell.is_finite());
        let mut cells: HashMap<Key, Vec<u32>> = HashMap::new();
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            cells.entry(key_of(p, cell)).or_default().push(i as u32);
        }
        Self {
            dim,
            cell,
            coords,
            cells,
        }
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn visit_ring(&self, center: &Key, ring: i64, f: &mut impl FnMut(usize)) {
        let d = self.dim;
        let span = 2 * ring + 1;
        let total = span.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut k = *center;
            let mut on_shell = false;
            for slot in k.iter_mut().take(d) {
                let off = rem % span - ring;
                rem /= span;
                if off.abs() == ring {
                    on_shell = true;
                }
                *slot += off;
            }
            if ring > 0 && !on_shell {
                continue;
            }
            if let Some(list) = self.cells.get(&k) {
                for &i in list {
                    f(i as usize);
                }
            }
        }
    }

    /// Indices of all points within Euclidean distance `r` of `q`, ascending.
    pub fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let center = key_of(q, self.cell);
        let rings = (r / self.cell).ceil() as i64;
        let mut out = Vec::new();
        for ring in 0..=rings {
            self.visit_ring(&center, ring, &mut |i| {
                if dist2(self.point(i), q) <= r * r {
                    out.push(i);
                }
            });
        }
        out.sort_unstable();
        out
    }

    /// Nearest point to `q` (lowest index on ties) and its distance.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.cells.is_empty() {
            return None;
        }
        let center = key_of(q, self.cell);
        let mut best: Option<(usize, f64)> = None;
        let mut ring = 0i64;
        loop {
            self.visit_ring(&center, ring, &mut |i| {
                let d2 = dist2(self.point(i), q);
                match best {
                    Some((bi, bd)) if d2 > bd || (d2 == bd && i > bi) => {}
                    _ => best = Some((i, d2)),
                }
            });
            if let Some((_, bd)) = best {
                // Points outside the visited rings are at least `ring * cell` away.
                let reach = ring as f64 * self.cell;
                if bd.sqrt() <= reach {
                    break;
                }
            }
            ring += 1;
            if ring > 1 << 20 {
                break;
            }
        }
        best.map(|(i, d2)| (i, d2.sqrt()))
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<f64> = (0..200)
            .flat_map(|i| {
                let t = i as f64 * 0.7373;
                [t.sin() * 10.0, (1.3 * t).cos() * 7.0]
            })
            .collect();
        let idx = GridIndex::new(2, &pts, 0.5);
        for j in 0..50 {
            let q = [j as f64 * 0.41 - 10.0, (j as f64 * 0.9).sin() * 12.0];
            let (i, d) = idx.nearest(&q).unwrap();
            let brute = pts
                .chunks_exact(2)
                .map(|p| dist2(p, &q).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-12);
            assert!((dist2(&pts[2 * i..2 * i + 2], &q).sqrt() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn within_radius() {
        let pts: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let idx = GridIndex::new(1, &pts, 0.3);
        assert_eq!(idx.within(&[4.2], 1.5), vec![3, 4, 5]);
    }
}
