//! Either the spectrum is uniformly discrete, or its ε-level sets pile up
//! around a relatively dense set of points as ε → 0. At fixed truncation the
//! two cases are told apart by how fast the ε-level minimum gap shrinks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{covering_radius, lex_cmp, min_separation, PointSet};
use crate::measures::DiscreteMeasure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DichotomyOptions {
    /// gap(ε_first)/gap(ε_last) at or above this means accumulation.
    pub shrink_ratio: f64,
    /// At or below this the gap curve counts as flat.
    pub flat_ratio: f64,
    /// Cluster radius as a multiple of the finest-level minimum gap.
    pub cluster_scale: f64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        Self {
            shrink_ratio: 10.0,
            flat_ratio: 1.1,
            cluster_scale: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomyVerdict {
    UniformlyDiscrete,
    Accumulating,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLevel {
    pub epsilon: f64,
    pub atoms: usize,
    pub min_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub verdict: DichotomyVerdict,
    pub gap_curve: Vec<GapLevel>,
    /// gap at the coarsest level over gap at the finest.
    pub shrink_factor: Option<f64>,
    pub cluster_radius: Option<f64>,
    /// Leaders of finest-level clusters holding at least two atoms.
    pub cluster_centers: Vec<Vec<f64>>,
    /// Covering radius of the cluster centres over the spectrum box.
    pub cluster_cover_radius: Option<f64>,
}

/// Greedy clustering: atoms by decreasing |weight| become leaders unless
/// within `radius` of an earlier leader. Returns (leader, member count).
fn leader_clusters(level: &DiscreteMeasure, radius: f64) -> Vec<(Vec<f64>, usize)> {
    let mut order: Vec<usize> = (0..level.len()).collect();
    let w = level.weights();
    order.sort_by(|a, b| {
        w[*b].norm()
            .total_cmp(&w[*a].norm())
            .then(lex_cmp(level.position(*a), level.position(*b)))
    });
    let mut leaders: Vec<(Vec<f64>, usize)> = Vec::new();
    for i in order {
        let x = level.position(i);
        let hit = leaders.iter_mut().find(|(c, _)| {
            c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= radius
        });
        match hit {
            Some(l) => l.1 += 1,
            None => leaders.push((x.to_vec(), 1)),
        }
    }
    leaders
}

pub fn dichotomy_report(spec: &DiscreteMeasure, eps_levels: &[f64], opts: &DichotomyOptions) -> Result<DichotomyReport> {
    if eps_levels.len() < 3 {
        return Err(Error::invalid("dichotomy needs at least three ε levels"));
    }
    if eps_levels.iter().any(|e| !(*e > 0.0 && e.is_finite())) || eps_levels.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("ε levels must be positive and strictly decreasing"));
    }
    let max = spec.max_weight();
    let levels: Vec<DiscreteMeasure> = eps_levels.iter().map(|e| spec.above(e * max)).collect();
    let gap_curve: Vec<GapLevel> = eps_levels
        .iter()
        .zip(&levels)
        .map(|(e, l)| GapLevel {
            epsilon: *e,
            atoms: l.len(),
            min_gap: (l.len() >= 2).then(|| min_separation(&l.support()).distance),
        })
        .collect();
    let inconclusive = DichotomyReport {
        verdict: DichotomyVerdict::Inconclusive,
        gap_curve: gap_curve.clone(),
        shrink_factor: None,
        cluster_radius: None,
        cluster_centers: vec![],
        cluster_cover_radius: None,
    };
    let (Some(first), Some(last)) = (gap_curve[0].min_gap, gap_curve[gap_curve.len() - 1].min_gap) else {
        return Ok(inconclusive);
    };
    let shrink = first / last;
    let verdict = if shrink >= opts.shrink_ratio {
        DichotomyVerdict::Accumulating
    } else if shrink <= opts.flat_ratio {
        DichotomyVerdict::UniformlyDiscrete
    } else {
        DichotomyVerdict::Inconclusive
    };
    let radius = opts.cluster_scale * last;
    let finest = &levels[levels.len() - 1];
    let cluster_centers: Vec<Vec<f64>> = leader_clusters(finest, radius)
        .into_iter()
        .filter(|(_, n)| *n >= 2)
        .map(|(c, _)| c)
        .collect();
    let cluster_cover_radius = if cluster_centers.is_empty() {
        None
    } else {
        let centers = PointSet::from_points(&cluster_centers, spec.bbox().clone())?;
        Some(covering_radius(&centers, spec.bbox())?.radius)
    };
    Ok(DichotomyReport {
        verdict,
        gap_curve,
        shrink_factor: Some(shrink),
        cluster_radius: Some(radius),
        cluster_centers,
        cluster_cover_radius,
    })
}
