//! Seeded random comb representations on the line, for round-trip testing.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::comb::{CombRepresentation, TrigPolynomial};
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Lattice};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCombOptions {
    pub spacing: (f64, f64),
    pub max_cosets: usize,
    pub max_terms: usize,
    /// Minimum circular separation of translates, as a fraction of the spacing.
    pub translate_separation: f64,
    /// Minimum circular separation of frequencies, as a fraction of 1/spacing.
    pub frequency_separation: f64,
    pub coefficient_modulus: (f64, f64),
}

impl Default for SyntheticCombOptions {
    fn default() -> Self {
        Self {
            spacing: (0.5, 2.0),
            max_cosets: 4,
            max_terms: 5,
            translate_separation: 0.05,
            frequency_separation: 0.05,
            coefficient_modulus: (0.5, 2.0),
        }
    }
}

/// `count` values in [0, 1) with pairwise circular distance ≥ `sep`.
fn separated(rng: &mut ChaCha8Rng, count: usize, sep: f64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 10_000 {
            return Err(Error::invalid("cannot place separated values; lower the separation"));
        }
        let u: f64 = rng.gen_range(0.0..1.0);
        if out.iter().all(|v| {
            let d = (u - v).abs();
            d.min(1.0 - d) >= sep
        }) {
            out.push(u);
        }
    }
    Ok(out)
}

/// Random 1D representation: lattice cZ, N ≤ max_cosets translates, each
/// polynomial with ≤ max_terms frequencies in the fundamental cell of L*.
pub fn random_comb_representation(seed: u64, opts: &SyntheticCombOptions) -> Result<CombRepresentation> {
    if opts.max_cosets == 0 || opts.max_terms == 0 || !(opts.spacing.0 > 0.0 && opts.spacing.1 >= opts.spacing.0) {
        return Err(Error::invalid("synthetic comb needs positive caps and spacing range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = rng.gen_range(opts.spacing.0..=opts.spacing.1);
    let cosets = rng.gen_range(1..=opts.max_cosets);
    let translates: Vec<Vec<f64>> = separated(&mut rng, cosets, opts.translate_separation)?
        .into_iter()
        .map(|u| vec![u * spacing])
        .collect();
    let mut polys = Vec::with_capacity(cosets);
    for _ in 0..cosets {
        let terms = rng.gen_range(1..=opts.max_terms);
        let freqs: Vec<Vec<f64>> = separated(&mut rng, terms, opts.frequency_separation)?
            .into_iter()
            .map(|u| vec![(u - 0.5) / spacing])
            .collect();
        let coeffs: Vec<Complex64> = (0..terms)
            .map(|_| {
                let r = rng.gen_range(opts.coefficient_modulus.0..=opts.coefficient_modulus.1);
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(r, theta)
            })
            .collect();
        polys.push(TrigPolynomial::new(1, freqs, coeffs)?);
    }
    CombRepresentation::new(Lattice::scaled_integer(1, spacing)?, translates, polys, 0.0)
}

/// Box half-width `factor`·det L, centred at the origin.
pub fn synthetic_box(rep: &CombRepresentation, factor: f64) -> BoxRegion {
    BoxRegion::cube(rep.dim(), factor * rep.lattice.det().abs())
}
