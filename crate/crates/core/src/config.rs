//! Run configuration shared by the command-line front end, read from TOML or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cutproject::{NowhereDenseConfig, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::io::read_text;
use crate::measures::DEFAULT_GRID_CAP;
use crate::structure::DichotomyOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Truncation {
    /// Half-width of generated point sets and measures.
    pub box_half_width: f64,
    /// Autocorrelation radius R.
    pub radius: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            box_half_width: 100.0,
            radius: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Largest grid pitch; `None` means 1/(8R).
    pub max_pitch: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lo: vec![-2.0],
            hi: vec![2.0],
            max_pitch: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub dedup: f64,
    /// Peak threshold relative to the largest grid value.
    pub peak_threshold: f64,
    pub match_tol: f64,
    pub fit_relative: f64,
    pub recovery_relative: f64,
    pub imaginary_leak: f64,
    pub leak_neighborhood: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            dedup: 1e-9,
            peak_threshold: 1e-3,
            match_tol: 1e-6,
            fit_relative: 1e-6,
            recovery_relative: 1e-9,
            imaginary_leak: 1e-10,
            leak_neighborhood: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub enumeration: u64,
    pub grid: u64,
    pub max_cosets: usize,
    pub max_terms: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            enumeration: DEFAULT_ENUMERATION_CAP,
            grid: DEFAULT_GRID_CAP,
            max_cosets: 8,
            max_terms: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DichotomyConfig {
    pub eps_levels: Vec<f64>,
    pub options: DichotomyOptions,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self {
            eps_levels: vec![1e-1, 1e-2, 1e-3],
            options: DichotomyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityConfig {
    pub ball_radius: f64,
    pub centers: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            ball_radius: 10.0,
            centers: 64,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub truncation: Truncation,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub caps: Caps,
    pub dichotomy: DichotomyConfig,
    pub density: DensityConfig,
    pub nowhere_dense: NowhereDenseConfig,
}

/// Smallest caps that still allow a meaningful run.
const MIN_ENUMERATION_CAP: u64 = 1_000;
const MIN_GRID_CAP: u64 = 16;

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        let positive = [
            ("tolerances.dedup", t.dedup),
            ("tolerances.peak_threshold", t.peak_threshold),
            ("tolerances.match_tol", t.match_tol),
            ("tolerances.fit_relative", t.fit_relative),
            ("tolerances.recovery_relative", t.recovery_relative),
            ("tolerances.imaginary_leak", t.imaginary_leak),
            ("tolerances.leak_neighborhood", t.leak_neighborhood),
            ("truncation.box_half_width", self.truncation.box_half_width),
            ("truncation.radius", self.truncation.radius),
            ("density.ball_radius", self.density.ball_radius),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
        }
        if self.grid.max_pitch.is_some_and(|p| !(p > 0.0)) {
            return Err(Error::invalid("grid.max_pitch must be positive"));
        }
        if self.grid.lo.len() != self.grid.hi.len() || self.grid.lo.is_empty() {
            return Err(Error::invalid("grid.lo and grid.hi must be nonempty and of equal length"));
        }
        if self.grid.lo.iter().zip(&self.grid.hi).any(|(a, b)| !(a < b)) {
            return Err(Error::invalid("grid.lo must lie below grid.hi on every axis"));
        }
        if self.caps.enumeration < MIN_ENUMERATION_CAP || self.caps.grid < MIN_GRID_CAP {
            return Err(Error::invalid(format!(
                "caps too small (enumeration ≥ {MIN_ENUMERATION_CAP}, grid ≥ {MIN_GRID_CAP})"
            )));
        }
        if self.caps.max_cosets == 0 || self.caps.max_terms == 0 || self.density.centers == 0 {
            return Err(Error::invalid("coset, term and centre counts must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        Ok(())
    }

    /// Parses TOML or JSON, chosen by extension (TOML when unknown).
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg: Self = if json {
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml_and_json() {
        let mut cfg = RunConfig {
            seed: 42,
            threads: Some(3),
            ..Default::default()
        };
        cfg.tolerances.match_tol = 1.0 / 3.0 * 1e-6;
        cfg.grid.max_pitch = Some(0.1 + 0.2);
        let dir = tempfile::tempdir().unwrap();
        let tp = dir.path().join("run.toml");
        std::fs::write(&tp, cfg.to_toml().unwrap()).unwrap();
        assert_eq!(RunConfig::load(&tp).unwrap(), cfg);
        let jp = dir.path().join("run.json");
        std::fs::write(&jp, serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(RunConfig::load(&jp).unwrap(), cfg);
    }

    #[test]
    fn partial_files_use_defaults_and_bad_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("partial.toml");
        std::fs::write(&p, "seed = 9\n[truncation]\nradius = 5.0\n").unwrap();
        let cfg = RunConfig::load(&p).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.truncation.radius, 5.0);
        assert_eq!(cfg.truncation.box_half_width, 100.0);
        std::fs::write(&p, "[tolerances]\ndedup = 0.0\n").unwrap();
        assert!(matches!(RunConfig::load(&p), Err(Error::InvalidArgument(_))));
        std::fs::write(&p, "[caps]\ngrid = 2\n").unwrap();
        assert!(RunConfig::load(&p).is_err());
    }
}
