//! Command-line front end. Every subcommand writes its results under `--out`
//! and prints the written paths on stdout.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 invalid input or a
//! tripped guard, 3 the computation ran and returned a negative verdict.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::cutproject::{
    enumerate_box, fibonacci_scheme, model_measure_capped, model_set_capped, nowhere_dense_construction, predicted_spectrum,
    CutProjectScheme, SpectrumOptions, Window, WindowFunction,
};
use crate::diffraction::{diffraction_report, split_pure_point, AutocorrelationOptions, DiffractionOptions, PeakOptions, Threshold};
use crate::error::{Error, Result};
use crate::geometry::{classify, density_report, BoxRegion, Lattice, PointSet, DEFAULT_DEDUP_TOL};
use crate::io::{load_measure, load_point_set, measure_to_csv, point_set_to_csv, read_text, to_json, write_text};
use crate::measures::{ft_grid_capped, nu_h, nu_h_support_check, DiscreteMeasure, FrequencyGrid, LeakOptions};
use crate::structure::{dichotomy_report, recover_comb, DichotomyVerdict, FitOptions, RecoveryOptions, RecoveryVerdict};
use crate::svg::{intensity_map, stem_plot, PlotOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WRITE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "fqc", version, about = "Numerical toolkit for Fourier-quasicrystal measures")]
pub struct Cli {
    /// Run configuration (TOML or JSON).
    #[arg(long, global = true, env = "FQC_CONFIG")]
    pub config: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// File format for point sets and measures; reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a point set: lattice, model set, Fibonacci chain or random points.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Build a measure: comb, model measure, predicted spectrum or a sampled transform.
    Measure {
        #[command(subcommand)]
        kind: MeasureKind,
    },
    /// Autocorrelation, diffraction estimate and its pure-point split.
    Diffract(DiffractArgs),
    /// Discreteness and density report of a point set.
    Classify(InputArg),
    /// Fit a periodic comb representation to a measure and its spectrum.
    Recover {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        spectrum: PathBuf,
    },
    /// Shifted-overlap measure of a spectrum, optionally with the support check.
    NuH {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        h: Vec<f64>,
        /// Point set to test the transform support against.
        #[arg(long)]
        support: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Gap curve of the ε-level sets of a spectrum.
    Dichotomy {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long, num_args = 1..)]
        eps: Option<Vec<f64>>,
    },
    /// Window function with spectral gaps around the configured balls.
    ConstructNowhereDense {
        /// Cut-and-project scheme JSON; defaults to the Fibonacci scheme.
        #[arg(long)]
        scheme: Option<PathBuf>,
    },
    /// Density report of a point set.
    Density(InputArg),
}

#[derive(Debug, Args)]
pub struct InputArg {
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoxArg {
    /// Half-width of the centred box; defaults to the configured truncation.
    #[arg(long = "box")]
    pub half_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub lo: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub hi: Option<Vec<f64>>,
    #[arg(long)]
    pub max_pitch: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Lattice points in the box.
    Lattice {
        /// Basis rows, row-major; d² entries.
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        basis: Vec<f64>,
        #[command(flatten)]
        bbox: BoxArg,
    },
    /// Model set of a cut-and-project scheme.
    Modelset {
        /// Scheme JSON; defaults to the Fibonacci scheme.
        #[arg(long)]
        scheme: Option<PathBuf>,
        /// Window as lo/hi pairs per internal axis; defaults to the scheme's window.
        #[arg(long, num_args = 2.., allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        #[command(flatten)]
        bbox: BoxArg,
    },
    /// Fibonacci chain, optionally with another window.
    Fibonacci {
        #[arg(long, num_args = 2, allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        #[command(flatten)]
        bbox: BoxArg,
    },
    /// Uniform random points from a seeded generator.
    Random {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        bbox: BoxArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum MeasureKind {
    /// Unit comb on a point set.
    Comb(InputArg),
    /// Σ φ(p2(γ)) δ_{p1(γ)} over the scheme's lattice.
    Model {
        #[arg(long)]
        scheme: Option<PathBuf>,
        /// Window function, e.g. `bspline:2:0.45`, `fejer:0.5`, `squared:bspline:2:0.45`.
        #[arg(long)]
        window_function: String,
        /// Enumeration window as lo/hi pairs; must contain the transform support.
        #[arg(long, num_args = 2.., allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        #[command(flatten)]
        bbox: BoxArg,
    },
    /// Predicted spectrum of the model measure over the grid box.
    Spectrum {
        #[arg(long)]
        scheme: Option<PathBuf>,
        #[arg(long)]
        window_function: String,
        /// Atoms below this weight are dropped; slowly decaying windows need a larger floor.
        #[arg(long)]
        min_weight: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Exponential sum of a measure sampled on a grid (CSV trace).
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Debug, Args)]
pub struct DiffractArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Truncation radius R; defaults to the configured radius.
    #[arg(long)]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Peak threshold relative to the largest grid value.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Undo the overlap loss at the truncation edge.
    #[arg(long)]
    pub triangle_correction: bool,
    /// Compare this many strongest peaks against the R/2 estimate.
    #[arg(long, default_value_t = 0)]
    pub compare: usize,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_WRITE,
        _ => EXIT_INVALID,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(cfg.threads);
    if threads == Some(0) {
        return Err(Error::InvalidArgument("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    let ctx = Context { cfg, out: &cli.out, format: cli.format };
    pool.install(|| ctx.dispatch(&cli.command))
}

struct Context<'a> {
    cfg: RunConfig,
    out: &'a Path,
    format: Format,
}

fn centred_box(dim: usize, h: f64) -> Result<BoxRegion> {
    BoxRegion::new(vec![-h; dim], vec![h; dim])
}

fn load_scheme(path: Option<&PathBuf>) -> Result<CutProjectScheme> {
    match path {
        Some(p) => serde_json::from_str(&read_text(p)?).map_err(|e| Error::Parse(format!("{}: {e}", p.display()))),
        None => Ok(fibonacci_scheme()),
    }
}

/// Window from lo/hi pairs; degenerate boxes give the empty window.
fn window_from_pairs(dim: usize, v: &[f64]) -> Result<Window> {
    if v.len() != 2 * dim {
        return Err(Error::InvalidArgument(format!("window needs {} values (lo/hi per axis), got {}", 2 * dim, v.len())));
    }
    let lo: Vec<f64> = v.iter().step_by(2).copied().collect();
    let hi: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
    if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return Ok(Window::empty(dim));
    }
    Window::new(dim, vec![BoxRegion::new(lo, hi)?])
}

impl Context<'_> {
    fn half_width(&self, b: &BoxArg) -> f64 {
        b.half_width.unwrap_or(self.cfg.truncation.box_half_width)
    }

    /// Grid over [lo, hi]; a single configured axis is repeated to `dim` axes.
    fn grid(&self, g: &GridArgs, dim: usize, radius: f64) -> Result<FrequencyGrid> {
        let widen = |v: &[f64]| if v.len() == 1 { vec![v[0]; dim] } else { v.to_vec() };
        let lo = widen(g.lo.as_deref().unwrap_or(&self.cfg.grid.lo));
        let hi = widen(g.hi.as_deref().unwrap_or(&self.cfg.grid.hi));
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: lo.len() });
        }
        let pitch = g.max_pitch.or(self.cfg.grid.max_pitch).unwrap_or(1.0 / (8.0 * radius));
        let grid = FrequencyGrid::with_max_pitch(&lo, &hi, pitch)?;
        if grid.size() > self.cfg.caps.grid {
            return Err(Error::GridCap { size: grid.size(), cap: self.cfg.caps.grid });
        }
        Ok(grid)
    }

    fn emit(&self, name: &str, content: &str) -> Result<()> {
        let p = write_text(self.out, name, content)?;
        println!("{}", p.display());
        Ok(())
    }

    fn report<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.emit(&format!("{name}.json"), &to_json(value)?)
    }

    fn emit_points(&self, name: &str, ps: &PointSet) -> Result<()> {
        match self.format {
            Format::Json => self.report(name, ps),
            Format::Csv => self.emit(&format!("{name}.csv"), &point_set_to_csv(ps)?),
        }
    }

    fn emit_measure(&self, name: &str, mu: &DiscreteMeasure) -> Result<()> {
        match self.format {
            Format::Json => self.report(name, mu),
            Format::Csv => self.emit(&format!("{name}.csv"), &measure_to_csv(mu)?),
        }
    }

    fn dispatch(&self, cmd: &Command) -> Result<i32> {
        match cmd {
            Command::Generate { kind } => self.generate(kind),
            Command::Measure { kind } => self.measure(kind),
            Command::Diffract(a) => self.diffract(a),
            Command::Classify(a) => self.classify(&a.input),
            Command::Recover { input, spectrum } => self.recover(input, spectrum),
            Command::NuH { spectrum, h, support, grid } => self.nu_h(spectrum, h, support.as_ref(), grid),
            Command::Dichotomy { spectrum, eps } => self.dichotomy(spectrum, eps.as_deref()),
            Command::ConstructNowhereDense { scheme } => {
                let scheme = load_scheme(scheme.as_ref())?;
                let c = nowhere_dense_construction(&scheme, &self.cfg.nowhere_dense)?;
                self.report("nowhere_dense", &c)?;
                Ok(EXIT_OK)
            }
            Command::Density(a) => {
                let ps = load_point_set(&a.input)?;
                self.report("density", &density_report(&ps, self.cfg.density.ball_radius, self.cfg.density.centers)?)?;
                Ok(EXIT_OK)
            }
        }
    }

    fn generate(&self, kind: &GenerateKind) -> Result<i32> {
        let cap = self.cfg.caps.enumeration;
        let ps = match kind {
            GenerateKind::Lattice { basis, bbox } => {
                let dim = (basis.len() as f64).sqrt().round() as usize;
                if dim == 0 || dim * dim != basis.len() {
                    return Err(Error::InvalidArgument(format!("basis needs d² entries, got {}", basis.len())));
                }
                let lattice = Lattice::from_row_major(dim, basis)?;
                let region = centred_box(dim, self.half_width(bbox))?;
                let coords = enumerate_box(&lattice, &region, cap)?;
                PointSet::new(dim, coords, region, self.cfg.tolerances.dedup)?
            }
            GenerateKind::Modelset { scheme, window, bbox } => {
                let scheme = load_scheme(scheme.as_ref())?;
                let window = match window {
                    Some(v) => window_from_pairs(scheme.m(), v)?,
                    None => scheme.window().clone(),
                };
                self.model_set(&scheme, &window, bbox)?
            }
            GenerateKind::Fibonacci { window, bbox } => {
                let scheme = fibonacci_scheme();
                let window = match window {
                    Some(v) => window_from_pairs(1, v)?,
                    None => scheme.window().clone(),
                };
                self.model_set(&scheme, &window, bbox)?
            }
            GenerateKind::Random { count, dim, seed, bbox } => {
                if *dim == 0 {
                    return Err(Error::InvalidArgument("dim must be at least 1".into()));
                }
                let h = self.half_width(bbox);
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(self.cfg.seed));
                let coords = (0..count * dim).map(|_| rng.gen_range(-h..h)).collect();
                PointSet::new(*dim, coords, centred_box(*dim, h)?, self.cfg.tolerances.dedup)?
            }
        };
        self.emit_points("pointset", &ps)?;
        Ok(EXIT_OK)
    }

    fn model_set(&self, scheme: &CutProjectScheme, window: &Window, bbox: &BoxArg) -> Result<PointSet> {
        let region = centred_box(scheme.n(), self.half_width(bbox))?;
        if window.is_empty() {
            warn!("window is empty; the model set has no points");
            return PointSet::new(scheme.n(), vec![], region, DEFAULT_DEDUP_TOL);
        }
        model_set_capped(scheme, window, &region, self.cfg.caps.enumeration)
    }

    fn measure(&self, kind: &MeasureKind) -> Result<i32> {
        match kind {
            MeasureKind::Comb(a) => {
                let mu = DiscreteMeasure::unit_comb(&load_point_set(&a.input)?);
                self.emit_measure("measure", &mu)?;
            }
            MeasureKind::Model { scheme, window_function, window, bbox } => {
                let mut scheme = load_scheme(scheme.as_ref())?;
                if let Some(v) = window {
                    scheme = scheme.with_window(window_from_pairs(scheme.m(), v)?)?;
                }
                let wf = WindowFunction::parse(window_function)?;
                let region = centred_box(scheme.n(), self.half_width(bbox))?;
                let mu = model_measure_capped(&scheme, &wf, &region, self.cfg.caps.enumeration)?;
                self.emit_measure("measure", &mu)?;
            }
            MeasureKind::Spectrum { scheme, window_function, min_weight, grid } => {
                let scheme = load_scheme(scheme.as_ref())?;
                let wf = WindowFunction::parse(window_function)?;
                let g = self.grid(grid, scheme.n(), self.cfg.truncation.radius)?;
                let freq_box = BoxRegion::new(
                    (0..g.dim()).map(|d| g.lo(d)).collect(),
                    (0..g.dim()).map(|d| g.lo(d) + 2.0 * g.half_widths[d]).collect(),
                )?;
                let mut opts = SpectrumOptions { enumeration_cap: self.cfg.caps.enumeration, ..Default::default() };
                if let Some(w) = min_weight {
                    opts.min_weight = *w;
                }
                let spec = predicted_spectrum(&scheme, &wf, &freq_box, &opts)?;
                self.emit_measure("spectrum", &spec)?;
            }
            MeasureKind::Transform { input, grid } => {
                let mu = load_measure(input)?;
                let g = self.grid(grid, mu.dim(), self.cfg.truncation.radius)?;
                let trace = ft_grid_capped(&mu, &g, self.cfg.caps.grid)?;
                self.emit("transform.csv", &trace.to_csv()?)?;
            }
        }
        Ok(EXIT_OK)
    }

    fn diffract(&self, a: &DiffractArgs) -> Result<i32> {
        let mu = load_measure(&a.input)?;
        let r = a.radius.unwrap_or(self.cfg.truncation.radius);
        let grid = self.grid(&a.grid, mu.dim(), r)?;
        let ac_opts = AutocorrelationOptions { triangle_correction: a.triangle_correction, ..Default::default() };
        let opts = DiffractionOptions {
            peaks: PeakOptions {
                threshold: Threshold::Relative(a.threshold.unwrap_or(self.cfg.tolerances.peak_threshold)),
                ..Default::default()
            },
            max_imaginary_leak: self.cfg.tolerances.imaginary_leak,
            grid_cap: self.cfg.caps.grid,
        };
        let (est, report) = diffraction_report(&mu, r, &grid, &ac_opts, &opts, a.compare)?;
        let split = split_pure_point(&est, est.threshold)?;
        self.report("diffraction", &report)?;
        self.emit_measure("bragg_peaks", &split.discrete)?;
        self.emit("continuous.csv", &split.continuous.to_csv()?)?;
        let plot = PlotOptions { title: format!("diffraction estimate, R = {r}"), ..Default::default() };
        let svg = if grid.dim() == 1 {
            let xs: Vec<f64> = (0..grid.size() as usize).map(|i| grid.point(i)[0]).collect();
            let stems: Vec<(f64, f64)> = report.peaks.iter().map(|(p, a)| (p[0], *a)).collect();
            Some(stem_plot(&stems, Some((&xs, &est.residual)), &plot))
        } else if grid.dim() == 2 {
            Some(intensity_map(&grid, &est.trace, 200, &PlotOptions { log_scale: true, ..plot }))
        } else {
            None
        };
        if let Some(svg) = svg {
            self.emit("diffraction.svg", &svg)?;
        }
        Ok(EXIT_OK)
    }

    fn classify(&self, input: &Path) -> Result<i32> {
        #[derive(Serialize)]
        struct Classification<T, U> {
            discreteness: T,
            density: U,
        }
        let ps = load_point_set(input)?;
        let discreteness = classify(&ps)?;
        let density = density_report(&ps, self.cfg.density.ball_radius, self.cfg.density.centers)?;
        self.report("classify", &Classification { discreteness, density })?;
        Ok(EXIT_OK)
    }

    fn recover(&self, input: &Path, spectrum: &Path) -> Result<i32> {
        let mu = load_measure(input)?;
        let spec = load_measure(spectrum)?;
        let opts = RecoveryOptions {
            fit: FitOptions {
                relative_tol: self.cfg.tolerances.fit_relative,
                max_cosets: self.cfg.caps.max_cosets,
                ..Default::default()
            },
            max_terms: self.cfg.caps.max_terms,
            relative_tol: self.cfg.tolerances.recovery_relative,
        };
        let rec = recover_comb(&mu, &spec, &opts)?;
        self.report("recovery", &rec)?;
        Ok(match rec.verdict {
            RecoveryVerdict::Representable => EXIT_OK,
            RecoveryVerdict::NonRepresentable => EXIT_NEGATIVE,
        })
    }

    fn nu_h(&self, spectrum: &Path, h: &[f64], support: Option<&PathBuf>, grid: &GridArgs) -> Result<i32> {
        let spec = load_measure(spectrum)?;
        let tol = self.cfg.tolerances.match_tol;
        self.emit_measure("nu_h", &nu_h(&spec, h, tol)?)?;
        if let Some(sp) = support {
            let set = load_point_set(sp)?;
            let g = self.grid(grid, spec.dim(), self.cfg.truncation.radius)?;
            let opts = LeakOptions {
                neighborhood: self.cfg.tolerances.leak_neighborhood,
                match_tol: tol,
                ..Default::default()
            };
            self.report("nu_h_leak", &nu_h_support_check(&spec, h, &set, &g, &opts)?)?;
        }
        Ok(EXIT_OK)
    }

    fn dichotomy(&self, spectrum: &Path, eps: Option<&[f64]>) -> Result<i32> {
        let spec = load_measure(spectrum)?;
        let levels = eps.unwrap_or(&self.cfg.dichotomy.eps_levels);
        let rep = dichotomy_report(&spec, levels, &self.cfg.dichotomy.options)?;
        self.report("dichotomy", &rep)?;
        Ok(match rep.verdict {
            DichotomyVerdict::Inconclusive => EXIT_NEGATIVE,
            _ => EXIT_OK,
        })
    }
}
