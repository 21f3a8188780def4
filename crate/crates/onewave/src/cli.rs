//! Command-line front end: reproducible synthesis, inversion, spectrum
//! inspection, and regularization sweeps.
//!
//! Four subcommands cover the pipeline end to end:
//!
//! * `synthesize` — far-field data for a scene file, optionally noisy,
//!   optionally with the full multistatic matrix;
//! * `invert` — reconstruction from a data file by `scheme1`, `scheme2`,
//!   the multi-wave `classical` baseline, or the extended-sampling `esm`
//!   comparison;
//! * `spectrum` — the analytic eigenvalue ladder of a test disk as CSV;
//! * `sweep` — interior/exterior contrast of the Scheme II field across a
//!   list of Tikhonov parameters, for trial-and-error selection of α.
//!
//! # Configuration
//!
//! Every parameter can come from three places, later ones winning: built-in
//! defaults, a `--config <path>` file of flat `key=value` lines (`#`
//! comments allowed, duplicate keys rejected), and command-line flags. The
//! flags mirror the method's symbols — `--k --R --nz --M --N --alpha
//! --delta --noise --seed` — so a reproduction recipe reads like a
//! parameter list. Paths, the method, and list-valued settings use the same
//! key names as their flags (`scene=`, `method=scheme2`,
//! `alphas=1e-13,1e-8`, `region=-2,-2;2,-2;-2,2`).
//!
//! # Outputs
//!
//! All numeric output is full-precision decimal (15 significant digits,
//! `.` separator, no locale). Artifacts derive from the `--out` argument:
//! `synthesize` and `sweep` write exactly that path, `invert` treats it as
//! a prefix and writes `<out>.csv` plus a PGM rendering (`<out>.pgm` for
//! fields, `<out>_mask.pgm` for Scheme I masks). Commands compute
//! everything first and write once at the end — a failed run leaves no
//! partial artifacts. Runs are deterministic: the same config file, flags,
//! and seed produce byte-identical files.
//!
//! # Exit codes
//!
//! `0` on success; `1` for validation problems (bad flags or config, scene
//! or data files that fail to parse, mismatched wavenumbers, unsatisfiable
//! sampling geometry); `2` for numerical failures on validly-posed input
//! (forward-solver gate rejections, eigensolver non-convergence, series
//! truncation breakdown, degenerate constant fields).

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::forward::{
    add_noise, fmt_full, multistatic_matrix, parse_complex, read_far_field, read_multistatic,
    read_scene, scene_far_field, write_far_field, write_multistatic, Direction, ForwardError,
    ObstacleSolver, Point,
};
use crate::imaging::{
    normalize_field, scheme_one, scheme_one_esm, scheme_two, scheme_two_sweep, write_field_csv,
    write_field_pgm, write_mask_pgm, write_scheme_one_csv, GridSpec, ImagingConfig, ImagingError,
    IndicatorField, SchemeOneResult,
};
use crate::indicators::{ClassicalMethod, ClassicalSystem, IndicatorError};
use crate::linalg::LinalgError;
use crate::spectral::{spectral_system, BoundaryCondition, SpectralError, TestDisk};

const DEFAULT_K: f64 = 6.0;
const DEFAULT_N_THETA: usize = 512;
const DEFAULT_SAMPLING_RADIUS: f64 = 4.0;
const DEFAULT_GRID: usize = 128;
const DEFAULT_SPECTRUM_TRUNCATION: usize = 80;
/// Relative tolerance when comparing a configured `k` against a data-file
/// header `k` (matches the indicator modules' consistency check).
const K_MATCH_TOL: f64 = 1e-12;

// --------------------------------------------------------------------
// Errors and exit codes
// --------------------------------------------------------------------

/// A command failure carrying its exit-code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: missing or malformed flags, config entries, or
    /// required fields. Exit code 1.
    Usage(String),
    /// Well-formed invocation over invalid input: unparsable scene/data
    /// files, inconsistent wavenumbers, impossible geometry. Exit code 1.
    Validation(String),
    /// The computation itself failed on validly-posed input. Exit code 2.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Numerical(m) => {
                f.write_str(m)
            }
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

fn classify_linalg(e: &LinalgError) -> CliError {
    match e {
        LinalgError::NoConvergence { .. }
        | LinalgError::NotHermitian { .. }
        | LinalgError::NotNormal { .. }
        | LinalgError::Singular { .. } => CliError::Numerical(e.to_string()),
        LinalgError::NotSquare { .. }
        | LinalgError::DimensionMismatch { .. }
        | LinalgError::NonFinite { .. } => CliError::Validation(e.to_string()),
    }
}

impl From<ForwardError> for CliError {
    fn from(e: ForwardError) -> Self {
        match &e {
            ForwardError::TruncationInsufficient { .. }
            | ForwardError::ResidualTooLarge { .. }
            | ForwardError::SpecFun(_) => CliError::Numerical(e.to_string()),
            ForwardError::Linalg(inner) => classify_linalg(inner),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Forward(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<IndicatorError> for CliError {
    fn from(e: IndicatorError) -> Self {
        match e {
            IndicatorError::Spectral(inner) => inner.into(),
            IndicatorError::Forward(inner) => inner.into(),
            IndicatorError::Linalg(inner) => classify_linalg(&inner),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ImagingError> for CliError {
    fn from(e: ImagingError) -> Self {
        match e {
            ImagingError::ConstantField => CliError::Numerical(e.to_string()),
            ImagingError::Indicator(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

// --------------------------------------------------------------------
// Argument surface
// --------------------------------------------------------------------

#[derive(Parser, Debug)]
#[command(
    name = "onewave",
    version,
    about = "One-wave factorization imaging for 2D inverse acoustic scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Synthesize far-field data for a scene file.
    Synthesize(CommonArgs),
    /// Reconstruct a target from a far-field or multistatic data file.
    Invert(CommonArgs),
    /// Print a test disk's analytic eigenvalue ladder as CSV.
    Spectrum(CommonArgs),
    /// Tabulate Scheme II interior/exterior contrast across alphas.
    Sweep(CommonArgs),
}

/// Inversion method selector.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Per-center radius thresholding of W̃, disks intersected into a mask.
    Scheme1,
    /// Summed indicator field `Σ_n W̃(z_n, |x − z_n|)` over a pixel grid.
    Scheme2,
    /// Multi-wave factorization baseline on a multistatic matrix.
    Classical,
    /// Extended-sampling comparison scan (Scheme I geometry, ESM norm).
    Esm,
}

/// Classical-indicator flavor.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Picard series over `(F*F)^(1/4)` (singular system of `F`).
    Quarter,
    /// Picard series over the eigensystem of `F_# = |Re F| + |Im F|`.
    Fsharp,
}

impl From<Variant> for ClassicalMethod {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Quarter => ClassicalMethod::QuarterPower,
            Variant::Fsharp => ClassicalMethod::FSharp,
        }
    }
}

/// Every tunable, shared by all subcommands; unset values fall back to the
/// config file and then to defaults. Which ones are *required* depends on
/// the subcommand and is enforced after merging.
#[derive(Args, Debug, Default, Clone)]
struct CommonArgs {
    /// Flat key=value config file; command-line flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Scene description file (synthesize).
    #[arg(long, value_name = "PATH")]
    scene: Option<PathBuf>,
    /// Input data file: far-field rows, or multistatic CSV for `classical`.
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Output path (synthesize, sweep) or artifact prefix (invert).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write the multistatic matrix to this path (synthesize).
    #[arg(long, value_name = "PATH")]
    multistatic: Option<PathBuf>,
    /// Inversion method (invert).
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Classical-indicator flavor (invert --method classical).
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// Wavenumber k.
    #[arg(long)]
    k: Option<f64>,
    /// Sampling-circle radius R; radii scan (0, 2R], grid is [−R, R]².
    #[arg(long = "R")]
    sampling_radius: Option<f64>,
    /// Number of sampling centers N_z on the circle of radius R.
    #[arg(long)]
    nz: Option<usize>,
    /// Radius-grid resolution M (Scheme I scans h_m = 2mR/M).
    #[arg(long = "M")]
    n_radii: Option<usize>,
    /// Series truncation order N.
    #[arg(long = "N")]
    truncation: Option<usize>,
    /// Tikhonov regularization parameter α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Scheme I acceptance threshold δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Relative noise level in [0, 1) for synthesized data.
    #[arg(long)]
    noise: Option<f64>,
    /// RNG seed for the noise model.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of far-field samples (synthesize).
    #[arg(long)]
    ntheta: Option<usize>,
    /// Incident plane-wave angle in radians (obstacle scenes).
    #[arg(long)]
    theta: Option<f64>,
    /// Output grid resolution: n×n pixels over [−R, R]².
    #[arg(long)]
    grid: Option<usize>,
    /// Impedance parameter η (complex, e.g. "2i" or "1+0.5i"); selects
    /// impedance test disks instead of sound-soft ones.
    #[arg(long)]
    eta: Option<String>,
    /// Test-disk radius h (spectrum).
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated Tikhonov parameters (sweep).
    #[arg(long)]
    alphas: Option<String>,
    /// Convex polygon "x1,y1;x2,y2;…" separating interior from exterior
    /// when scoring sweep contrast (sweep).
    #[arg(long)]
    region: Option<String>,
}

// --------------------------------------------------------------------
// Resolved configuration
// --------------------------------------------------------------------

/// Which subcommand a [`RunConfig`] was resolved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Synthesize,
    Invert,
    Spectrum,
    Sweep,
}

/// Fully merged run configuration: defaults ← config file ← flags.
///
/// Fields stay optional here; each command demands its own required subset
/// and falls back to documented defaults for the rest, so one type serves
/// all four subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub scene_path: Option<PathBuf>,
    pub data_path: Option<PathBuf>,
    pub out_path: Option<PathBuf>,
    pub multistatic_path: Option<PathBuf>,
    pub method: Option<Method>,
    pub variant: Option<Variant>,
    pub k: Option<f64>,
    pub sampling_radius: Option<f64>,
    pub n_centers: Option<usize>,
    pub n_radii: Option<usize>,
    pub truncation: Option<usize>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub n_theta: Option<usize>,
    pub theta: Option<f64>,
    pub grid_n: Option<usize>,
    pub eta: Option<Complex64>,
    pub h: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub region: Option<Vec<Point>>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| format!("bad {what} for '{key}': '{value}' ({e})"))
}

/// Parses a comma-separated list of positive reals, e.g. `1e-22,1e-13`.
fn parse_alphas(text: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().all(|s| s.is_empty()) {
        return Err("alpha list is empty".into());
    }
    items
        .iter()
        .map(|s| {
            let a: f64 = s
                .parse()
                .map_err(|e| format!("bad alpha '{s}' ({e})"))?;
            if a.is_finite() && a > 0.0 {
                Ok(a)
            } else {
                Err(format!("alpha must be finite and positive, got {a}"))
            }
        })
        .collect()
}

/// Parses `x1,y1;x2,y2;…` into a strictly convex polygon, normalized to
/// counter-clockwise orientation.
fn parse_region(text: &str) -> Result<Vec<Point>, String> {
    let mut vertices = Vec::new();
    for part in text.split(';').map(str::trim) {
        if part.is_empty() {
            continue;
        }
        let (x, y) = part
            .split_once(',')
            .ok_or_else(|| format!("bad vertex '{part}': expected 'x,y'"))?;
        let x: f64 = x
            .trim()
            .parse()
            .map_err(|e| format!("bad vertex '{part}' ({e})"))?;
        let y: f64 = y
            .trim()
            .parse()
            .map_err(|e| format!("bad vertex '{part}' ({e})"))?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(format!("vertex ({x}, {y}) is not finite"));
        }
        vertices.push([x, y]);
    }
    if vertices.len() < 3 {
        return Err(format!(
            "region needs at least 3 vertices, got {}",
            vertices.len()
        ));
    }
    // Normalize to counter-clockwise via the shoelace area.
    let n = vertices.len();
    let area2: f64 = (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    if area2 < 0.0 {
        vertices.reverse();
    }
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross <= 0.0 {
            return Err("region polygon must be strictly convex".into());
        }
    }
    Ok(vertices)
}

/// True when `p` lies in the closed interior of the counter-clockwise
/// convex polygon.
fn in_convex(region: &[Point], p: Point) -> bool {
    let n = region.len();
    (0..n).all(|i| {
        let a = region[i];
        let b = region[(i + 1) % n];
        (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
    })
}

impl RunConfig {
    /// An empty configuration for `command`: every setting unset, ready
    /// for struct-update syntax or [`RunConfig::resolve`]-style merging.
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            scene_path: None,
            data_path: None,
            out_path: None,
            multistatic_path: None,
            method: None,
            variant: None,
            k: None,
            sampling_radius: None,
            n_centers: None,
            n_radii: None,
            truncation: None,
            alpha: None,
            delta: None,
            noise: None,
            seed: None,
            n_theta: None,
            theta: None,
            grid_n: None,
            eta: None,
            h: None,
            alphas: None,
            region: None,
        }
    }

    /// Merges defaults, the optional config file, and flags (in that
    /// order of increasing precedence).
    fn resolve(command: CommandKind, args: &CommonArgs) -> Result<Self, CliError> {
        let mut cfg = RunConfig::new(command);
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_config_text(&text)?;
        }
        cfg.apply_flags(args)?;
        Ok(cfg)
    }

    /// Applies a flat `key=value` config body ('#' comments, duplicate and
    /// unknown keys rejected, errors carry line numbers).
    fn apply_config_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {lineno}: expected 'key=value', got '{line}'"
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(CliError::Usage(format!(
                    "config line {lineno}: duplicate key '{key}'"
                )));
            }
            seen.push(key.to_string());
            self.apply_kv(key, value)
                .map_err(|m| CliError::Usage(format!("config line {lineno}: {m}")))?;
        }
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "scene" => self.scene_path = Some(PathBuf::from(value)),
            "data" => self.data_path = Some(PathBuf::from(value)),
            "out" => self.out_path = Some(PathBuf::from(value)),
            "multistatic" => self.multistatic_path = Some(PathBuf::from(value)),
            "method" => {
                self.method = Some(match value {
                    "scheme1" => Method::Scheme1,
                    "scheme2" => Method::Scheme2,
                    "classical" => Method::Classical,
                    "esm" => Method::Esm,
                    other => {
                        return Err(format!(
                            "unknown method '{other}' (expected scheme1|scheme2|classical|esm)"
                        ))
                    }
                })
            }
            "variant" => {
                self.variant = Some(match value {
                    "quarter" => Variant::Quarter,
                    "fsharp" => Variant::Fsharp,
                    other => {
                        return Err(format!(
                            "unknown variant '{other}' (expected quarter|fsharp)"
                        ))
                    }
                })
            }
            "k" => self.k = Some(parse_num(key, value, "number")?),
            "R" => self.sampling_radius = Some(parse_num(key, value, "number")?),
            "nz" => self.n_centers = Some(parse_num(key, value, "integer")?),
            "M" => self.n_radii = Some(parse_num(key, value, "integer")?),
            "N" => self.truncation = Some(parse_num(key, value, "integer")?),
            "alpha" => self.alpha = Some(parse_num(key, value, "number")?),
            "delta" => self.delta = Some(parse_num(key, value, "number")?),
            "noise" => self.noise = Some(parse_num(key, value, "number")?),
            "seed" => self.seed = Some(parse_num(key, value, "integer")?),
            "ntheta" => self.n_theta = Some(parse_num(key, value, "integer")?),
            "theta" => self.theta = Some(parse_num(key, value, "number")?),
            "grid" => self.grid_n = Some(parse_num(key, value, "integer")?),
            "eta" => self.eta = Some(parse_complex(value)?),
            "h" => self.h = Some(parse_num(key, value, "number")?),
            "alphas" => self.alphas = Some(parse_alphas(value)?),
            "region" => self.region = Some(parse_region(value)?),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    fn apply_flags(&mut self, args: &CommonArgs) -> Result<(), CliError> {
        let flag = |name: &str, m: String| CliError::Usage(format!("--{name}: {m}"));
        if let Some(v) = &args.scene {
            self.scene_path = Some(v.clone());
        }
        if let Some(v) = &args.data {
            self.data_path = Some(v.clone());
        }
        if let Some(v) = &args.out {
            self.out_path = Some(v.clone());
        }
        if let Some(v) = &args.multistatic {
            self.multistatic_path = Some(v.clone());
        }
        if let Some(v) = args.method {
            self.method = Some(v);
        }
        if let Some(v) = args.variant {
            self.variant = Some(v);
        }
        if let Some(v) = args.k {
            self.k = Some(v);
        }
        if let Some(v) = args.sampling_radius {
            self.sampling_radius = Some(v);
        }
        if let Some(v) = args.nz {
            self.n_centers = Some(v);
        }
        if let Some(v) = args.n_radii {
            self.n_radii = Some(v);
        }
        if let Some(v) = args.truncation {
            self.truncation = Some(v);
        }
        if let Some(v) = args.alpha {
            self.alpha = Some(v);
        }
        if let Some(v) = args.delta {
            self.delta = Some(v);
        }
        if let Some(v) = args.noise {
            self.noise = Some(v);
        }
        if let Some(v) = args.seed {
            self.seed = Some(v);
        }
        if let Some(v) = args.ntheta {
            self.n_theta = Some(v);
        }
        if let Some(v) = args.theta {
            self.theta = Some(v);
        }
        if let Some(v) = args.grid {
            self.grid_n = Some(v);
        }
        if let Some(v) = &args.eta {
            self.eta = Some(parse_complex(v).map_err(|m| flag("eta", m))?);
        }
        if let Some(v) = args.h {
            self.h = Some(v);
        }
        if let Some(v) = &args.alphas {
            self.alphas = Some(parse_alphas(v).map_err(|m| flag("alphas", m))?);
        }
        if let Some(v) = &args.region {
            self.region = Some(parse_region(v).map_err(|m| flag("region", m))?);
        }
        Ok(())
    }

    /// Test-disk boundary condition: impedance when η was given.
    fn bc(&self) -> BoundaryCondition {
        match self.eta {
            Some(eta) => BoundaryCondition::Impedance(eta),
            None => BoundaryCondition::SoundSoft,
        }
    }

    /// Imaging configuration for a settled wavenumber; flags override the
    /// built-in defaults field by field.
    fn imaging(&self, k: f64) -> ImagingConfig {
        let r = self.sampling_radius.unwrap_or(DEFAULT_SAMPLING_RADIUS);
        let mut cfg = ImagingConfig::defaults(k, r);
        if let Some(v) = self.n_centers {
            cfg.n_centers = v;
        }
        if let Some(v) = self.n_radii {
            cfg.n_radii = v;
        }
        if let Some(v) = self.truncation {
            cfg.truncation = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        cfg.bc = self.bc();
        cfg.grid = GridSpec::square(r, self.grid_n.unwrap_or(DEFAULT_GRID));
        cfg
    }
}

fn require<T: Clone>(v: &Option<T>, what: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| {
        CliError::Usage(format!(
            "missing required --{what} (or '{what}=' config entry) for this command"
        ))
    })
}

/// Settles the run's wavenumber against a data-file header: adopt the
/// header value when none was configured, otherwise insist they agree.
fn merge_k(configured: Option<f64>, data_k: f64) -> Result<f64, CliError> {
    match configured {
        None => Ok(data_k),
        Some(k) => {
            if (k - data_k).abs() <= K_MATCH_TOL * k.abs().max(data_k.abs()) {
                Ok(k)
            } else {
                Err(CliError::Validation(format!(
                    "data file has k = {data_k} but the configuration says k = {k}"
                )))
            }
        }
    }
}

// --------------------------------------------------------------------
// Entry point
// --------------------------------------------------------------------

/// Parses arguments and runs the selected command, returning the process
/// exit code. `args` must include the program name as its first element.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    let result = match &cli.command {
        Cmd::Synthesize(a) => {
            RunConfig::resolve(CommandKind::Synthesize, a).and_then(|c| cmd_synthesize(&c))
        }
        Cmd::Invert(a) => RunConfig::resolve(CommandKind::Invert, a).and_then(|c| cmd_invert(&c)),
        Cmd::Spectrum(a) => {
            RunConfig::resolve(CommandKind::Spectrum, a).and_then(|c| cmd_spectrum(&c))
        }
        Cmd::Sweep(a) => RunConfig::resolve(CommandKind::Sweep, a).and_then(|c| cmd_sweep(&c)),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// --------------------------------------------------------------------
// Commands
// --------------------------------------------------------------------

/// Synthesizes far-field data (and optionally the multistatic matrix) for
/// a scene file.
pub fn cmd_synthesize(cfg: &RunConfig) -> Result<(), CliError> {
    let scene_path = require(&cfg.scene_path, "scene")?;
    let out_path = require(&cfg.out_path, "out")?;
    let k = cfg.k.unwrap_or(DEFAULT_K);
    let n_theta = cfg.n_theta.unwrap_or(DEFAULT_N_THETA);
    let theta = cfg.theta.unwrap_or(0.0);
    let noise = cfg.noise.unwrap_or(0.0);
    let seed = cfg.seed.unwrap_or(0);

    let scene = read_scene(&scene_path)?;
    let mut u = scene_far_field(&scene, k, Direction::new(theta), n_theta, ObstacleSolver::Nystrom)?;
    if noise != 0.0 {
        u = add_noise(&u, noise, seed)?;
    }
    let multistatic = match &cfg.multistatic_path {
        Some(path) => Some((path.clone(), multistatic_matrix(&scene, k, n_theta)?)),
        None => None,
    };

    write_far_field(&out_path, &u)?;
    println!(
        "wrote {}: far field, k = {k}, {n_theta} samples{}",
        out_path.display(),
        if noise != 0.0 {
            format!(", noise {noise} (seed {seed})")
        } else {
            String::new()
        }
    );
    if let Some((path, m)) = multistatic {
        write_multistatic(&path, k, &m)?;
        println!(
            "wrote {}: multistatic matrix, {n_theta}x{n_theta}",
            path.display()
        );
    }
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_all(artifacts: Vec<(PathBuf, Vec<u8>)>) -> Result<(), CliError> {
    for (path, bytes) in artifacts {
        fs::write(&path, bytes).map_err(|e| {
            CliError::Validation(format!("cannot write {}: {e}", path.display()))
        })?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_scheme_one_summary(res: &SchemeOneResult) {
    for (n, (z, est)) in res.centers.iter().zip(&res.radii).enumerate() {
        let mut note = String::new();
        if est.out_of_range {
            note.push_str("  [out of range]");
        }
        if est.degenerate {
            note.push_str("  [degenerate]");
        }
        println!(
            "center {n}: z = ({:.4}, {:.4})  h = {:.4}{note}",
            z[0], z[1], est.h
        );
    }
}

fn field_min_max(field: &IndicatorField) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in &field.values {
        if v.is_finite() {
            min = min.min(v);
            max = max.max(v);
        }
    }
    (min, max)
}

fn scheme_one_artifacts(
    out: &Path,
    res: &SchemeOneResult,
) -> Result<Vec<(PathBuf, Vec<u8>)>, CliError> {
    let mut csv = Vec::new();
    write_scheme_one_csv(&mut csv, res)?;
    let mut pgm = Vec::new();
    write_mask_pgm(&mut pgm, res)?;
    Ok(vec![
        (with_suffix(out, ".csv"), csv),
        (with_suffix(out, "_mask.pgm"), pgm),
    ])
}

fn field_artifacts(
    out: &Path,
    field: &IndicatorField,
    k: f64,
) -> Result<Vec<(PathBuf, Vec<u8>)>, CliError> {
    // Normalization doubles as validation: a constant field has no image.
    normalize_field(field)?;
    let mut csv = Vec::new();
    write_field_csv(&mut csv, field, k)?;
    let mut pgm = Vec::new();
    write_field_pgm(&mut pgm, field)?;
    Ok(vec![
        (with_suffix(out, ".csv"), csv),
        (with_suffix(out, ".pgm"), pgm),
    ])
}

/// Runs the selected inversion method over a data file and writes its
/// artifacts (`<out>.csv` + a PGM rendering).
pub fn cmd_invert(cfg: &RunConfig) -> Result<(), CliError> {
    let data_path = require(&cfg.data_path, "data")?;
    let out_path = require(&cfg.out_path, "out")?;
    let method = require(&cfg.method, "method")?;

    match method {
        Method::Classical => {
            let (data_k, f) = read_multistatic(&data_path)?;
            let k = merge_k(cfg.k, data_k)?;
            let icfg = cfg.imaging(k);
            let variant = cfg.variant.unwrap_or(Variant::Quarter);
            let system = ClassicalSystem::new(&f, k, variant.into())?;
            let grid = icfg.grid;
            grid.validate().map_err(CliError::from)?;
            let mut values = vec![0.0_f64; grid.len()];
            for iy in 0..grid.n_y {
                for ix in 0..grid.n_x {
                    values[grid.index(ix, iy)] = system.value_at([grid.x(ix), grid.y(iy)]);
                }
            }
            let field = IndicatorField {
                grid,
                values,
                flagged: false,
            };
            let artifacts = field_artifacts(&out_path, &field, k)?;
            let (min, max) = field_min_max(&field);
            println!(
                "classical ({:?}) field over {} modes: min = {:.6e}, max = {:.6e}",
                variant,
                system.modes(),
                min,
                max
            );
            write_all(artifacts)
        }
        Method::Scheme2 => {
            let u = read_far_field(&data_path)?;
            let k = merge_k(cfg.k, u.k())?;
            let icfg = cfg.imaging(k);
            let field = scheme_two(&u, &icfg)?;
            let artifacts = field_artifacts(&out_path, &field, k)?;
            let (min, max) = field_min_max(&field);
            println!(
                "scheme2 field: min = {:.6e}, max = {:.6e}{}",
                min,
                max,
                if field.flagged { "  [flagged]" } else { "" }
            );
            write_all(artifacts)
        }
        Method::Scheme1 | Method::Esm => {
            let u = read_far_field(&data_path)?;
            let k = merge_k(cfg.k, u.k())?;
            let icfg = cfg.imaging(k);
            let res = match method {
                Method::Scheme1 => scheme_one(&u, &icfg)?,
                _ => scheme_one_esm(&u, &icfg)?,
            };
            let artifacts = scheme_one_artifacts(&out_path, &res)?;
            print_scheme_one_summary(&res);
            write_all(artifacts)
        }
    }
}

/// Prints (or writes) the analytic eigenvalue ladder `n,re,im,abs` of a
/// test disk.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let k = cfg.k.unwrap_or(DEFAULT_K);
    let h = require(&cfg.h, "h")?;
    let n_max = cfg.truncation.unwrap_or(DEFAULT_SPECTRUM_TRUNCATION);
    let disk = TestDisk {
        center: [0.0, 0.0],
        radius: h,
        bc: cfg.bc(),
    };
    let spec = spectral_system(&disk, k, n_max)?;

    let mut csv = String::from("n,re,im,abs\n");
    for n in spec.orders() {
        let lam = spec.eigenvalue(n);
        csv.push_str(&format!(
            "{n},{},{},{}\n",
            fmt_full(lam.re),
            fmt_full(lam.im),
            fmt_full(lam.norm())
        ));
    }
    if !spec.degenerate_orders().is_empty() {
        eprintln!(
            "warning: orders {:?} sit on an interior resonance of the test disk",
            spec.degenerate_orders()
        );
    }
    match &cfg.out_path {
        Some(path) => {
            fs::write(path, csv).map_err(|e| {
                CliError::Validation(format!("cannot write {}: {e}", path.display()))
            })?;
            println!("wrote {}: {} orders", path.display(), 2 * spec.n_max() + 1);
        }
        None => print!("{csv}"),
    }
    Ok(())
}

/// One scored row of a regularization sweep.
#[derive(Debug, Clone, Copy)]
struct SweepRow {
    alpha: f64,
    interior_mean: f64,
    exterior_mean: f64,
    contrast: f64,
}

fn score_field(field: &IndicatorField, region: &[Point]) -> Result<(f64, f64, f64), CliError> {
    if field.flagged {
        return Err(CliError::Numerical(
            "indicator field contains sentinel values; sweep contrast is undefined".into(),
        ));
    }
    let g = &field.grid;
    let (mut sum_in, mut n_in, mut sum_out, mut n_out) = (0.0, 0usize, 0.0, 0usize);
    for iy in 0..g.n_y {
        for ix in 0..g.n_x {
            let v = field.values[g.index(ix, iy)];
            if in_convex(region, [g.x(ix), g.y(iy)]) {
                sum_in += v;
                n_in += 1;
            } else {
                sum_out += v;
                n_out += 1;
            }
        }
    }
    if n_in == 0 {
        return Err(CliError::Validation(
            "sweep region contains no grid points".into(),
        ));
    }
    if n_out == 0 {
        return Err(CliError::Validation(
            "sweep region covers the entire grid; no exterior points left".into(),
        ));
    }
    let interior = sum_in / n_in as f64;
    let exterior = sum_out / n_out as f64;
    let (min, max) = field_min_max(field);
    let contrast = if min < max {
        (exterior - interior) / (max - min)
    } else {
        0.0
    };
    Ok((interior, exterior, contrast))
}

/// Scores Scheme II interior/exterior contrast for each α in the list and
/// writes (or prints) the CSV table.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let data_path = require(&cfg.data_path, "data")?;
    let alphas = require(&cfg.alphas, "alphas")?;
    let region = require(&cfg.region, "region")?;

    let u = read_far_field(&data_path)?;
    let k = merge_k(cfg.k, u.k())?;
    let icfg = cfg.imaging(k);
    let fields = scheme_two_sweep(&u, &icfg, &alphas)?;

    let mut rows = Vec::with_capacity(alphas.len());
    for (&alpha, field) in alphas.iter().zip(&fields) {
        let (interior_mean, exterior_mean, contrast) = score_field(field, &region)?;
        rows.push(SweepRow {
            alpha,
            interior_mean,
            exterior_mean,
            contrast,
        });
    }

    let mut csv = String::from("alpha,interior_mean,exterior_mean,contrast\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_full(row.alpha),
            fmt_full(row.interior_mean),
            fmt_full(row.exterior_mean),
            fmt_full(row.contrast)
        ));
    }
    match &cfg.out_path {
        Some(path) => {
            fs::write(path, csv).map_err(|e| {
                CliError::Validation(format!("cannot write {}: {e}", path.display()))
            })?;
            println!("wrote {}: {} rows", path.display(), rows.len());
        }
        None => print!("{csv}"),
    }
    if let Some(best) = rows
        .iter()
        .max_by(|a, b| a.contrast.total_cmp(&b.contrast))
    {
        println!(
            "best contrast {:.4} at alpha = {}",
            best.contrast,
            fmt_full(best.alpha)
        );
    }
    Ok(())
}

// --------------------------------------------------------------------
// Tests
// --------------------------------------------------------------------
