//! Command-line front end: job configuration, polynomial parsing, the
//! subcommands and their JSON reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::basins::{
    compute_basins, connectivity, default_attractors, immediate_basins, major_unbounded_components,
    BasinRaster, ConnectivityReport, FatouComponent, GridSpec, ImmediateBasin, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::fixpoints::{
    critical_points, fixed_points, multiplier_at_infinity, postcritical_classify, CriticalKind,
    CriticalOrbitRecord, FixedPointRecord,
};
use crate::method::{build, MethodBundle, MethodKind};
use crate::orbit::OrbitOutcome;
use crate::poly::{FactoredPolynomial, Polynomial, Root};
use crate::render::{default_palette, render_ppm, Palette};
use crate::scaling::{centroid, conjugacy_residual, normalize, AffineMap, NormalizationResult};
use crate::symmetry::{poly_symmetry_group, symmetry_report, SymmetryGroup, SymmetryReport, DEFAULT_MAX_ORDER};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SIZE: (usize, usize) = (600, 600);
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SAMPLES: usize = 100;
/// `scaling-check` passes below this residual.
pub const SCALING_PASS: f64 = 1e-8;
/// Iteration cap for critical orbits.
pub const CRITICAL_MAX_ITER: usize = 500;

#[derive(Debug, Parser)]
#[command(name = "chebdyn", version, about = "Dynamics of Chebyshev's root-finding method")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed points, multipliers, critical orbits and symmetry of the polynomial.
    Analyze(JobArgs),
    /// Render the basins of attraction to a PPM image with a JSON sidecar.
    Basins(JobArgs),
    /// Check the affine conjugacy of the maps of p and λ p∘T.
    ScalingCheck(JobArgs),
    /// Symmetry of the polynomial against the symmetry detected in its basins.
    Symmetry(JobArgs),
    /// Everything: the analysis plus the raster-based verdicts.
    Report(JobArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Basins(_) => "basins",
            Command::ScalingCheck(_) => "scaling-check",
            Command::Symmetry(_) => "symmetry",
            Command::Report(_) => "report",
        }
    }

    pub fn args(&self) -> &JobArgs {
        match self {
            Command::Analyze(a)
            | Command::Basins(a)
            | Command::ScalingCheck(a)
            | Command::Symmetry(a)
            | Command::Report(a) => a,
        }
    }
}

/// Flags shared by all subcommands. Any of them may also come from
/// `--config`, a file of `key = value` lines keyed by the flag name.
#[derive(Debug, Clone, Default, Args)]
pub struct JobArgs {
    /// Coefficients `a0,a1,...,ad`; complex entries as `1.5`, `2i`, `1-3i`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// Roots with multiplicities: `(root,mult);(root,mult);...`.
    #[arg(long, allow_hyphen_values = true)]
    pub roots: Option<String>,
    /// chebyshev or newton.
    #[arg(long)]
    pub method: Option<String>,
    /// Viewport center as a complex literal.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Half the viewport width.
    #[arg(long)]
    pub half_extent: Option<f64>,
    /// Raster size `WxH`.
    #[arg(long)]
    pub size: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Convergence distance to an attractor.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Image path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the raster; the output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// `a` of the change of variable `T(z) = a z + b`.
    #[arg(long, allow_hyphen_values = true)]
    pub affine_a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub affine_b: Option<String>,
    /// Scale factor of `λ p∘T`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Sample count for the conjugacy residual.
    #[arg(long)]
    pub samples: Option<usize>,
}

const CONFIG_KEYS: &[&str] = &[
    "coeffs", "roots", "method", "center", "half-extent", "size", "max-iter", "tol", "out", "json", "seed",
    "threads", "affine-a", "affine-b", "lambda", "samples",
];

/// Reads `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Keys are flag names, with `_` accepted for `-`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidInput(format!("config line {}: unknown key `{key}`", n + 1)));
        }
        let value = value.trim().trim_matches('"').to_string();
        out.insert(key, value);
    }
    Ok(out)
}

/// Where the polynomial came from, echoed in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyForm {
    Coefficients,
    Factored,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolySpec {
    Coefficients(Polynomial),
    Factored(FactoredPolynomial),
}

impl PolySpec {
    pub fn form(&self) -> PolyForm {
        match self {
            PolySpec::Coefficients(_) => PolyForm::Coefficients,
            PolySpec::Factored(_) => PolyForm::Factored,
        }
    }

    pub fn polynomial(&self) -> Polynomial {
        match self {
            PolySpec::Coefficients(p) => p.clone(),
            PolySpec::Factored(f) => f.expand(),
        }
    }
}

/// A fully resolved job: flags merged over the config file, validated.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub poly_text: String,
    pub poly: PolySpec,
    pub method: MethodKind,
    pub center: Option<Complex64>,
    pub half_extent: Option<f64>,
    pub width: usize,
    pub height: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub affine: AffineMap,
    pub lambda: Complex64,
    pub samples: usize,
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse `{v}`")))
}

fn positive_f64(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("{key} must be positive, got {v}")))
    }
}

fn positive_usize(key: &str, v: usize) -> Result<usize> {
    if v > 0 {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("{key} must be positive")))
    }
}

pub fn parse_size(text: &str) -> Result<(usize, usize)> {
    let (w, h) = text
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::InvalidInput(format!("size must look like 600x600, got `{text}`")))?;
    Ok((
        positive_usize("size", number("size", w)?)?,
        positive_usize("size", number("size", h)?)?,
    ))
}

impl JobConfig {
    /// Merges `args` over the config file named by `args.config`, if any.
    pub fn resolve(args: &JobArgs) -> Result<JobConfig> {
        let file = match &args.config {
            Some(path) => parse_config(&std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidInput(format!("cannot read config {}: {e}", path.display()))
            })?)?,
            None => BTreeMap::new(),
        };
        JobConfig::merge(args, &file)
    }

    pub fn merge(args: &JobArgs, file: &BTreeMap<String, String>) -> Result<JobConfig> {
        let get = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.get(key).cloned());
        // a polynomial given on the command line replaces the file's, in
        // either form
        let (coeffs, roots) = if args.coeffs.is_some() || args.roots.is_some() {
            (args.coeffs.clone(), args.roots.clone())
        } else {
            (file.get("coeffs").cloned(), file.get("roots").cloned())
        };
        let (poly_text, poly) = match (coeffs, roots) {
            (Some(c), None) => {
                let p = parse_coefficients(&c)?;
                (c, PolySpec::Coefficients(p))
            }
            (None, Some(r)) => {
                let f = parse_factored(&r)?;
                (r, PolySpec::Factored(f))
            }
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput("give the polynomial as --coeffs or --roots, not both".into()))
            }
            (None, None) => return Err(Error::InvalidInput("no polynomial: pass --coeffs or --roots".into())),
        };
        let method = match get(&args.method, "method") {
            Some(m) => m.parse()?,
            None => MethodKind::Chebyshev,
        };
        let center = get(&args.center, "center").map(|c| parse_complex(&c)).transpose()?;
        let half_extent = match args.half_extent {
            Some(h) => Some(h),
            None => file.get("half-extent").map(|v| number("half-extent", v)).transpose()?,
        }
        .map(|h| positive_f64("half-extent", h))
        .transpose()?;
        let (width, height) = match get(&args.size, "size") {
            Some(s) => parse_size(&s)?,
            None => DEFAULT_SIZE,
        };
        let max_iter = match args.max_iter {
            Some(m) => m,
            None => file.get("max-iter").map(|v| number("max-iter", v)).transpose()?.unwrap_or(DEFAULT_MAX_ITER),
        };
        let tol = match args.tol {
            Some(t) => t,
            None => file.get("tol").map(|v| number("tol", v)).transpose()?.unwrap_or(DEFAULT_TOL),
        };
        let seed = match args.seed {
            Some(s) => s,
            None => file.get("seed").map(|v| number("seed", v)).transpose()?.unwrap_or(DEFAULT_SEED),
        };
        let threads = match args.threads {
            Some(t) => Some(t),
            None => file.get("threads").map(|v| number("threads", v)).transpose()?,
        }
        .map(|t| positive_usize("threads", t))
        .transpose()?;
        let samples = match args.samples {
            Some(s) => s,
            None => file.get("samples").map(|v| number("samples", v)).transpose()?.unwrap_or(DEFAULT_SAMPLES),
        };
        let a = get(&args.affine_a, "affine-a").map(|v| parse_complex(&v)).transpose()?;
        let b = get(&args.affine_b, "affine-b").map(|v| parse_complex(&v)).transpose()?;
        let affine = AffineMap::new(a.unwrap_or(Complex64::new(1.0, 0.0)), b.unwrap_or(Complex64::new(0.0, 0.0)))?;
        let lambda = get(&args.lambda, "lambda")
            .map(|v| parse_complex(&v))
            .transpose()?
            .unwrap_or(Complex64::new(1.0, 0.0));
        if lambda.norm() == 0.0 {
            return Err(Error::InvalidInput("lambda must be nonzero".into()));
        }
        Ok(JobConfig {
            poly_text,
            poly,
            method,
            center,
            half_extent,
            width,
            height,
            max_iter: positive_usize("max-iter", max_iter)?,
            tol: positive_f64("tol", tol)?,
            out: args.out.clone().or_else(|| file.get("out").map(PathBuf::from)),
            json: args.json.clone().or_else(|| file.get("json").map(PathBuf::from)),
            seed,
            threads,
            affine,
            lambda,
            samples: positive_usize("samples", samples)?,
        })
    }

    pub fn polynomial(&self) -> Polynomial {
        self.poly.polynomial()
    }

    /// The configured viewport, defaulting to the centroid and a window
    /// enclosing all roots.
    pub fn grid(&self, p: &Polynomial) -> Result<GridSpec> {
        let default = GridSpec::default_for(p, self.width, self.height)?;
        GridSpec::new(
            self.center.unwrap_or(default.center),
            self.half_extent.unwrap_or(default.half_extent),
            self.width,
            self.height,
        )
    }
}

fn parse_err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

/// Parses `R`, `Ri`, `R+Si`, `R-Si`, `i`, `-i`; `offset` is added to error
/// positions.
fn complex_at(text: &str, offset: usize) -> Result<Complex64> {
    let lead = text.len() - text.trim_start().len();
    let s = text.trim();
    let at = offset + lead;
    if s.is_empty() {
        return Err(parse_err(at, "expected a number"));
    }
    let real = |t: &str, pos: usize| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| parse_err(pos, format!("`{t}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(parse_err(pos, format!("`{t}` is not finite")))
        }
    };
    // the split between real and imaginary parts is the last sign that is
    // neither leading nor part of an exponent
    let bytes = s.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coefficient = |t: &str, pos: usize| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => real(t, pos),
        }
    };
    match (s.strip_suffix(['i', 'j']), split) {
        (Some(body), Some(k)) => Ok(Complex64::new(real(&s[..k], at)?, coefficient(&body[k..], at + k)?)),
        (Some(body), None) => Ok(Complex64::new(0.0, coefficient(body, at)?)),
        (None, Some(k)) if s[..k].parse::<f64>().is_ok() => {
            Err(parse_err(at + k, "a second term needs an imaginary unit `i`"))
        }
        (None, _) => Ok(Complex64::new(real(s, at)?, 0.0)),
    }
}

pub fn parse_complex(text: &str) -> Result<Complex64> {
    complex_at(text, 0)
}

/// Splits on `sep`, returning each piece with its byte offset.
fn pieces(text: &str, sep: char) -> impl Iterator<Item = (usize, &str)> {
    let mut start = 0;
    text.split(sep).map(move |piece| {
        let at = start;
        start += piece.len() + sep.len_utf8();
        (at, piece)
    })
}

/// `a0,a1,...,ad`, lowest degree first.
pub fn parse_coefficients(text: &str) -> Result<Polynomial> {
    let coeffs = pieces(text, ',')
        .map(|(at, piece)| complex_at(piece, at))
        .collect::<Result<Vec<_>>>()?;
    let p = Polynomial::new(coeffs);
    if p.is_zero() {
        return Err(parse_err(0, "the zero polynomial has no roots to find"));
    }
    Ok(p)
}

/// `(root,mult);(root,mult);...`, monic.
pub fn parse_factored(text: &str) -> Result<FactoredPolynomial> {
    let mut roots = Vec::new();
    for (at, piece) in pieces(text, ';') {
        let lead = piece.len() - piece.trim_start().len();
        let t = piece.trim();
        if t.is_empty() && text.trim_end().ends_with(';') && at >= text.trim_end().len() {
            continue;
        }
        let inner = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| parse_err(at + lead, "expected `(root,multiplicity)`"))?;
        let inner_at = at + lead + 1;
        let (root, mult) = inner
            .rsplit_once(',')
            .ok_or_else(|| parse_err(inner_at, "expected `root,multiplicity`"))?;
        let value = complex_at(root, inner_at)?;
        let mult_at = inner_at + root.len() + 1;
        let m: usize = mult
            .trim()
            .parse()
            .map_err(|_| parse_err(mult_at, format!("`{}` is not a positive integer", mult.trim())))?;
        if m == 0 {
            return Err(parse_err(mult_at, "multiplicity must be positive"));
        }
        roots.push(Root::new(value, m));
    }
    if roots.is_empty() {
        return Err(parse_err(0, "no roots given"));
    }
    FactoredPolynomial::new(Complex64::new(1.0, 0.0), roots)
}

/// Detects the form from the first character: `(` starts the factored form.
pub fn parse_polynomial(text: &str) -> Result<PolySpec> {
    if text.trim_start().starts_with('(') {
        Ok(PolySpec::Factored(parse_factored(text)?))
    } else {
        Ok(PolySpec::Coefficients(parse_coefficients(text)?))
    }
}

/// Pretty JSON whose floats carry 17 significant digits.
struct PreciseFormatter(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17 significant digits per float and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(serde_json::ser::PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Numeric(format!("cannot serialize report: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Clone, Debug, Serialize)]
pub struct InputEcho {
    pub text: String,
    pub form: PolyForm,
    /// Expanded coefficients, lowest degree first.
    pub coefficients: Polynomial,
    pub degree: usize,
    pub method: MethodKind,
}

impl InputEcho {
    fn of(cfg: &JobConfig, p: &Polynomial) -> Self {
        InputEcho {
            text: cfg.poly_text.clone(),
            form: cfg.poly.form(),
            coefficients: p.clone(),
            degree: p.deg(),
            method: cfg.method,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MapSummary {
    pub degree: usize,
    pub numerator_degree: usize,
    pub denominator_degree: usize,
    pub numerator: Polynomial,
    pub denominator: Polynomial,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingSummary {
    /// Conjugacy residual between the maps of `p` and of its normal form.
    pub normal_form_residual: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Raster-derived sections of a report.
#[derive(Clone, Debug, Serialize)]
pub struct RasterSection {
    pub grid: GridSpec,
    pub max_iter: usize,
    pub tol: f64,
    pub attractors: Vec<Complex64>,
    pub nonconv_fraction: f64,
    /// `None` when the raster shows no Julia band.
    pub symmetry: Option<SymmetryReport>,
    /// `None` when some attractor lies outside the viewport.
    pub immediate_basins: Option<Vec<ImmediateBasin>>,
    /// Border-touching Fatou components covering at least 1% of the grid.
    pub major_unbounded_components: Vec<FatouComponent>,
    /// `None` with the symmetry section, when there is no Julia band.
    pub connectivity: Option<ConnectivityReport>,
    pub julia_connected: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub command: String,
    pub input: InputEcho,
    pub map: MapSummary,
    pub centroid: Complex64,
    pub normalization: NormalizationResult,
    pub fixed_points: Vec<FixedPointRecord>,
    pub multiplier_at_infinity: Complex64,
    pub critical_orbits: Vec<CriticalOrbitRecord>,
    /// Every critical point that is not a pole converged to a root.
    pub critical_orbits_converge: bool,
    pub poly_symmetry: SymmetryGroup,
    pub scaling: ScalingSummary,
    pub raster: Option<RasterSection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasinsSidecar {
    pub schema: u32,
    pub command: String,
    pub input: InputEcho,
    pub map_degree: usize,
    pub palette: Palette,
    /// Pixel count per attractor label.
    pub label_counts: Vec<usize>,
    pub nonconv_pixels: usize,
    pub raster: RasterSection,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryCommandReport {
    pub schema: u32,
    pub command: String,
    pub input: InputEcho,
    pub grid: GridSpec,
    pub symmetry: SymmetryReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingCheckReport {
    pub schema: u32,
    pub command: String,
    pub input: InputEcho,
    #[serde(rename = "T")]
    pub t: AffineMap,
    pub lambda: Complex64,
    /// Coefficients of `λ p∘T`.
    pub g: Polynomial,
    pub samples: usize,
    pub seed: u64,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn bundle(cfg: &JobConfig) -> Result<(Polynomial, MethodBundle)> {
    let p = cfg.polynomial();
    let b = build(cfg.method, &p)?;
    Ok((p, b))
}

pub fn raster_of(cfg: &JobConfig, b: &MethodBundle) -> Result<BasinRaster> {
    let attractors = default_attractors(b)?;
    compute_basins(b, &attractors, cfg.grid(&b.p)?, cfg.max_iter, cfg.tol, cfg.threads)
}

pub fn raster_section(b: &MethodBundle, raster: &BasinRaster) -> Result<RasterSection> {
    let poles: Vec<Complex64> = b.map.poles()?.iter().map(|r| r.value).collect();
    let conn = match connectivity(raster, &poles) {
        Ok(c) => Some(c),
        Err(Error::Numeric(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(RasterSection {
        grid: raster.grid,
        max_iter: raster.max_iter,
        tol: raster.tol,
        attractors: raster.attractors.clone(),
        nonconv_fraction: raster.nonconv_fraction(),
        symmetry: match symmetry_report(&b.p, raster, DEFAULT_MAX_ORDER) {
            Ok(r) => Some(r),
            Err(Error::Numeric(_)) => None,
            Err(e) => return Err(e),
        },
        immediate_basins: match immediate_basins(raster) {
            Ok(v) => Some(v),
            Err(Error::InvalidInput(_)) => None,
            Err(e) => return Err(e),
        },
        major_unbounded_components: major_unbounded_components(raster),
        julia_connected: conn.as_ref().map(ConnectivityReport::connected),
        connectivity: conn,
    })
}

pub fn analyze(cfg: &JobConfig, with_raster: bool) -> Result<AnalysisReport> {
    let (p, b) = bundle(cfg)?;
    let fixed = fixed_points(&b)?;
    let attractors = crate::fixpoints::attractors(&fixed);
    let critical = critical_points(&b)?;
    let orbits = postcritical_classify(&b, &critical, &attractors, CRITICAL_MAX_ITER, cfg.tol);
    let converge = orbits
        .iter()
        .filter(|o| o.kind != CriticalKind::Pole)
        .all(|o| matches!(o.verdict, OrbitOutcome::Converged { .. }));
    let normalization = normalize(&p)?;
    let residual = conjugacy_residual(&p, &normalization.t, normalization.lambda, cfg.samples, cfg.method, cfg.seed)?;
    let raster = if with_raster { Some(raster_section(&b, &raster_of(cfg, &b)?)?) } else { None };
    Ok(AnalysisReport {
        schema: SCHEMA_VERSION,
        command: if with_raster { "report" } else { "analyze" }.into(),
        input: InputEcho::of(cfg, &p),
        map: MapSummary {
            degree: b.map_degree(),
            numerator_degree: b.map.num().deg(),
            denominator_degree: b.map.den().deg(),
            numerator: b.map.num().clone(),
            denominator: b.map.den().clone(),
        },
        centroid: centroid(&p)?,
        normalization,
        multiplier_at_infinity: multiplier_at_infinity(&b)?,
        fixed_points: fixed,
        critical_orbits: orbits,
        critical_orbits_converge: converge,
        poly_symmetry: poly_symmetry_group(&p)?,
        scaling: ScalingSummary { normal_form_residual: residual, samples: cfg.samples, seed: cfg.seed },
        raster,
    })
}

/// The image bytes and the sidecar JSON.
pub fn basins(cfg: &JobConfig) -> Result<(Vec<u8>, String)> {
    let (p, b) = bundle(cfg)?;
    let raster = raster_of(cfg, &b)?;
    let palette = default_palette(raster.attractors.len().max(1))?;
    let image = render_ppm(&raster, &palette)?;
    let mut label_counts = vec![0; raster.attractors.len()];
    let mut nonconv = 0;
    for &l in &raster.labels {
        match usize::try_from(l) {
            Ok(i) => label_counts[i] += 1,
            Err(_) => nonconv += 1,
        }
    }
    let sidecar = BasinsSidecar {
        schema: SCHEMA_VERSION,
        command: "basins".into(),
        input: InputEcho::of(cfg, &p),
        map_degree: b.map_degree(),
        palette,
        label_counts,
        nonconv_pixels: nonconv,
        raster: raster_section(&b, &raster)?,
    };
    Ok((image, to_json(&sidecar)?))
}

pub fn symmetry(cfg: &JobConfig) -> Result<SymmetryCommandReport> {
    let (p, b) = bundle(cfg)?;
    let raster = raster_of(cfg, &b)?;
    Ok(SymmetryCommandReport {
        schema: SCHEMA_VERSION,
        command: "symmetry".into(),
        input: InputEcho::of(cfg, &p),
        grid: raster.grid,
        symmetry: symmetry_report(&p, &raster, DEFAULT_MAX_ORDER)?,
    })
}

pub fn scaling_check(cfg: &JobConfig) -> Result<ScalingCheckReport> {
    let p = cfg.polynomial();
    let t = cfg.affine;
    let residual = conjugacy_residual(&p, &t, cfg.lambda, cfg.samples, cfg.method, cfg.seed)?;
    Ok(ScalingCheckReport {
        schema: SCHEMA_VERSION,
        command: "scaling-check".into(),
        input: InputEcho::of(cfg, &p),
        t,
        lambda: cfg.lambda,
        g: p.compose_affine(t.a, t.b).scale(cfg.lambda),
        samples: cfg.samples,
        seed: cfg.seed,
        residual,
        threshold: SCALING_PASS,
        pass: residual < SCALING_PASS,
    })
}

fn emit(json: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, json)?,
        None => std::io::stdout().write_all(json.as_bytes())?,
    }
    Ok(())
}

/// Sidecar path for an image: the `--json` path, or the image path with a
/// `.json` extension.
pub fn sidecar_path(cfg: &JobConfig, image: &Path) -> PathBuf {
    cfg.json.clone().unwrap_or_else(|| image.with_extension("json"))
}

/// Runs one subcommand and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = JobConfig::resolve(cli.command.args())?;
    match &cli.command {
        Command::Analyze(_) => emit(&to_json(&analyze(&cfg, false)?)?, cfg.json.as_deref())?,
        Command::Report(_) => {
            let report = analyze(&cfg, true)?;
            if let Some(out) = &cfg.out {
                std::fs::write(out, basins(&cfg)?.0)?;
            }
            emit(&to_json(&report)?, cfg.json.as_deref())?;
        }
        Command::Basins(_) => {
            let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("basins.ppm"));
            let (image, sidecar) = basins(&cfg)?;
            std::fs::write(&out, image)?;
            std::fs::write(sidecar_path(&cfg, &out), sidecar)?;
        }
        Command::Symmetry(_) => emit(&to_json(&symmetry(&cfg)?)?, cfg.json.as_deref())?,
        Command::ScalingCheck(_) => {
            let report = scaling_check(&cfg)?;
            emit(&to_json(&report)?, cfg.json.as_deref())?;
            if !report.pass {
                eprintln!(
                    "scaling check failed: residual {:e} is not below {:e}",
                    report.residual, report.threshold
                );
                return Ok(3);
            }
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        for (text, want) in [
            ("1.5", cx(1.5, 0.0)),
            ("-2", cx(-2.0, 0.0)),
            ("2i", cx(0.0, 2.0)),
            ("-0.5i", cx(0.0, -0.5)),
            ("i", cx(0.0, 1.0)),
            ("-i", cx(0.0, -1.0)),
            ("1+2i", cx(1.0, 2.0)),
            ("1-2i", cx(1.0, -2.0)),
            ("-1-i", cx(-1.0, -1.0)),
            ("1e-3+2.5e2i", cx(1e-3, 250.0)),
            (" 3 ", cx(3.0, 0.0)),
        ] {
            assert_eq!(parse_complex(text).unwrap(), want, "{text}");
        }
        for bad in ["", "abc", "1+2", "1+xi", "inf", "1..2"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn polynomial_forms() {
        let p = parse_coefficients("-1,0,1").unwrap();
        assert_eq!(p, Polynomial::from_real(&[-1.0, 0.0, 1.0]));
        assert_eq!(parse_coefficients("0,-1,0,0,1").unwrap(), Polynomial::from_real(&[0.0, -1.0, 0.0, 0.0, 1.0]));
        let f = parse_factored("(1,3);(-1,3)").unwrap();
        assert_eq!(f.degree(), 6);
        // (z - 1)^3 (z + 1)^3 = (z^2 - 1)^3
        assert_eq!(f.expand(), Polynomial::from_real(&[-1.0, 0.0, 1.0]).pow(3));
        let f = parse_factored("(0,1); (1+i,2)").unwrap();
        assert_eq!(f.roots[1], Root::new(cx(1.0, 1.0), 2));
        assert!(matches!(parse_polynomial("(2,1)").unwrap(), PolySpec::Factored(_)));
        assert!(matches!(parse_polynomial("2,1").unwrap(), PolySpec::Coefficients(_)));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_coefficients("-1,0,x,1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match parse_coefficients("-1, 1+2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        match parse_factored("(1,3);(2,0)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 9),
            other => panic!("{other:?}"),
        }
        match parse_factored("(1,3);2,1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(parse_coefficients("0,0").is_err());
        assert_eq!(parse_coefficients("1,,2").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn config_file_and_precedence() {
        let file = parse_config("# job\ncoeffs = -1,0,1\nmax_iter = 50 # fewer\n\nsize = 32x16\nmethod = newton\n").unwrap();
        let cfg = JobConfig::merge(&JobArgs::default(), &file).unwrap();
        assert_eq!((cfg.max_iter, cfg.width, cfg.height), (50, 32, 16));
        assert_eq!(cfg.method, MethodKind::Newton);
        let args = JobArgs {
            roots: Some("(1,1);(2,1)".into()),
            max_iter: Some(80),
            ..Default::default()
        };
        let cfg = JobConfig::merge(&args, &file).unwrap();
        assert_eq!(cfg.max_iter, 80);
        assert!(matches!(cfg.poly, PolySpec::Factored(_)));
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("no equals sign").is_err());
    }

    #[test]
    fn invalid_jobs_are_usage_errors() {
        let base = JobArgs { coeffs: Some("-1,0,1".into()), ..Default::default() };
        let empty = BTreeMap::new();
        for args in [
            JobArgs { coeffs: None, ..base.clone() },
            JobArgs { roots: Some("(1,1)".into()), ..base.clone() },
            JobArgs { tol: Some(0.0), ..base.clone() },
            JobArgs { max_iter: Some(0), ..base.clone() },
            JobArgs { half_extent: Some(-1.0), ..base.clone() },
            JobArgs { size: Some("0x10".into()), ..base.clone() },
            JobArgs { lambda: Some("0".into()), ..base.clone() },
            JobArgs { affine_a: Some("0".into()), ..base.clone() },
            JobArgs { method: Some("halley".into()), ..base.clone() },
        ] {
            let err = JobConfig::merge(&args, &empty).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{err}");
        }
    }

    #[test]
    fn json_floats_have_seventeen_digits() {
        #[derive(Serialize)]
        struct Probe {
            x: f64,
            n: usize,
            c: Complex64,
            bad: f64,
        }
        let s = to_json(&Probe { x: 0.1, n: 3, c: cx(6.0, -0.0), bad: f64::NAN }).unwrap();
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("6.0000000000000000e0"));
        assert!(s.contains("\"bad\": null"));
        assert!(s.ends_with("}\n"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn analyze_quadratic() {
        let args = JobArgs { coeffs: Some("-1,0,1".into()), ..Default::default() };
        let cfg = JobConfig::merge(&args, &BTreeMap::new()).unwrap();
        let r = analyze(&cfg, false).unwrap();
        assert_eq!(r.map.degree, 4);
        let ex: Vec<_> = r.fixed_points.iter().filter(|f| f.extraneous).collect();
        assert_eq!(ex.len(), 2);
        for f in ex {
            let z = f.location.finite().unwrap();
            assert!((z.norm() - 1.0 / 5f64.sqrt()).abs() < 1e-10);
            assert!((f.multiplier - cx(6.0, 0.0)).norm() < 1e-9);
        }
        assert!(r.critical_orbits_converge);
        assert!(r.scaling.normal_form_residual < 1e-9);
        assert!(r.raster.is_none());
        assert_eq!(r.poly_symmetry.order, 2);
    }
}
