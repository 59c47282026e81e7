//! Command-line front end: one command per experiment, deterministic JSON
//! results, SVG renderings and regression baselines.
//!
//! Exit codes: 0 success or verdict true, 2 verdict false or baseline drift,
//! 3 a solve did not converge, 4 parameter error, 1 I/O failure.

pub mod baseline;
mod commands;
pub mod document;
pub mod json;
pub mod oracle;
pub mod render;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::modulus::{GroupMode, SolverOptions, TANGENT_GENERATION};
use crate::{Error, Result};

pub use baseline::{Baseline, Check, Drift};
pub use commands::execute;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_FALSE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_PARAM: i32 = 4;

/// Relative tolerance written into pinned baselines.
pub const BASELINE_REL_TOL: f64 = 1e-6;

#[derive(Parser, Debug, Clone)]
#[command(name = "carpetlab", version, about = "Transboundary modulus experiments on Sierpinski carpets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for JSON and SVG files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for generated instances.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Baseline to compare the output against (default: a checked-in
    /// baseline pinned with the same parameters, if any).
    #[arg(long, global = true)]
    pub baseline: Option<PathBuf>,
    /// Also write SVG renderings.
    #[arg(long, global = true)]
    pub render: bool,
    /// Print the JSON document instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write a baseline pinned from this run to the given file.
    #[arg(long, global = true)]
    pub pin: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Build a carpet and write its exact geometry.
    Gen(GenArgs),
    /// Modulus of one path family.
    Modulus(ModulusArgs),
    /// Pair-modulus table over circles of generation ≤ 2.
    Lemma51(TableArgs),
    /// Quotient modulus against the number of periods.
    ScalingLaw(ScalingArgs),
    /// Three-quarter strip against a third of the quarter strip.
    SerialLaw(StripArgs),
    /// Quarter-strip quotient modulus against the angle density.
    Lemma74(Lemma74Args),
    /// Dihedral orbits of circles and distinguished points.
    Orbits(OrbitArgs),
    /// Dimension bounds of two carpets.
    Dimensions(DimensionArgs),
    /// Per-entry search against the exact pay-once oracle.
    OracleSuite(OracleArgs),
    /// SVG of a carpet or of an extremal distribution.
    Render(RenderArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Modulus(_) => "modulus",
            Command::Lemma51(_) => "lemma51",
            Command::ScalingLaw(_) => "scaling-law",
            Command::SerialLaw(_) => "serial-law",
            Command::Lemma74(_) => "lemma74",
            Command::Orbits(_) => "orbits",
            Command::Dimensions(_) => "dimensions",
            Command::OracleSuite(_) => "oracle-suite",
            Command::Render(_) => "render",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub tol_feas: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_qp: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iterations: usize,
    /// Drop the density on carpet material (circle weights only).
    #[arg(long)]
    pub no_continuous: bool,
    /// Include the generated constraints in the output.
    #[arg(long)]
    pub dump_constraints: bool,
}

impl SolverArgs {
    pub fn options(&self, group: GroupMode) -> SolverOptions<f64> {
        SolverOptions {
            tol_feas: self.tol_feas,
            tol_qp: self.tol_qp,
            max_iterations: self.max_iterations,
            continuous: !self.no_continuous,
            keep_constraints: self.dump_constraints,
            group,
            ..SolverOptions::default()
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionArg {
    Unit,
    Quarter,
    Half,
    ThreeQuarter,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GenArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, visible_alias = "gen", default_value_t = 2)]
    pub generation: u32,
    #[arg(long, value_enum, default_value_t = RegionArg::Unit)]
    pub region: RegionArg,
    /// Scale levels kept on each side of a weak tangent.
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    /// Paths joining two circles of a unit-square carpet.
    Pair,
    /// Vertical segments of `[0, a] × [0, 1]`.
    Rect,
    /// Radial segments of `1 < |z| < R`.
    Annulus,
    /// Quarter-tangent quotient strip.
    Quarter,
    /// Three-quarter-tangent quotient strip.
    ThreeQuarter,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupArg {
    Trivial,
    Dihedral,
    Scaling,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModulusArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Pair)]
    pub family: FamilyArg,
    /// The two circles: `M`, `O`, `#id` or an address as printed by `gen`.
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = ["M".to_string(), "O".to_string()])]
    pub pair: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    /// Carpet generation (default 3 for pairs, 2 for strips).
    #[arg(long, visible_alias = "generation")]
    pub gen: Option<u32>,
    /// Pairs: grid p^m × p^m (default m = generation). Rect and annulus:
    /// cells across the short side (default 64). Strips: rows per period
    /// (default 18).
    #[arg(long, visible_alias = "m")]
    pub resolution: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long = "R", default_value_t = std::f64::consts::E)]
    pub ratio: f64,
    /// Periods of the strip quotient.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, value_enum)]
    pub group: Option<GroupArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TableArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, visible_alias = "generation", default_value_t = 3)]
    pub gen: u32,
    /// Grid exponent: p^m × p^m cells.
    #[arg(long, visible_alias = "m", default_value_t = 4)]
    pub resolution: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StripArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    /// Rows per period of the log-polar strip.
    #[arg(long, visible_alias = "resolution", default_value_t = 18)]
    pub rows: usize,
    #[arg(long, visible_alias = "generation", default_value_t = TANGENT_GENERATION)]
    pub gen: u32,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScalingArgs {
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[command(flatten)]
    pub strip: StripArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Lemma74Args {
    /// Smallest accepted ρ-length of the angle density.
    #[arg(long, default_value_t = 0.98)]
    pub min_length: f64,
    #[command(flatten)]
    pub strip: StripArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OrbitArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, visible_alias = "generation", default_value_t = 2)]
    pub gen: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DimensionArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, default_value_t = 3)]
    pub q: u32,
    /// Also tabulate all odd p, q from 3 up to this bound.
    #[arg(long)]
    pub sweep: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderWhat {
    Carpet,
    HeatMap,
    Witness,
    SquareSides,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RenderArgs {
    #[arg(long, value_enum, default_value_t = RenderWhat::Carpet)]
    pub what: RenderWhat,
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, visible_alias = "generation", default_value_t = 2)]
    pub gen: u32,
    #[arg(long, value_enum, default_value_t = RegionArg::Unit)]
    pub region: RegionArg,
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
    /// Circles of the extremal problem for the distribution renderings.
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = ["M".to_string(), "O".to_string()])]
    pub pair: Vec<String>,
    /// Grid exponent for the distribution renderings (default: generation).
    #[arg(long, visible_alias = "m")]
    pub resolution: Option<usize>,
    /// Width of the drawing in pixels.
    #[arg(long, default_value_t = 720)]
    pub canvas: u32,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Everything a command produced, before anything is written.
#[derive(Clone, Debug)]
pub struct Outcome {
    /// File stem of the JSON document.
    pub stem: String,
    pub doc: Value,
    pub verdict: Option<bool>,
    pub converged: bool,
    /// `(file name, contents)` of every SVG.
    pub svgs: Vec<(String, String)>,
    pub summary: Vec<String>,
    /// Pointers pinned by `--pin`.
    pub pin_paths: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if !self.converged {
            EXIT_NOT_CONVERGED
        } else if self.verdict == Some(false) {
            EXIT_FALSE
        } else {
            EXIT_OK
        }
    }
}

/// Command, parameters and seed of a run. Output paths are left out so the
/// documents do not depend on where they are written.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub params: Value,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub baseline: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let params = serde_json::to_value(&cli.command)?;
        let params = match params {
            Value::Object(mut m) if m.len() == 1 => m.remove(cli.command.name()).unwrap_or(Value::Null),
            other => other,
        };
        Ok(ExperimentConfig {
            command: cli.command.name().to_string(),
            params,
            seed: cli.seed,
            out: cli.out.clone(),
            baseline: cli.baseline.clone(),
        })
    }
}

/// The only place files are written.
pub struct Writer {
    dir: PathBuf,
}

impl Writer {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Writer { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        Ok(path)
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::Domain(_) | Error::UnknownCircle(_) | Error::Alignment(_) | Error::TooLarge(_) => {
            EXIT_PARAM
        }
        Error::NotConverged(_) => EXIT_NOT_CONVERGED,
        Error::Drift(_) => EXIT_FALSE,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
    }
}

/// Directory of the checked-in baselines: `CARPETLAB_BASELINES` if set,
/// otherwise `baselines/` of this crate.
pub fn baseline_dir() -> PathBuf {
    std::env::var_os("CARPETLAB_BASELINES")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("baselines"))
}

/// The explicit `--baseline`, or a checked-in one pinned with the same
/// command and parameters.
fn find_baseline(cli: &Cli, config: &ExperimentConfig, stem: &str) -> Result<Option<Baseline>> {
    if let Some(path) = &cli.baseline {
        return Baseline::load(path).map(Some);
    }
    if cli.pin.is_some() {
        return Ok(None);
    }
    let path = baseline_dir().join(format!("{stem}.json"));
    if !path.is_file() {
        return Ok(None);
    }
    let b = Baseline::load(&path)?;
    Ok(b.applies_to(&config.command, &config.params).then_some(b))
}

fn finish(cli: &Cli, config: &ExperimentConfig, mut outcome: Outcome) -> Result<i32> {
    outcome.doc["config"] = serde_json::to_value(config)?;
    let mut code = outcome.exit_code();

    let mut drift = Vec::new();
    if let Some(b) = find_baseline(cli, config, &outcome.stem)? {
        drift = b.compare(&config.command, &outcome.doc)?;
        outcome.doc["baseline"] = json!({ "provenance": b.provenance, "drift": drift });
        if !drift.is_empty() && code == EXIT_OK {
            code = EXIT_FALSE;
        }
    }

    let text = json::to_string(&outcome.doc)?;
    let dir = cli.out.clone().or_else(|| cli.render.then(|| PathBuf::from(".")));
    let mut written = Vec::new();
    if let Some(dir) = &dir {
        let w = Writer::new(dir)?;
        if cli.out.is_some() {
            written.push(w.write(&format!("{}.json", outcome.stem), &text)?);
        }
        for (name, svg) in &outcome.svgs {
            written.push(w.write(name, svg)?);
        }
    }
    if let Some(path) = &cli.pin {
        if !outcome.converged {
            return Err(Error::NotConverged("refusing to pin a baseline from a non-converged run".into()));
        }
        let paths: Vec<&str> = outcome.pin_paths.iter().map(String::as_str).collect();
        let provenance = format!(
            "pinned from the first converged run of `carpetlab {}`; values derived by the run itself",
            config.command
        );
        let mut b = Baseline::pin(&config.command, &provenance, &outcome.doc, &paths, BASELINE_REL_TOL)?;
        b.params = Some(config.params.clone());
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, json::to_string(&b)?)?;
        written.push(path.clone());
    }

    if cli.json {
        print!("{text}");
    } else {
        for line in &outcome.summary {
            println!("{line}");
        }
        for d in &drift {
            println!("baseline drift at {}: expected {}, found {}", d.path, d.expected, d.found);
        }
        for p in &written {
            println!("wrote {}", p.display());
        }
    }
    Ok(code)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = ExperimentConfig::from_cli(cli)
        .and_then(|config| execute(cli).and_then(|outcome| finish(cli, &config, outcome)));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("carpetlab: {e}");
            error_code(&e)
        }
    }
}
