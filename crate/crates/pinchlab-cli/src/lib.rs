//! Command-line harness: surface generation, the full analysis pipeline,
//! amplitude sweeps, and the closed-form constants, with deterministic JSON
//! and CSV reports.

pub mod jsonfmt;
pub mod pipeline;
pub mod report;
pub mod sweep;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use pinchlab::GeneratorSpec;

/// Exit codes of the binary.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const SOLVER: i32 = 4;
    pub const IO: i32 = 5;
}

/// A failure tagged with the pipeline stage it happened in.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl StageError {
    pub fn usage(stage: &'static str, message: impl Into<String>) -> Self {
        Self { stage, code: exit_code::USAGE, message: message.into() }
    }

    pub fn from_lib(stage: &'static str, err: pinchlab::Error) -> Self {
        use pinchlab::Error::*;
        let code = match &err {
            InvalidMesh(_) | DegenerateSurface(_) => exit_code::VALIDATION,
            NoConvergence { .. } | NotConnected => exit_code::SOLVER,
            Parse { .. } | Io(_) => exit_code::IO,
            InvalidArgument(_) => exit_code::USAGE,
        };
        Self { stage, code, message: err.to_string() }
    }

    pub fn io(stage: &'static str, err: std::io::Error) -> Self {
        Self { stage, code: exit_code::IO, message: err.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "pinchlab",
    version,
    about = "Spectral pinching diagnostics for closed surfaces in R^3"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a test surface and write it to an OFF/OBJ file.
    Gen(GenArgs),
    /// Run the full pipeline on a file or generated surface.
    Analyze(AnalyzeArgs),
    /// Analyze a family of harmonically perturbed spheres.
    Sweep(SweepArgs),
    /// Print and serialize the closed-form constants.
    Constants(ConstantsArgs),
}

/// Shape selection shared by `gen`, `analyze --shape`, and provenance.
#[derive(Args, Debug, Clone)]
pub struct ShapeArgs {
    /// icosphere | ellipsoid | perturbed | torus
    #[arg(long)]
    pub shape: Option<String>,
    /// Subdivision level for sphere-based shapes.
    #[arg(long, default_value_t = 4)]
    pub level: u32,
    /// Radius (icosphere, perturbed base radius).
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Ellipsoid semi-axes "a,b,c".
    #[arg(long)]
    pub axes: Option<String>,
    /// Harmonic perturbation amplitude t.
    #[arg(long, default_value_t = 0.1)]
    pub amp: f64,
    /// Harmonic degree l.
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    /// Harmonic order m.
    #[arg(long, default_value_t = 0)]
    pub order: i32,
    /// Torus major radius L.
    #[arg(long, default_value_t = 2.0)]
    pub major: f64,
    /// Torus tube radius l.
    #[arg(long, default_value_t = 1.0)]
    pub minor: f64,
    /// Torus axial offset a.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    /// Torus grid resolution along the big circle.
    #[arg(long, default_value_t = 128)]
    pub nu: usize,
    /// Torus grid resolution around the tube.
    #[arg(long, default_value_t = 64)]
    pub nv: usize,
}

impl ShapeArgs {
    pub fn to_spec(&self) -> Result<GeneratorSpec, StageError> {
        let Some(name) = self.shape.as_deref() else {
            return Err(StageError::usage("config", "no --shape given"));
        };
        match name {
            "icosphere" => Ok(GeneratorSpec::Icosphere { level: self.level, radius: self.radius }),
            "ellipsoid" => {
                let axes = self.axes.as_deref().ok_or_else(|| {
                    StageError::usage("config", "ellipsoid needs --axes a,b,c")
                })?;
                let parts: Vec<f64> = axes
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| StageError::usage("config", format!("bad --axes: {e}")))?;
                if parts.len() != 3 {
                    return Err(StageError::usage("config", "--axes needs three values"));
                }
                Ok(GeneratorSpec::Ellipsoid {
                    semi_axes: Vector3::new(parts[0], parts[1], parts[2]),
                    level: self.level,
                })
            }
            "perturbed" => Ok(GeneratorSpec::PerturbedSphere {
                level: self.level,
                amplitude: self.amp,
                degree: self.degree,
                order: self.order,
                base_radius: self.radius,
            }),
            "torus" => Ok(GeneratorSpec::TubeTorus {
                major: self.major,
                minor: self.minor,
                offset: self.offset,
                nu: self.nu,
                nv: self.nv,
            }),
            other => Err(StageError::usage(
                "config",
                format!("unknown shape {other:?} (icosphere|ellipsoid|perturbed|torus)"),
            )),
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Output mesh path (.off or .obj).
    #[arg(long)]
    pub out: std::path::PathBuf,
}

/// Numeric knobs shared by analyze and sweep.
#[derive(Args, Debug, Clone)]
pub struct NumericArgs {
    /// Curvature norm exponent (>= 2).
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Sobolev constant K(n) (placeholder default).
    #[arg(long = "K", default_value_t = 8.0)]
    pub sobolev_k: f64,
    /// Moser iteration constant Ktilde.
    #[arg(long = "Ktilde", default_value_t = 1.0)]
    pub ktilde: f64,
    /// Eigensolver residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Eigensolver iteration cap.
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Minimum sphere samples for coverage.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
    /// Closeness threshold for annulus/coverage flags.
    #[arg(long, default_value_t = 1e-2)]
    pub epsilon: f64,
    /// Sup-norm diagnostic threshold.
    #[arg(long, default_value_t = 1e-2)]
    pub eta: f64,
    /// Quasi-isometry distortion threshold in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Input mesh path (.off or .obj); alternative to --shape.
    #[arg(long = "in")]
    pub input: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Write the JSON report here (stdout if omitted).
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
    /// Optionally dump the normalized mesh (.off/.obj).
    #[arg(long)]
    pub dump_normalized: Option<std::path::PathBuf>,
    /// Optionally dump the sphere-mapped mesh (.off/.obj).
    #[arg(long)]
    pub dump_mapped: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Sweep family; only "harmonic" is defined.
    #[arg(long, default_value = "harmonic")]
    pub family: String,
    /// Harmonic degree l.
    #[arg(long = "l", default_value_t = 2)]
    pub degree: u32,
    /// Harmonic order m.
    #[arg(long = "m", default_value_t = 0)]
    pub order: i32,
    /// Comma-separated amplitude list.
    #[arg(long)]
    pub amps: String,
    /// Subdivision level of the family members.
    #[arg(long, default_value_t = 5)]
    pub level: u32,
    /// Base radius of the family members.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[command(flatten)]
    pub numeric: NumericArgs,
    /// Output CSV path.
    #[arg(long)]
    pub csv: std::path::PathBuf,
    /// Directory for per-amplitude JSON reports.
    #[arg(long)]
    pub report_dir: Option<std::path::PathBuf>,
    /// Optional SVG chart of defect vs Hausdorff distance.
    #[arg(long)]
    pub svg: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// Intrinsic dimension n >= 2.
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    /// Sobolev constant K(n).
    #[arg(long = "K", default_value_t = 1.0)]
    pub sobolev_k: f64,
    /// Moser constant Ktilde.
    #[arg(long = "Ktilde", default_value_t = 1.0)]
    pub ktilde: f64,
    /// Floor on series terms.
    #[arg(long, default_value_t = 60)]
    pub terms: usize,
    /// Write the JSON report here (stdout always gets a summary).
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit_code::SUCCESS,
                _ => exit_code::USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(args) => pipeline::run_gen(&args),
        Command::Analyze(args) => pipeline::run_analyze_command(&args),
        Command::Sweep(args) => sweep::run_sweep(&args),
        Command::Constants(args) => pipeline::run_constants(&args),
    };
    match result {
        Ok(()) => exit_code::SUCCESS,
        Err(e) => {
            eprintln!("error {e}");
            e.code
        }
    }
}
