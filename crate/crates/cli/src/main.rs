//! `curvbill`: run billiard experiments described by a JSON scene file.
//!
//! Exit codes: 0 success, 2 scene error, 3 domain error, 4 inconclusive.

mod commands;
mod output;
mod scene;

use clap::{Parser, Subcommand};
use commands::{Failure, Options};
use output::Output;
use scene::Issue;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "curvbill", version, about = "Billiards on the hyperbolic plane and the hemisphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scene file (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Output directory; overrides the scene's `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Raster resolution per axis for region computations.
    #[arg(long, global = true, default_value_t = curvbill_core::bounds::DEFAULT_RESOLUTION)]
    resolution: usize,

    /// Verdict tolerance for caustic certificates.
    #[arg(long, global = true, default_value_t = curvbill_core::verify::VERIFY_TOL)]
    tolerance: f64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Iterate the billiard map; orbits as CSV.
    Simulate,
    /// Caustic-free neighbourhood, Lazutkin bounds and region raster.
    Bounds,
    /// Certify a convex caustic.
    VerifyCaustic,
    /// Sample the table boundary; CSV and SVG.
    StringBuild,
    /// Strip experiment at curvature jumps.
    Hubacher,
    /// Phase portrait of random orbits.
    Portrait,
}

#[derive(Serialize)]
struct ErrorReport {
    error: &'static str,
    message: String,
    exit_code: i32,
    details: Vec<Issue>,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli.spec.as_ref().ok_or_else(|| Failure::Spec {
        message: "missing --spec".into(),
        details: Vec::new(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Spec {
        message: format!("cannot read {}: {e}", path.display()),
        details: Vec::new(),
    })?;
    let spec = scene::parse_scene(&text).map_err(|details| Failure::Spec {
        message: format!("{} is not a valid scene", path.display()),
        details,
    })?;
    if !(cli.resolution > 0 && cli.tolerance > 0.0) {
        return Err(Failure::Spec {
            message: "--resolution and --tolerance must be positive".into(),
            details: Vec::new(),
        });
    }
    let out = Output {
        dir: cli.out.clone().unwrap_or_else(|| PathBuf::from(&spec.output.dir)),
        formats: spec.output.formats.clone(),
    };
    let opts = Options {
        seed: cli.seed,
        resolution: cli.resolution,
        tolerance: cli.tolerance,
    };
    let table = spec.build_table()?;
    match cli.command {
        Command::Simulate => commands::simulate(&spec, &table, &out, &opts),
        Command::Bounds => commands::bounds(&spec, &table, &out, &opts),
        Command::VerifyCaustic => commands::verify(&spec, &table, &out, &opts),
        Command::StringBuild => commands::string_build(&spec, &table, &out, &opts),
        Command::Hubacher => commands::hubacher(&spec, &table, &out, &opts),
        Command::Portrait => commands::portrait(&spec, &table, &out, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let code = failure.exit_code();
            let details = match &failure {
                Failure::Spec { details, .. } => details.clone(),
                _ => Vec::new(),
            };
            let report = ErrorReport {
                error: failure.kind(),
                message: failure.message(),
                exit_code: code,
                details,
            };
            eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
            ExitCode::from(code as u8)
        }
    }
}
