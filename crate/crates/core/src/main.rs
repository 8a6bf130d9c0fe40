use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use impulse_geo::harness::{self, ArtifactKind, Format, Overrides, Payload, ScenarioConfig, Subcommand};
use impulse_geo::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Integrate one regularized geodesic and export it as CSV.
    Integrate,
    /// Build the limit geodesic and its jump and kink coefficients.
    Limit,
    /// Compute an existence certificate (alpha, eps0).
    Certify,
    /// Convergence table over eps_schedule.
    Sweep,
    /// Check the strict delta-net properties of the configured net.
    VerifyNet,
    /// Fit the growth exponent of the configured profile.
    ClassifyGrowth,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Integrate => Subcommand::Integrate,
            Command::Limit => Subcommand::Limit,
            Command::Certify => Subcommand::Certify,
            Command::Sweep => Subcommand::Sweep,
            Command::VerifyNet => Subcommand::VerifyNet,
            Command::ClassifyGrowth => Subcommand::ClassifyGrowth,
        }
    }
}

/// Geodesics of regularized impulsive wave space-times.
///
/// Exit status: 0 on success, 2 on invalid configuration or input,
/// 3 on numerical failure.
#[derive(Debug, Parser)]
#[command(name = "impulse-geo", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario configuration (TOML, schema_version = 1).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated eps values.
    #[arg(long, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
    #[arg(long)]
    u_end: Option<f64>,
    /// Integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for sweeps (overrides IMPULSE_GEO_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG plots for paths and tables.
    #[arg(long)]
    svg: bool,
    /// Print results without writing files.
    #[arg(long)]
    no_write: bool,
}

fn formats(kind: ArtifactKind, payload: &Payload, svg: bool) -> Vec<Format> {
    let mut f = match kind {
        ArtifactKind::Path => vec![Format::Csv],
        ArtifactKind::Table => vec![Format::Csv, Format::Text],
        ArtifactKind::Certificate => vec![Format::Text, Format::Csv],
        ArtifactKind::Report => match payload {
            Payload::Report { table: Some(_), .. } => vec![Format::Text, Format::Csv],
            _ => vec![Format::Text],
        },
    };
    if svg && matches!(kind, ArtifactKind::Path | ArtifactKind::Table) {
        f.push(Format::Svg);
    }
    f
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let cfg = ScenarioConfig::load(&cli.config)?;
    let overrides = Overrides {
        eps: cli.eps,
        eps_schedule: cli.eps_schedule.clone(),
        u_end: cli.u_end,
        tol: cli.tol,
        workers: cli.workers,
        out_dir: cli.out.clone(),
        seed: cli.seed,
        svg: cli.svg,
    };
    let env = std::env::var(harness::WORKERS_ENV).ok();
    let cfg = overrides.apply(cfg, env.as_deref())?;
    let artifacts = harness::run(cli.command.into(), &cfg)?;
    for a in &artifacts {
        if a.supports(Format::Text) {
            print!("{}", harness::emit_to_string(a, Format::Text)?);
            println!();
        }
        if cli.no_write {
            continue;
        }
        for f in formats(a.kind(), &a.payload, cfg.output.svg) {
            let path = harness::write_artifact(a, f, &cfg.output.dir)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
