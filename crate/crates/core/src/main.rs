use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hyperpol::harness::{self, build_report, write_outputs, write_report, Command, Format, ScenarioConfig};
use hyperpol::{Error, Result};

/// Simulate, fit and optimize NV-driven ¹³C hyperpolarization.
#[derive(Parser, Debug)]
#[command(name = "hyperpol", version, about)]
struct Cli {
    /// Scenario config (JSON). Built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// NV spacing, diffusion barrier radius and diffusion length.
    Geometry,
    /// Power response over the power grid.
    SweepPower,
    /// Power response over the (field, power) grid and its optimum ridge.
    SweepField,
    /// Two-component sweep-rate response at the configured width.
    SweepRate,
    /// Peak intensities vs sweep width and the crossover width.
    WidthCrossover,
    /// Radial spin-diffusion solve.
    Diffuse,
    /// Fit a dataset named in the config's `fit` block.
    Fit,
    /// FID synthesis and spectrum.
    Spectrum,
    /// Thermal polarization and enhancement factors.
    Enhance,
    /// Composite-model optimization over the configured free parameters.
    Optimize,
    /// Aggregate run summaries in a directory.
    Report {
        /// Run directory; defaults to --out.
        dir: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ScenarioConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| {
            let c = cfg?;
            c.output_dir.as_ref().map(|d| c.resolve(d))
        })
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cli: &Cli) -> Result<()> {
    let command = match &cli.command {
        Cmd::Report { dir } => {
            let cfg = cli.config.as_ref().map(|_| load_config(cli)).transpose()?;
            let out = out_dir(cli, cfg.as_ref());
            let dir = dir.clone().unwrap_or_else(|| out.clone());
            let report = build_report(&dir)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.display().to_string(), source: e })?;
            write_report(&report, &out)?;
            print!("{}", report.text);
            return Ok(());
        }
        Cmd::Geometry => Command::Geometry,
        Cmd::SweepPower => Command::SweepPower,
        Cmd::SweepField => Command::SweepField,
        Cmd::SweepRate => Command::SweepRate,
        Cmd::WidthCrossover => Command::WidthCrossover,
        Cmd::Diffuse => Command::Diffuse,
        Cmd::Fit => Command::Fit,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Enhance => Command::Enhance,
        Cmd::Optimize => Command::Optimize,
    };
    let cfg = load_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {} workers: {e}", cli.workers)))?;
    let output = pool.install(|| harness::run(command, &cfg))?;
    let dir = out_dir(cli, Some(&cfg));
    let written = write_outputs(&output, &cfg, &dir, cli.format)?;
    for p in &written {
        println!("{}", p.display());
    }
    match output.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hyperpol: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
