//! Scenario configs, dataset ingestion, grid sweeps, the composite-model
//! optimizer and report generation behind the command-line tool.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod optimize;
pub mod report;
pub mod table;

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub use config::ScenarioConfig;
pub use ingest::{ingest, IngestSpec};
pub use report::{build_report, write_report, Report};
pub use table::{read_table, Format, LoadedTable, Meta, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Geometry,
    SweepPower,
    SweepField,
    SweepRate,
    WidthCrossover,
    Diffuse,
    Fit,
    Spectrum,
    Enhance,
    Optimize,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Geometry,
        Command::SweepPower,
        Command::SweepField,
        Command::SweepRate,
        Command::WidthCrossover,
        Command::Diffuse,
        Command::Fit,
        Command::Spectrum,
        Command::Enhance,
        Command::Optimize,
    ];
}

/// Tables and summary produced by one subcommand. `failure` carries a
/// numerical problem (such as a non-converged fit) that should set the exit
/// status after the outputs are written.
#[derive(Debug)]
pub struct RunOutput {
    pub command: String,
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
    pub failure: Option<Error>,
}

impl RunOutput {
    pub fn new(command: &str, tables: Vec<Table>, summary: Map<String, Value>) -> Self {
        RunOutput { command: command.to_string(), tables, summary, failure: None }
    }
}

pub fn run(command: Command, cfg: &ScenarioConfig) -> Result<RunOutput> {
    match command {
        Command::Geometry => commands::geometry(cfg),
        Command::SweepPower => commands::sweep_power(cfg),
        Command::SweepField => commands::sweep_field(cfg),
        Command::SweepRate => commands::sweep_rate(cfg),
        Command::WidthCrossover => commands::width_crossover(cfg),
        Command::Diffuse => commands::diffuse(cfg),
        Command::Fit => commands::fit_dataset(cfg),
        Command::Spectrum => commands::spectrum(cfg),
        Command::Enhance => commands::enhance(cfg),
        Command::Optimize => optimize::optimize(cfg),
    }
}

/// Writes every table plus `<command>.summary.json` into `dir`.
pub fn write_outputs(out: &RunOutput, cfg: &ScenarioConfig, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let hash = cfg.hash();
    let mut meta = Meta::new();
    meta.insert("generator".into(), format!("hyperpol {}", out.command));
    meta.insert("config_sha256".into(), hash.clone());
    meta.insert("seed".into(), cfg.seed.to_string());
    let mut written = Vec::new();
    for t in &out.tables {
        written.push(t.write(dir, format, &meta)?);
    }
    let mut summary = out.summary.clone();
    summary.insert("config_sha256".into(), json!(hash));
    summary.insert("seed".into(), json!(cfg.seed));
    let names: Vec<String> =
        written.iter().filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect();
    summary.insert("outputs".into(), json!(names));
    if let Some(e) = &out.failure {
        summary.insert("failure".into(), json!(e.to_string()));
    }
    let path = dir.join(format!("{}{}", out.command, report::SUMMARY_SUFFIX));
    let mut text = serde_json::to_string_pretty(&Value::Object(summary)).expect("summary serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Least-squares y ≈ a₀ + a₁x + a₂x², returning the coefficients and R².
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Result<([f64; 3], f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::domain("quadratic fit needs at least 3 matching points"));
    }
    let n = x.len();
    let a = DMatrix::from_fn(n, 3, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("quadratic fit: {e}")))?;
    let fitted = &a * &coef;
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(fitted.iter()).map(|(v, m)| (v - m).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(([coef[0], coef[1], coef[2]], r2))
}
