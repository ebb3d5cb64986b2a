use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub const SUMMARY_SUFFIX: &str = ".summary.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub document: Value,
    pub text: String,
    /// Missing or unreadable run files.
    pub problems: Vec<String>,
}

/// `9.73e3` → `9.7×10³` with `digits` significant figures.
pub fn sci(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let formatted = format!("{:.*e}", digits.saturating_sub(1), v);
    let (mantissa, exp) = formatted.split_once('e').expect("exponent form");
    let sup: String = exp
        .chars()
        .map(|c| match c {
            '-' => '⁻',
            '0' => '⁰',
            '1' => '¹',
            '2' => '²',
            '3' => '³',
            '4' => '⁴',
            '5' => '⁵',
            '6' => '⁶',
            '7' => '⁷',
            '8' => '⁸',
            _ => '⁹',
        })
        .collect();
    format!("{mantissa}×10{sup}")
}

fn f(s: &Map<String, Value>, key: &str) -> Option<f64> {
    s.get(key).and_then(Value::as_f64)
}

fn summary_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(SUMMARY_SUFFIX)))
        .collect();
    files.sort();
    Ok(files)
}

/// Aggregates every `*.summary.json` in `dir`. Unreadable summaries and
/// missing table files are listed; the rest of the report is still built.
pub fn build_report(dir: &Path) -> Result<Report> {
    let files = summary_files(dir)?;
    if files.is_empty() {
        return Err(Error::Usage(format!("no run outputs (*{SUMMARY_SUFFIX}) in {}", dir.display())));
    }
    let mut runs = Map::new();
    let mut problems = Vec::new();
    for path in &files {
        let name = path.file_name().expect("file").to_string_lossy();
        let parsed = std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str::<Value>(&t).map_err(|e| e.to_string()));
        match parsed {
            Ok(Value::Object(m)) => {
                if let Some(Value::Array(outputs)) = m.get("outputs") {
                    for o in outputs.iter().filter_map(Value::as_str) {
                        if !dir.join(o).exists() {
                            problems.push(format!("{name}: missing output {o}"));
                        }
                    }
                }
                let key = m.get("command").and_then(Value::as_str).map_or_else(
                    || name.trim_end_matches(SUMMARY_SUFFIX).to_string(),
                    str::to_string,
                );
                runs.insert(key, Value::Object(m));
            }
            Ok(_) => problems.push(format!("{name}: not a JSON object")),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    let text = render_text(&runs, &problems);
    let document = json!({ "runs": runs, "problems": problems });
    Ok(Report { document, text, problems })
}

fn render_text(runs: &Map<String, Value>, problems: &[String]) -> String {
    let mut t = String::new();
    let mut line = |s: String| {
        t.push_str(&s);
        t.push('\n');
    };
    line("hyperpol run report".into());
    for (cmd, v) in runs {
        let Some(s) = v.as_object() else { continue };
        match cmd.as_str() {
            "geometry" => {
                if let (Some(r), Some(rr)) = (f(s, "r_nn_nm"), f(s, "r_nn_reference_nm")) {
                    line(format!(
                        "geometry: NV nearest-neighbour distance r_NN = {r:.1} nm (reference {rr} nm, {:+.1}%)",
                        100.0 * (r / rr - 1.0)
                    ));
                }
                if let (Some(r), Some(rr)) = (f(s, "barrier_radius_nm"), f(s, "barrier_radius_reference_nm")) {
                    line(format!("geometry: diffusion barrier radius r_c = {r:.2} nm (reference approximately {rr} nm)"));
                }
                if let (Some(r), Some(rr)) = (f(s, "diffusion_length_nm"), f(s, "diffusion_length_reference_nm")) {
                    line(format!(
                        "geometry: diffusion length sqrt(D*T_pol) = {r:.1} nm (reference {rr} nm, flagged discrepancy)"
                    ));
                }
            }
            "enhance" => {
                if let Some(v) = f(s, "thermal_at_readout_field") {
                    line(format!("enhance: thermal polarization at readout field = {}", sci(v, 3)));
                }
                if let (Some(v), Some(r)) = (f(s, "integral_ratio_at_readout"), f(s, "integral_ratio_reference")) {
                    line(format!(
                        "enhance: integral ratio at readout field = {} (reference approximately {})",
                        sci(v, 2),
                        sci(r, 2)
                    ));
                }
                if let (Some(v), Some(r)) =
                    (f(s, "enhancement_vs_polarizing_field"), f(s, "enhancement_reference_lower_bound"))
                {
                    line(format!(
                        "enhance: enhancement over thermal at polarizing field = {} (reference above {}, gap documented)",
                        sci(v, 2),
                        sci(r, 1)
                    ));
                }
            }
            "sweep-power" => {
                if let (Some(p), Some(a)) = (f(s, "argmax_power_W"), f(s, "analytic_optimum_W")) {
                    line(format!("sweep-power: grid argmax {p} W, analytic optimum 1/beta = {a} W"));
                }
            }
            "sweep-field" => {
                if let Some(r2) = f(s, "quadratic_r_squared") {
                    line(format!("sweep-field: optimal power vs field quadratic fit R^2 = {r2:.6}"));
                }
            }
            "sweep-rate" => {
                if let Some(r) = f(s, "argmax_rate_MHz_per_ms") {
                    line(format!("sweep-rate: best unmasked sweep rate {r:.3} MHz/ms"));
                }
            }
            "width-crossover" => match f(s, "crossover_width_MHz") {
                Some(w) => line(format!("width-crossover: dominant component switches at {w:.1} MHz")),
                None => line("width-crossover: no crossover found".into()),
            },
            "diffuse" => {
                if let Some(b) = f(s, "final_bulk") {
                    line(format!("diffuse: final bulk polarization {}", sci(b, 4)));
                }
                if let (Some(tau), Some(r2)) = (f(s, "tail_tau_s"), f(s, "tail_r_squared")) {
                    line(format!("diffuse: post-transient exponential tau = {tau:.2} s, R^2 = {r2:.5}"));
                }
            }
            "fit" => {
                let model = s.get("model").and_then(Value::as_str).unwrap_or("?");
                let conv = s.get("converged").and_then(Value::as_bool).unwrap_or(false);
                let params = s.get("params").map(Value::to_string).unwrap_or_default();
                line(format!("fit: {model} converged={conv} params={params}"));
            }
            "spectrum" => {
                if let (Some(w), Some(b)) = (f(s, "fwhm_kHz"), f(s, "bin_width_kHz")) {
                    line(format!("spectrum: real-part FWHM {w:.4} kHz (bin {b:.4} kHz)"));
                }
                if let Some(e) = f(s, "parseval_relative_error") {
                    line(format!("spectrum: Parseval relative error {e:.2e}"));
                }
            }
            "optimize" => {
                let obj = f(s, "best_objective").unwrap_or(f64::NAN);
                let label = s.get("objective").and_then(Value::as_str).unwrap_or("");
                let point = s.get("best_point").map(Value::to_string).unwrap_or_default();
                line(format!("optimize ({label}): best objective {obj:.6} at {point}"));
            }
            other => line(format!("{other}: summary present")),
        }
    }
    for p in problems {
        line(format!("problem: {p}"));
    }
    t
}

pub fn write_report(report: &Report, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let json_path = out_dir.join("report.json");
    let text_path = out_dir.join("report.txt");
    let mut doc = serde_json::to_string_pretty(&report.document).expect("report serializes");
    doc.push('\n');
    std::fs::write(&json_path, doc).map_err(|e| Error::io(&json_path, e))?;
    std::fs::write(&text_path, &report.text).map_err(|e| Error::io(&text_path, e))?;
    Ok(vec![json_path, text_path])
}
