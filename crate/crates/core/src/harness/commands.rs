use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::diffusion::{fit_buildup, fit_depolarization, fit_exponential_approach, solve_radial_diffusion};
use crate::error::{Error, Result};
use crate::fit::{self, goodness, Bounds, ExperimentRecord, FitOptions, FitResult, Points};
use crate::quantities::{diffusion_length, nearest_neighbor_distance, ppm_to_density, Quantity, Unit};
use crate::search::first_argmax;
use crate::spectra::{enhancement_report, parseval_error, synthesize_fid, transform};
use crate::sweep::{
    fit_two_component, peak_intensity_vs_width, synthesize_width_datasets, two_component_response,
    violates_repetition_floor, SweepResponseParams,
};
use crate::transfer::{
    lz_probability, optimal_power, optimal_power_vs_field, polarization_surface, polarization_vs_power, se_detuning,
};

use super::config::{value, FitModel, ScenarioConfig};
use super::ingest::{ingest, IngestSpec};
use super::table::Table;
use super::{quadratic_fit, RunOutput};

/// Reference figures the computed geometry and enhancement numbers are
/// reported against.
pub mod reference {
    pub const R_NN_NM: f64 = 16.7;
    pub const BARRIER_RADIUS_NM: f64 = 5.0;
    pub const DIFFUSION_LENGTH_NM: f64 = 24.0;
    pub const INTEGRAL_RATIO: f64 = 1.0e4;
    pub const ENHANCEMENT_LOWER_BOUND: f64 = 7.0e6;
}

fn summary(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m
}

fn num(v: f64) -> Value {
    // non-finite values have no JSON form; record them as strings
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

pub fn geometry(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let density = ppm_to_density(cfg.sample.nv_ppm, &cfg.constants)?;
    let r_nn = nearest_neighbor_distance(density)?.value;
    let r_c = cfg.barrier_radius_nm()?;
    let g = &cfg.geometry;
    let length = diffusion_length(g.d_coeff, g.t_pol)?.value;

    let mut t = Table::new(
        "geometry",
        &[
            ("nv_density", Unit::PerCubicCm),
            ("r_nn", Unit::Nanometer),
            ("half_r_nn", Unit::Nanometer),
            ("barrier_radius", Unit::Nanometer),
            ("diffusion_length", Unit::Nanometer),
        ],
    );
    t.push_values(&[density.value, r_nn, 0.5 * r_nn, r_c, length]);

    let mut s = summary("geometry");
    s.insert("nv_ppm".into(), num(cfg.sample.nv_ppm));
    s.insert("nv_density_cm3".into(), num(density.value));
    s.insert("r_nn_nm".into(), num(r_nn));
    s.insert("r_nn_reference_nm".into(), num(reference::R_NN_NM));
    s.insert("r_nn_relative_deviation".into(), num(r_nn / reference::R_NN_NM - 1.0));
    s.insert("barrier_radius_nm".into(), num(r_c));
    s.insert("barrier_radius_reference_nm".into(), num(reference::BARRIER_RADIUS_NM));
    s.insert("diffusion_length_nm".into(), num(length));
    s.insert("diffusion_length_reference_nm".into(), num(reference::DIFFUSION_LENGTH_NM));
    s.insert(
        "diffusion_length_flag".into(),
        json!(format!(
            "sqrt(D*T_pol) gives {length:.1} nm, not the reference {} nm",
            reference::DIFFUSION_LENGTH_NM
        )),
    );
    Ok(RunOutput::new("geometry", vec![t], s))
}

fn max_gap_around(grid: &[f64], i: usize) -> f64 {
    let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
    let right = if i + 1 < grid.len() { grid[i + 1] - grid[i] } else { 0.0 };
    left.max(right)
}

pub fn sweep_power(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let powers = cfg.grid("power")?;
    let tp = cfg.transfer_params()?;
    let gamma = cfg.constants.gamma_c;
    let rows: Vec<[f64; 4]> = powers
        .par_iter()
        .map(|&p| {
            let pol = polarization_vs_power(p, tp.beta)?;
            let lz = lz_probability(p, tp.coupling_c, tp.sweep_rate)?;
            let se_ok = se_detuning(tp.field_b, p, tp.coupling_c, gamma).is_ok();
            Ok([p, pol, lz, if se_ok { 1.0 } else { 0.0 }])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        "sweep_power",
        &[
            ("power", Unit::Watt),
            ("polarization", Unit::Dimensionless),
            ("lz_probability", Unit::Dimensionless),
            ("se_condition_met", Unit::Dimensionless),
        ],
    );
    rows.iter().for_each(|r| t.push_values(r));
    let values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let k = first_argmax(&values).expect("non-empty grid");

    let mut s = summary("sweep-power");
    s.insert("beta_per_W".into(), num(tp.beta));
    s.insert("argmax_index".into(), json!(k));
    s.insert("argmax_power_W".into(), num(powers[k]));
    s.insert("max_polarization".into(), num(values[k]));
    s.insert("analytic_optimum_W".into(), num(optimal_power(tp.beta)?));
    s.insert("grid_spacing_W".into(), num(max_gap_around(&powers, k)));
    s.insert("points".into(), json!(powers.len()));
    Ok(RunOutput::new("sweep-power", vec![t], s))
}

pub fn sweep_field(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let fields = cfg.grid("field")?;
    let powers = cfg.grid("power")?;
    let mapping = cfg.beta_mapping()?;
    let surface = polarization_surface(&fields, &powers, &mapping)?;
    let detuning = value(cfg.transfer.detuning, Unit::KHz, "transfer.detuning")?;
    let c = cfg.coupling_c()?;

    let mut ridge = Table::new(
        "sweep_field",
        &[
            ("field", Unit::MilliTesla),
            ("beta", Unit::PerWatt),
            ("argmax_power", Unit::Watt),
            ("optimal_power", Unit::Watt),
            ("max_polarization", Unit::Dimensionless),
        ],
    );
    let mut argmax = Vec::with_capacity(fields.len());
    for (i, &b) in fields.iter().enumerate() {
        let a = surface.argmax[i];
        let analytic = optimal_power_vs_field(b, detuning, c, cfg.constants.gamma_c).ok();
        ridge.push(vec![Some(b), Some(surface.betas[i]), Some(a.power), analytic, Some(a.value)]);
        argmax.push(a.power);
    }
    let mut grid = Table::new(
        "sweep_field_surface",
        &[("field", Unit::MilliTesla), ("power", Unit::Watt), ("polarization", Unit::Dimensionless)],
    );
    for (i, &b) in fields.iter().enumerate() {
        for (j, &p) in powers.iter().enumerate() {
            grid.push_values(&[b, p, surface.values[i][j]]);
        }
    }

    let mut s = summary("sweep-field");
    s.insert("fields_mT".into(), nums(&fields));
    s.insert("argmax_power_W".into(), nums(&argmax));
    s.insert("detuning_kHz".into(), num(detuning));
    if fields.len() >= 3 {
        let (coef, r2) = quadratic_fit(&fields, &argmax)?;
        s.insert("quadratic_coefficients".into(), nums(&coef));
        s.insert("quadratic_r_squared".into(), num(r2));
    }
    Ok(RunOutput::new("sweep-field", vec![ridge, grid], s))
}

fn response_at_width(cfg: &ScenarioConfig, width: f64) -> Result<SweepResponseParams> {
    let law = cfg.amplitude_law()?;
    let (amp_low, amp_high) = law.amplitudes(width, cfg.sweep.response.amp_high);
    Ok(SweepResponseParams { amp_low, amp_high, ..cfg.sweep.response })
}

pub fn sweep_rate(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let rates = cfg.grid("rate")?;
    let width = value(cfg.sweep.width, Unit::MHz, "sweep.width")?;
    let min_period = cfg.min_period_ms()?;
    let p = response_at_width(cfg, width)?;
    let domain = p.domain();
    let rows: Vec<[f64; 5]> = rates
        .par_iter()
        .map(|&r| {
            let total = two_component_response(r, &p, domain)?;
            let masked = violates_repetition_floor(width, r, min_period);
            Ok([r, total, p.low_component(r), p.high_component(r), if masked { 1.0 } else { 0.0 }])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        "sweep_rate",
        &[
            ("rate", Unit::MHzPerMs),
            ("response", Unit::Dimensionless),
            ("low_component", Unit::Dimensionless),
            ("high_component", Unit::Dimensionless),
            ("masked", Unit::Dimensionless),
        ],
    );
    rows.iter().for_each(|r| t.push_values(r));
    let usable: Vec<f64> = rows.iter().map(|r| if r[4] == 0.0 { r[1] } else { f64::NAN }).collect();

    let mut s = summary("sweep-rate");
    s.insert("width_MHz".into(), num(width));
    s.insert("masked_points".into(), json!(rows.iter().filter(|r| r[4] != 0.0).count()));
    if let Some(k) = first_argmax(&usable) {
        s.insert("argmax_rate_MHz_per_ms".into(), num(rates[k]));
        s.insert("max_response".into(), num(usable[k]));
    }
    s.insert("peak_low".into(), num(p.low_component(p.rate_low)));
    s.insert("peak_high".into(), num(p.high_component(p.rate_high)));
    Ok(RunOutput::new("sweep-rate", vec![t], s))
}

pub fn width_crossover(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let widths = cfg.grid("width")?;
    let template = cfg.sweep.response;
    let (datasets, origin) = match &cfg.sweep.datasets {
        Some(paths) => {
            if paths.len() != widths.len() {
                return Err(Error::Config(format!(
                    "{} datasets for {} widths",
                    paths.len(),
                    widths.len()
                )));
            }
            let spec = IngestSpec { x_unit: Some(Unit::MHzPerMs), ..IngestSpec::default() };
            let recs = paths.iter().map(|p| ingest(&cfg.resolve(p), &spec)).collect::<Result<Vec<_>>>()?;
            (recs, "ingested")
        }
        None => {
            let rates = cfg.grid("rate")?;
            let law = cfg.amplitude_law()?;
            (synthesize_width_datasets(&widths, &rates, &template, &law, cfg.min_period_ms()?)?, "synthetic")
        }
    };
    let table = peak_intensity_vs_width(&widths, &datasets, &template)?;
    let mut t = Table::new(
        "width_crossover",
        &[
            ("width", Unit::MHz),
            ("peak_low", Unit::Dimensionless),
            ("peak_high", Unit::Dimensionless),
            ("low_minus_high", Unit::Dimensionless),
        ],
    );
    let mut errors = Map::new();
    for r in &table.rows {
        let diff = r.peak_low.zip(r.peak_high).map(|(a, b)| a - b);
        t.push(vec![Some(r.width), r.peak_low, r.peak_high, diff]);
        if let Some(e) = &r.error {
            errors.insert(r.width.to_string(), json!(e));
        }
    }
    let mut s = summary("width-crossover");
    s.insert("datasets".into(), json!(origin));
    s.insert("crossover_width_MHz".into(), table.crossover.map_or(Value::Null, num));
    s.insert("row_errors".into(), Value::Object(errors));
    if origin == "synthetic" {
        s.insert("configured_crossover_MHz".into(), num(cfg.amplitude_law()?.crossover_width));
    }
    Ok(RunOutput::new("width-crossover", vec![t], s))
}

pub fn diffuse(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let dc = cfg.diffusion_config()?;
    let sol = solve_radial_diffusion(&dc)?;
    let mut bulk = Table::new("diffuse_bulk", &[("time", Unit::Second), ("bulk", Unit::Dimensionless)]);
    for (t, b) in sol.times.iter().zip(&sol.bulk) {
        bulk.push_values(&[*t, *b]);
    }
    let names: Vec<String> = sol.snapshots.iter().map(|s| format!("p_at_{}s", s.time)).collect();
    let mut cols: Vec<(&str, Unit)> = vec![("radius", Unit::Nanometer)];
    cols.extend(names.iter().map(|n| (n.as_str(), Unit::Dimensionless)));
    let mut profiles = Table::new("diffuse_profiles", &cols);
    for (i, r) in sol.radii.iter().enumerate() {
        let mut row = vec![*r];
        row.extend(sol.snapshots.iter().map(|s| s.profile[i]));
        profiles.push_values(&row);
    }

    let mut s = summary("diffuse");
    s.insert("d_coeff_nm2_per_s".into(), num(dc.d_coeff));
    s.insert("r_inner_nm".into(), num(dc.r_inner));
    s.insert("r_outer_nm".into(), num(dc.r_outer));
    s.insert("t1_nuclear_s".into(), dc.t1_nuclear.map_or(json!("infinite"), num));
    s.insert("dt_s".into(), num(sol.dt_used));
    s.insert("steps".into(), json!(sol.steps));
    s.insert("final_bulk".into(), num(sol.final_bulk()));
    s.insert("min_value".into(), num(sol.min_value));
    s.insert("max_value".into(), num(sol.max_value));
    s.insert(
        "maximum_principle".into(),
        json!(sol.min_value >= 0.0 && sol.max_value <= dc.source_polarization),
    );
    let transient = 2.0 * (dc.r_outer - dc.r_inner).powi(2) / dc.d_coeff;
    s.insert("transient_s".into(), num(transient));
    let (t, y): (Vec<f64>, Vec<f64>) =
        sol.times.iter().zip(&sol.bulk).filter(|(t, _)| **t >= transient).map(|(a, b)| (*a, *b)).unzip();
    let tail = if t.len() >= 5 {
        ExperimentRecord::new(t, y, None).and_then(|r| fit_exponential_approach(&r)).ok()
    } else {
        None
    };
    match tail {
        Some(f) => {
            s.insert("tail_tau_s".into(), num(f.tau));
            s.insert("tail_plateau".into(), num(f.plateau));
            s.insert("tail_r_squared".into(), f.r_squared.map_or(Value::Null, num));
        }
        None => {
            s.insert("tail_fit".into(), json!("not enough post-transient samples"));
        }
    }
    Ok(RunOutput::new("diffuse", vec![bulk, profiles], s))
}

fn fit_table(rec: &ExperimentRecord, model: impl Fn(f64) -> f64) -> Table {
    let mut t = Table::new(
        "fit",
        &[("x", rec.x_unit), ("y", rec.y_unit), ("model", rec.y_unit), ("residual", rec.y_unit)],
    );
    for (x, y) in rec.x.iter().zip(&rec.y) {
        let m = model(*x);
        t.push_values(&[*x, *y, m, y - m]);
    }
    t
}

fn insert_fit(s: &mut Map<String, Value>, names: &[&str], f: &FitResult) {
    let params: Map<String, Value> = names.iter().zip(&f.params).map(|(n, v)| (n.to_string(), num(*v))).collect();
    let errors: Map<String, Value> =
        names.iter().zip(f.std_errors()).map(|(n, v)| (n.to_string(), num(v))).collect();
    s.insert("params".into(), Value::Object(params));
    s.insert("std_errors".into(), Value::Object(errors));
    s.insert("residual_norm".into(), num(f.residual_norm));
    s.insert("iterations".into(), json!(f.iterations));
    s.insert("converged".into(), json!(f.converged));
    s.insert("condition_warning".into(), json!(f.condition_warning));
    s.insert("message".into(), json!(f.message));
}

pub fn fit_dataset(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let fb = cfg.fit.as_ref().ok_or_else(|| Error::Usage("the fit command needs a 'fit' block in the config".into()))?;
    let path = cfg.resolve(&fb.dataset);
    let spec = IngestSpec {
        x_column: fb.x_column.clone(),
        y_column: fb.y_column.clone(),
        sigma_column: fb.sigma_column.clone(),
        x_unit: Some(fb.model.x_unit()),
        y_unit: None,
    };
    let rec = ingest(&path, &spec)?;
    let mut s = summary("fit");
    s.insert("dataset".into(), json!(fb.dataset));
    s.insert("points".into(), json!(rec.len()));

    let (table, failure) = match fb.model {
        FitModel::PowerResponse => {
            s.insert("model".into(), json!("power_response"));
            let model = |x: f64, p: &[f64]| p[0] * x * (-p[1] * x).exp();
            let k = first_argmax(&rec.y).expect("non-empty record");
            let x_peak = rec.x[k].max(f64::MIN_POSITIVE);
            let guess = [rec.y[k] * std::f64::consts::E / x_peak, 1.0 / x_peak];
            let initial = fb.initial.clone().unwrap_or_else(|| guess.to_vec());
            if initial.len() != 2 {
                return Err(Error::Config("power_response takes 2 initial values".into()));
            }
            let f = if fb.multistart > 0 {
                let hi = [10.0 * guess[0].abs(), 10.0 * guess[1]];
                let bounds = Bounds::new(vec![0.0, 0.1 * guess[1]], hi.to_vec())?;
                let start = bounds.contains(&initial).then_some(initial.as_slice());
                let ms = fit::fit_multistart(
                    &model,
                    Points::from(&rec),
                    start,
                    &bounds,
                    fb.multistart,
                    cfg.seed,
                    &FitOptions::default(),
                )?;
                s.insert("multistart_best_index".into(), json!(ms.best_index));
                s.insert("multistart_residuals".into(), nums(&ms.residual_norms));
                ms.best
            } else {
                let bounds = Bounds::new(vec![0.0, 0.0], vec![f64::INFINITY, f64::INFINITY])?;
                fit::fit(&model, &rec, &initial, Some(&bounds))?
            };
            insert_fit(&mut s, &["scale", "beta"], &f);
            let g = goodness(Points::from(&rec), &model, &f.params)?;
            s.insert("r_squared".into(), g.r_squared.map_or(Value::Null, num));
            s.insert("optimal_power_W".into(), num(1.0 / f.params[1]));
            let failure = (!f.converged).then(|| Error::FitFailure(format!("power response: {}", f.message)));
            (fit_table(&rec, |x| model(x, &f.params)), failure)
        }
        FitModel::Buildup => {
            s.insert("model".into(), json!("buildup"));
            let f = fit_buildup(&rec)?;
            insert_fit(&mut s, &["saturation", "t_pol"], &f.fit);
            s.insert("r_squared".into(), f.r_squared.map_or(Value::Null, num));
            s.insert("t_pol_min".into(), num(f.t_pol / 60.0));
            let (a, tau) = (f.saturation, f.t_pol);
            (fit_table(&rec, |x| crate::diffusion::buildup_curve(x, a, tau)), None)
        }
        FitModel::Depolarization => {
            s.insert("model".into(), json!("depolarization"));
            let f = fit_depolarization(&rec)?;
            s.insert("converged".into(), json!(f.converged));
            s.insert("t_depol_s".into(), num(f.t_depol));
            s.insert("t_depol_min".into(), num(f.t_depol / 60.0));
            s.insert("p0".into(), num(f.p0));
            if let Some(fr) = &f.fit {
                insert_fit(&mut s, &["p0", "t_depol"], fr);
                s.insert("r_squared".into(), f.r_squared.map_or(Value::Null, num));
            }
            let failure = (!f.converged).then(|| Error::FitFailure("series does not decay; t_depol is infinite".into()));
            let (p0, tau) = (f.p0, f.t_depol);
            (fit_table(&rec, |x| p0 * (-x / tau).exp()), failure)
        }
        FitModel::TwoComponent => {
            s.insert("model".into(), json!("two_component"));
            let f = fit_two_component(&rec, &cfg.sweep.response)?;
            insert_fit(&mut s, &["exponent_c", "b_low", "b_high", "amp_low", "amp_high", "exponent_c_high"], &f.fit);
            s.insert("peak_low".into(), num(f.peak_low));
            s.insert("peak_high".into(), num(f.peak_high));
            let failure = (!f.fit.converged).then(|| Error::FitFailure(format!("two-component: {}", f.fit.message)));
            let p = f.params;
            (fit_table(&rec, |x| two_component_response(x, &p, p.domain()).unwrap_or(f64::NAN)), failure)
        }
    };
    let mut out = RunOutput::new("fit", vec![table], s);
    out.failure = failure;
    Ok(out)
}

pub fn spectrum(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let spec = cfg.fid_spec()?;
    let fid = synthesize_fid(&spec)?;
    let sp = transform(&fid);
    let mut ft = Table::new("fid", &[("time_s", Unit::Second), ("re", Unit::Dimensionless), ("im", Unit::Dimensionless)]);
    for (t, z) in fid.times().zip(&fid.samples) {
        ft.push_values(&[t, z.re, z.im]);
    }
    let mut st = Table::new(
        "spectrum",
        &[("freq_kHz", Unit::KHz), ("re", Unit::Dimensionless), ("im", Unit::Dimensionless)],
    );
    for i in 0..sp.len() {
        st.push_values(&[sp.frequency[i], sp.re[i], sp.im[i]]);
    }
    let integral = match cfg.spectrum.window {
        Some((lo, hi)) => sp.integral(lo, hi)?,
        None => sp.total_integral(),
    };
    let mut s = summary("spectrum");
    s.insert("samples".into(), json!(fid.len()));
    s.insert("dwell_s".into(), num(fid.dwell_time));
    s.insert("carrier_MHz".into(), num(fid.carrier_frequency));
    s.insert("bin_width_kHz".into(), num(sp.bin_width()));
    s.insert("linewidth_kHz".into(), num(spec.linewidth));
    s.insert("fwhm_kHz".into(), sp.fwhm().map_or(Value::Null, num));
    if let Some(k) = sp.peak_index() {
        s.insert("peak_frequency_kHz".into(), num(sp.frequency[k]));
        s.insert("peak_real".into(), num(sp.re[k]));
    }
    s.insert("parseval_relative_error".into(), num(parseval_error(&fid, &sp)));
    s.insert("integral".into(), num(integral));
    s.insert("direction".into(), serde_json::to_value(spec.direction).expect("enum serializes"));
    s.insert("lineshape".into(), serde_json::to_value(spec.lineshape).expect("enum serializes"));
    Ok(RunOutput::new("spectrum", vec![ft, st], s))
}

pub fn enhance(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let e = &cfg.enhance;
    let temperature = value(e.temperature, Unit::Kelvin, "enhance.temperature")?;
    let pol_field = Quantity::tesla(value(e.polarizing_field, Unit::Tesla, "enhance.polarizing_field")?);
    let read_field = Quantity::tesla(value(e.readout_field, Unit::Tesla, "enhance.readout_field")?);
    let r = enhancement_report(e.hyper_polarization, pol_field, read_field, temperature, &cfg.constants)?;
    let mut t = Table::new(
        "enhance",
        &[
            ("hyper_polarization", Unit::Dimensionless),
            ("polarizing_field", Unit::Tesla),
            ("readout_field", Unit::Tesla),
            ("temperature", Unit::Kelvin),
            ("thermal_polarizing", Unit::Dimensionless),
            ("thermal_readout", Unit::Dimensionless),
            ("enhancement", Unit::Dimensionless),
            ("integral_ratio", Unit::Dimensionless),
        ],
    );
    t.push_values(&[
        r.hyper_polarization,
        r.polarizing_field,
        r.readout_field,
        r.temperature,
        r.thermal_at_polarizing_field,
        r.thermal_at_readout_field,
        r.enhancement_vs_polarizing_field,
        r.integral_ratio_at_readout,
    ]);
    let mut s = summary("enhance");
    if let Value::Object(m) = serde_json::to_value(&r).expect("report serializes") {
        s.extend(m);
    }
    s.insert("integral_ratio_reference".into(), num(reference::INTEGRAL_RATIO));
    s.insert("enhancement_reference_lower_bound".into(), num(reference::ENHANCEMENT_LOWER_BOUND));
    s.insert(
        "enhancement_gap".into(),
        json!(format!(
            "computed {:.2e} vs reference lower bound {:.0e}; constants are not tuned to close the gap",
            r.enhancement_vs_polarizing_field,
            reference::ENHANCEMENT_LOWER_BOUND
        )),
    );
    Ok(RunOutput::new("enhance", vec![t], s))
}
