//! Acceptance criteria 1–8. Each check returns a list of failed conditions;
//! a PASS/FAIL line per criterion goes straight to stdout so it shows up
//! even under captured test output.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use hyperpol::diffusion::{
    buildup_curve, fit_buildup, fit_depolarization, fit_exponential_approach, solve_radial_diffusion,
    DiffusionConfig,
};
use hyperpol::fit::ExperimentRecord;
use hyperpol::harness::{self, quadratic_fit, Command, ScenarioConfig};
use hyperpol::quantities::{
    barrier_radius, diffusion_length, nearest_neighbor_distance, ppm_to_density, PhysicalConstants, Quantity,
    SampleSpec, Unit,
};
use hyperpol::spectra::{enhancement_report, parseval_error, synthesize_fid, thermal_polarization, transform, FidSpec, Lineshape};
use hyperpol::sweep::{
    fit_two_component, log_grid, peak_intensity_vs_width, synthesize_width_datasets, two_component_response,
    AmplitudeLaw, SweepDirection, SweepResponseParams,
};
use hyperpol::transfer::{numeric_optimal_power, optimal_power, optimal_power_vs_field, se_detuning};

type Check = Vec<String>;
type Criterion = (&'static str, fn() -> Check, u64);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn require(fails: &mut Check, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        fails.push(what());
    }
}

fn geometry() -> Check {
    let mut f = Check::new();
    let consts = PhysicalConstants::default();
    let sample = SampleSpec { nv_ppm: 0.3, ..SampleSpec::default() };
    let r_nn = nearest_neighbor_distance(ppm_to_density(sample.nv_ppm, &consts).unwrap()).unwrap();
    require(&mut f, r_nn.unit == Unit::Nanometer && rel(r_nn.value, 16.7) <= 0.02, || format!("r_NN = {r_nn}"));
    let r_c = barrier_radius(Quantity::khz(10.0), Quantity::nm(2.0), Quantity::khz(1.0)).unwrap().value;
    require(&mut f, (r_c - 4.31).abs() <= 0.01, || format!("r_c = {r_c}"));
    let d = Quantity::new(0.67, Unit::NmSqPerSecond);
    let l = diffusion_length(d, Quantity::seconds(624.0)).unwrap().value;
    require(&mut f, (l - 20.4).abs() <= 0.1, || format!("L = {l}"));

    let out = harness::run(Command::Geometry, &ScenarioConfig::default()).unwrap();
    let s = &out.summary;
    require(&mut f, s["barrier_radius_reference_nm"].as_f64() == Some(5.0), || "barrier reference missing".into());
    require(&mut f, s["diffusion_length_reference_nm"].as_f64() == Some(24.0), || "length reference missing".into());
    require(&mut f, s.contains_key("diffusion_length_flag"), || "length discrepancy not flagged".into());
    f
}

fn enhancement() -> Check {
    let mut f = Check::new();
    let consts = PhysicalConstants::default();
    let th6 = thermal_polarization(Quantity::tesla(6.0), 300.0, &consts).unwrap();
    require(&mut f, (5.0e-6..=5.3e-6).contains(&th6), || format!("thermal(6 T) = {th6}"));
    let ratio = 0.05 / th6;
    require(&mut f, (9.4e3..=10.0e3).contains(&ratio), || format!("integral ratio = {ratio}"));
    let th_low = thermal_polarization(Quantity::mt(9.4), 300.0, &consts).unwrap();
    let enh = 0.05 / th_low;
    require(&mut f, (6.0e6..=6.5e6).contains(&enh), || format!("enhancement = {enh}"));

    let r = enhancement_report(0.05, Quantity::mt(9.4), Quantity::tesla(6.0), 300.0, &consts).unwrap();
    require(&mut f, rel(r.integral_ratio_at_readout, ratio) < 1e-12, || "report ratio differs".into());
    require(&mut f, rel(r.enhancement_vs_polarizing_field, enh) < 1e-12, || "report enhancement differs".into());
    let out = harness::run(Command::Enhance, &ScenarioConfig::default()).unwrap();
    require(&mut f, out.summary["enhancement_reference_lower_bound"].as_f64() == Some(7.0e6), || {
        "reference lower bound not reported".into()
    });
    f
}

fn transfer() -> Check {
    let mut f = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let beta = 10f64.powf(rng.random_range(-4.0..1.0));
        let numeric = numeric_optimal_power(beta).unwrap();
        worst = worst.max(rel(numeric, optimal_power(beta).unwrap()));
    }
    require(&mut f, worst <= 1e-9, || format!("argmax worst relative error {worst:e}"));

    let consts = PhysicalConstants::default();
    let c = 0.2;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let field = rng.random_range(6.0..20.0);
        let larmor_khz = consts.gamma_c * field;
        let df = rng.random_range(0.0..0.9) * larmor_khz;
        let p = optimal_power_vs_field(field, df, c, consts.gamma_c).unwrap();
        let back = se_detuning(field, p, c, consts.gamma_c).unwrap();
        worst = worst.max(if df > 0.0 { rel(back, df) } else { back.abs() / larmor_khz });
    }
    require(&mut f, worst <= 1e-9, || format!("SE round trip worst relative error {worst:e}"));

    let fields: Vec<f64> = (0..29).map(|i| 6.0 + 0.5 * i as f64).collect();
    let p: Vec<f64> = fields.iter().map(|b| optimal_power_vs_field(*b, 50.0, c, consts.gamma_c).unwrap()).collect();
    let (_, r2) = quadratic_fit(&fields, &p).unwrap();
    require(&mut f, r2 >= 0.999, || format!("analytic curve quadratic R² = {r2}"));

    let out = harness::run(Command::SweepField, &ScenarioConfig::default()).unwrap();
    let r2 = out.summary["quadratic_r_squared"].as_f64().unwrap_or(f64::NAN);
    require(&mut f, r2 >= 0.999, || format!("sweep-field ridge quadratic R² = {r2}"));
    f
}

fn sweep() -> Check {
    let mut f = Check::new();
    let truth = SweepResponseParams {
        exponent_c: 1.6,
        rate_low: 1.5,
        rate_high: 15.0,
        b_low: 1.5,
        b_high: 15.0,
        amp_low: 0.8,
        amp_high: 1.2,
        ..SweepResponseParams::default()
    };
    let rates = log_grid(0.1, 50.0, 60);
    let y: Vec<f64> = rates.iter().map(|&r| two_component_response(r, &truth, truth.domain()).unwrap()).collect();
    let rec = ExperimentRecord::new(rates.clone(), y, None).unwrap();
    let start = SweepResponseParams { amp_low: 1.0, amp_high: 1.0, b_low: 1.0, b_high: 10.0, exponent_c: 1.3, ..truth };
    match fit_two_component(&rec, &start) {
        Ok(fit) => {
            for (got, want) in fit.params.free_vector().iter().zip(truth.free_vector()) {
                require(&mut f, rel(*got, want) <= 0.01, || format!("sweep parameter {got} vs {want}"));
            }
        }
        Err(e) => f.push(format!("sweep fit: {e}")),
    }

    let widths: Vec<f64> = (1..=15).map(|i| 10.0 * i as f64).collect();
    let step = 10.0;
    let template = SweepResponseParams::default();
    let law = AmplitudeLaw { crossover_width: 50.0, slope: 0.5 };
    let data = synthesize_width_datasets(&widths, &rates, &template, &law, 0.1).unwrap();
    let table = peak_intensity_vs_width(&widths, &data, &template).unwrap();
    match table.crossover {
        Some(x) => require(&mut f, (x - 50.0).abs() <= step, || format!("crossover at {x} MHz")),
        None => f.push("no crossover found".into()),
    }
    let out = harness::run(Command::WidthCrossover, &ScenarioConfig::default()).unwrap();
    match out.summary["crossover_width_MHz"].as_f64() {
        Some(x) => require(&mut f, (x - 50.0).abs() <= step, || format!("width-crossover command: {x} MHz")),
        None => f.push("width-crossover command found no crossover".into()),
    }
    f
}

/// Closed-form steady state of the radial diffusion–relaxation problem with a
/// fixed value at the inner radius and zero flux at the outer one.
fn steady_state(c: &DiffusionConfig, r: f64) -> f64 {
    let k = 1.0 / (c.d_coeff * c.t1_nuclear.unwrap()).sqrt();
    let (r0, p0, big_r) = (c.r_inner, c.source_polarization, c.r_outer);
    let kl = k * (big_r - r0);
    let a = r0 * p0 * (kl.cosh() - big_r * k * kl.sinh()) / (big_r * k * kl.cosh() - kl.sinh());
    let s = r - r0;
    (r0 * p0 * (k * s).cosh() + a * (k * s).sinh()) / r
}

fn diffusion() -> Check {
    let mut f = Check::new();
    let mut c = DiffusionConfig {
        t1_nuclear: Some(10.0),
        grid_points: 256,
        t_end: 300.0,
        snapshot_times: vec![],
        series_interval: 1.0,
        ..DiffusionConfig::default()
    };
    c.dt = 0.9 * c.max_stable_dt();
    let sol = solve_radial_diffusion(&c).unwrap();
    let worst = sol
        .radii
        .iter()
        .zip(&sol.final_profile)
        .map(|(r, p)| rel(*p, steady_state(&c, *r)))
        .fold(0.0, f64::max);
    require(&mut f, worst <= 1e-3, || format!("steady state worst relative error {worst:e}"));
    require(&mut f, sol.min_value >= 0.0 && sol.max_value <= c.source_polarization, || {
        format!("extremes [{}, {}] leave [0, {}]", sol.min_value, sol.max_value, c.source_polarization)
    });

    let mut c = DiffusionConfig { t1_nuclear: Some(900.0), t_end: 150.0, snapshot_times: vec![], ..DiffusionConfig::default() };
    c.dt = 0.9 * c.max_stable_dt();
    let sol = solve_radial_diffusion(&c).unwrap();
    require(&mut f, sol.min_value >= 0.0 && sol.max_value <= c.source_polarization, || {
        "maximum principle violated in build-up run".into()
    });
    let transient = 2.0 * (c.r_outer - c.r_inner).powi(2) / c.d_coeff;
    let (t, y): (Vec<f64>, Vec<f64>) =
        sol.times.iter().zip(&sol.bulk).filter(|(t, _)| **t >= transient).map(|(t, y)| (*t, *y)).unzip();
    let r2 = fit_exponential_approach(&ExperimentRecord::new(t, y, None).unwrap())
        .ok()
        .and_then(|a| a.r_squared)
        .unwrap_or(f64::NAN);
    require(&mut f, r2 >= 0.99, || format!("post-transient single-exponential R² = {r2}"));
    f
}

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

/// "Within 2σ": at least 90% of replicas (nominal 95.4%) lie within twice
/// their own reported standard error of the truth, and the ensemble mean lies
/// within twice the ensemble spread.
fn ensemble(f: &mut Check, label: &str, truth: f64, est: &[(f64, f64)]) {
    let n = est.len() as f64;
    let mean = est.iter().map(|e| e.0).sum::<f64>() / n;
    let sd = (est.iter().map(|e| (e.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    require(f, (mean - truth).abs() <= 2.0 * sd, || {
        format!("{label}: ensemble mean {mean} vs {truth} (sd {sd})")
    });
    let covered = est.iter().filter(|(v, se)| (v - truth).abs() <= 2.0 * se).count();
    require(f, covered as f64 >= 0.9 * n, || format!("{label}: {covered}/{} replicas within 2σ", est.len()));
}

fn kinetics() -> Check {
    let mut f = Check::new();
    let (sat, t_pol) = (0.05, 10.4 * 60.0);
    let t_depols = [102.0 * 60.0, 15.0 * 60.0, 13.6 * 60.0];

    let t = grid(5.0 * t_pol, 60);
    let y: Vec<f64> = t.iter().map(|&t| buildup_curve(t, sat, t_pol)).collect();
    let b = fit_buildup(&ExperimentRecord::new(t.clone(), y, None).unwrap()).unwrap();
    require(&mut f, rel(b.t_pol, t_pol) <= 1e-6 && rel(b.saturation, sat) <= 1e-6, || {
        format!("noise-free build-up T_pol {} saturation {}", b.t_pol, b.saturation)
    });
    for &td in &t_depols {
        let t = grid(3.0 * td, 60);
        let y: Vec<f64> = t.iter().map(|&t| sat * (-t / td).exp()).collect();
        let d = fit_depolarization(&ExperimentRecord::new(t, y, None).unwrap()).unwrap();
        require(&mut f, rel(d.t_depol, td) <= 1e-6, || format!("noise-free T_depol {} vs {td}", d.t_depol));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.01 * sat).unwrap();
    let mut est = Vec::new();
    for _ in 0..100 {
        let y: Vec<f64> = t.iter().map(|&t| buildup_curve(t, sat, t_pol) + noise.sample(&mut rng)).collect();
        match fit_buildup(&ExperimentRecord::new(t.clone(), y, None).unwrap()) {
            Ok(b) => est.push((b.t_pol, b.fit.std_errors()[1])),
            Err(e) => f.push(format!("noisy build-up fit: {e}")),
        }
    }
    ensemble(&mut f, "T_pol", t_pol, &est);
    for &td in &t_depols {
        let t = grid(3.0 * td, 60);
        let mut est = Vec::new();
        for _ in 0..100 {
            let y: Vec<f64> = t.iter().map(|&t| sat * (-t / td).exp() + noise.sample(&mut rng)).collect();
            match fit_depolarization(&ExperimentRecord::new(t.clone(), y, None).unwrap()) {
                Ok(d) => match d.fit {
                    Some(fit) => est.push((d.t_depol, fit.std_errors()[1])),
                    None => f.push("noisy depolarization fit returned no covariance".into()),
                },
                Err(e) => f.push(format!("noisy depolarization fit: {e}")),
            }
        }
        ensemble(&mut f, &format!("T_depol {} min", td / 60.0), td, &est);
    }
    f
}

fn spectra() -> Check {
    let mut f = Check::new();
    for shape in [Lineshape::Lorentzian, Lineshape::Gaussian] {
        let spec = FidSpec { linewidth: 1.0, lineshape: shape, ..FidSpec::default() };
        let fid = synthesize_fid(&spec).unwrap();
        let s = transform(&fid);
        match s.fwhm() {
            Some(w) => require(&mut f, (w - 1.0).abs() <= s.bin_width(), || {
                format!("{shape:?} FWHM {w} kHz, bin {} kHz", s.bin_width())
            }),
            None => f.push(format!("{shape:?}: no FWHM")),
        }
        let e = parseval_error(&fid, &s);
        require(&mut f, e <= 1e-9, || format!("{shape:?} Parseval relative error {e:e}"));
    }
    let up = transform(&synthesize_fid(&FidSpec { direction: SweepDirection::Up, ..FidSpec::default() }).unwrap());
    let down = transform(&synthesize_fid(&FidSpec { direction: SweepDirection::Down, ..FidSpec::default() }).unwrap());
    let k = up.peak_index().unwrap();
    require(&mut f, up.re[k] > 0.0 && down.re[k] < 0.0, || format!("peak signs {} / {}", up.re[k], down.re[k]));
    require(&mut f, up.total_integral() * down.total_integral() < 0.0, || "integrals share a sign".into());
    f
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_hyperpol"))
}

fn run_all(config: &Path, out: &Path, workers: usize) -> Result<(), String> {
    for cmd in [
        "geometry",
        "sweep-power",
        "sweep-field",
        "sweep-rate",
        "width-crossover",
        "diffuse",
        "fit",
        "spectrum",
        "enhance",
        "optimize",
    ] {
        let status = Process::new(bin())
            .args([cmd, "--config"])
            .arg(config)
            .arg("--out")
            .arg(out)
            .args(["--seed", "11", "--workers", &workers.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{cmd}: {}", String::from_utf8_lossy(&status.stderr)));
        }
    }
    Ok(())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Check {
    let mut f = Check::new();
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("power.csv");
    let mut csv = String::from("# units=W,dimensionless\npower_W,polarization\n");
    for i in 1..=40 {
        let p = 5.0 * i as f64;
        csv.push_str(&format!("{p},{}\n", 0.01 * p * (-p / 40.0).exp() * (1.0 + 0.01 * (i as f64).sin())));
    }
    std::fs::write(&data, csv).unwrap();
    let config = root.path().join("scenario.json");
    std::fs::write(
        &config,
        r#"{"fit": {"dataset": "power.csv", "model": "power_response", "multistart": 8},
            "optimize": {"free": [{"name": "power", "min": {"value": 1, "unit": "W"}, "max": {"value": 200, "unit": "W"}},
                                  {"name": "field", "min": {"value": 6, "unit": "mT"}, "max": {"value": 20, "unit": "mT"}}]}}"#,
    )
    .unwrap();
    let runs: Vec<(usize, PathBuf)> = [1, 1, 4].iter().enumerate().map(|(i, w)| (*w, root.path().join(format!("run{i}")))).collect();
    for (w, dir) in &runs {
        if let Err(e) = run_all(&config, dir, *w) {
            f.push(e);
            return f;
        }
    }
    let reference = files(&runs[0].1);
    require(&mut f, reference.len() > 10, || format!("only {} output files", reference.len()));
    for (w, dir) in &runs[1..] {
        let other = files(dir);
        let names = |v: &[(String, Vec<u8>)]| v.iter().map(|x| x.0.clone()).collect::<Vec<_>>();
        require(&mut f, names(&reference) == names(&other), || format!("file sets differ at {w} workers"));
        for ((name, a), (_, b)) in reference.iter().zip(&other) {
            require(&mut f, a == b, || format!("{name} differs at {w} workers"));
        }
    }
    f
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        ("1 geometry chain", geometry, 1),
        ("2 enhancement arithmetic", enhancement, 1),
        ("3 transfer-model consistency", transfer, 5),
        ("4 sweep-model round trip", sweep, 30),
        ("5 diffusion solver", diffusion, 60),
        ("6 kinetics fits", kinetics, 30),
        ("7 spectra", spectra, 5),
        ("8 determinism", determinism, 10),
    ];
    let mut failed = Vec::new();
    let mut stdout = std::io::stdout();
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let mut fails = check();
        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(limit) {
            fails.push(format!("runtime {elapsed:.2?} exceeds {limit} s"));
        }
        let line = if fails.is_empty() {
            format!("PASS criterion {name} ({elapsed:.2?})\n")
        } else {
            failed.push(name);
            format!("FAIL criterion {name} ({elapsed:.2?}): {}\n", fails.join("; "))
        };
        stdout.write_all(line.as_bytes()).unwrap();
    }
    stdout.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
