use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, goodness, Bounds, ExperimentRecord, FitResult, Points};

/// Exponential build-up and decay constants of the bulk polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticsParams {
    /// s
    pub t_pol: f64,
    /// s
    pub t_depol: f64,
    pub saturation: f64,
}

impl Default for KineticsParams {
    fn default() -> Self {
        KineticsParams { t_pol: 624.0, t_depol: 6120.0, saturation: 0.05 }
    }
}

impl KineticsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_pol > 0.0 && self.t_depol > 0.0) {
            return Err(Error::Validation("time constants must be > 0".into()));
        }
        if !(self.saturation > 0.0 && self.saturation <= 1.0) {
            return Err(Error::Validation(format!(
                "saturation must be in (0, 1], got {}",
                self.saturation
            )));
        }
        Ok(())
    }

    pub fn buildup(&self, t: f64) -> f64 {
        buildup_curve(t, self.saturation, self.t_pol)
    }

    pub fn depolarization(&self, t: f64) -> f64 {
        self.saturation * (-t / self.t_depol).exp()
    }
}

pub fn buildup_curve(t: f64, saturation: f64, t_pol: f64) -> f64 {
    saturation * -(-t / t_pol).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildupFit {
    pub saturation: f64,
    pub t_pol: f64,
    pub r_squared: Option<f64>,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepolarizationFit {
    pub p0: f64,
    /// Infinite when the series does not decay.
    pub t_depol: f64,
    pub converged: bool,
    pub r_squared: Option<f64>,
    pub fit: Option<FitResult>,
}

/// Exponential approach to a plateau with free starting level:
/// y = plateau − amplitude·exp(−(t − t₀)/τ), t₀ the first sample time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachFit {
    pub plateau: f64,
    pub amplitude: f64,
    pub tau: f64,
    pub t0: f64,
    pub r_squared: Option<f64>,
    pub fit: FitResult,
}

fn check_series(record: &ExperimentRecord) -> Result<()> {
    record.validate()?;
    if record.len() < 5 {
        return Err(Error::Validation(format!(
            "kinetics fits need at least 5 points, got {}",
            record.len()
        )));
    }
    Ok(())
}

/// Time at which the series first crosses `level`, linearly interpolated.
fn crossing_time(t: &[f64], y: &[f64], level: f64) -> Option<f64> {
    let increasing = y[y.len() - 1] >= y[0];
    for i in 1..t.len() {
        let (a, b) = (y[i - 1], y[i]);
        let crossed = if increasing { a < level && b >= level } else { a > level && b <= level };
        if crossed {
            let f = (level - a) / (b - a);
            return Some(t[i - 1] + f * (t[i] - t[i - 1]));
        }
    }
    None
}

fn r_squared<M: Fn(f64, &[f64]) -> f64>(record: &ExperimentRecord, model: &M, p: &[f64]) -> Result<Option<f64>> {
    Ok(goodness(Points::from(record), model, p)?.r_squared)
}

/// Fits B(t) = saturation·(1 − exp(−t/t_pol)).
pub fn fit_buildup(record: &ExperimentRecord) -> Result<BuildupFit> {
    check_series(record)?;
    let (t, y) = (&record.x, &record.y);
    let (first, last) = (y[0], y[y.len() - 1]);
    let peak = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(last > first) || peak <= 0.0 {
        return Err(Error::FitFailure(format!(
            "no growth in build-up series (first {first}, last {last}, max {peak})"
        )));
    }
    let span = t[t.len() - 1] - t[0];
    let tau0 = crossing_time(t, y, (1.0 - (-1.0f64).exp()) * last).unwrap_or(span).max(span * 1e-3);
    let model = |x: f64, p: &[f64]| buildup_curve(x, p[0], p[1]);
    let bounds = Bounds::new(vec![0.0, span * 1e-6], vec![f64::INFINITY, f64::INFINITY])?;
    let fit = fit::fit(&model, record, &[last, tau0], Some(&bounds))?;
    if !fit.converged {
        return Err(Error::FitFailure(format!(
            "build-up fit did not converge after {} iterations: {} (params {:?})",
            fit.iterations, fit.message, fit.params
        )));
    }
    Ok(BuildupFit {
        saturation: fit.params[0],
        t_pol: fit.params[1],
        r_squared: r_squared(record, &model, &fit.params)?,
        fit,
    })
}

/// Fits P(t) = P₀·exp(−t/t_depol). A series without any change reports
/// t_depol = ∞ and `converged = false`.
pub fn fit_depolarization(record: &ExperimentRecord) -> Result<DepolarizationFit> {
    check_series(record)?;
    let (t, y) = (&record.x, &record.y);
    let (first, last) = (y[0], y[y.len() - 1]);
    if y.iter().all(|v| *v == first) {
        return Ok(DepolarizationFit {
            p0: first,
            t_depol: f64::INFINITY,
            converged: false,
            r_squared: None,
            fit: None,
        });
    }
    if !(first > 0.0 && last < first) {
        return Err(Error::FitFailure(format!(
            "no decay in depolarization series (first {first}, last {last})"
        )));
    }
    let span = t[t.len() - 1] - t[0];
    // log-linear estimate on the positive samples
    let logs: Vec<(f64, f64)> = t.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, v)| (*a, v.ln())).collect();
    let n = logs.len() as f64;
    let mt = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = sxy / sxx;
    let (p_start, tau_start) = if slope < 0.0 && slope.is_finite() {
        ((ml - slope * mt).exp(), -1.0 / slope)
    } else {
        (first, span)
    };
    let model = |x: f64, p: &[f64]| p[0] * (-x / p[1]).exp();
    let bounds = Bounds::new(vec![0.0, span * 1e-6], vec![f64::INFINITY, f64::INFINITY])?;
    let mut start = vec![p_start, tau_start];
    bounds.clamp(&mut start);
    let fit = fit::fit(&model, record, &start, Some(&bounds))?;
    if !fit.converged {
        return Err(Error::FitFailure(format!(
            "depolarization fit did not converge after {} iterations: {} (params {:?})",
            fit.iterations, fit.message, fit.params
        )));
    }
    Ok(DepolarizationFit {
        p0: fit.params[0],
        t_depol: fit.params[1],
        converged: true,
        r_squared: r_squared(record, &model, &fit.params)?,
        fit: Some(fit),
    })
}

/// Single-exponential approach fit used on solver output once the initial
/// transient is dropped; the starting level is free.
pub fn fit_exponential_approach(record: &ExperimentRecord) -> Result<ApproachFit> {
    check_series(record)?;
    let (t, y) = (&record.x, &record.y);
    let t0 = t[0];
    let (first, last) = (y[0], y[y.len() - 1]);
    if first == last && y.iter().all(|v| *v == first) {
        return Err(Error::FitFailure("constant series has no time constant".into()));
    }
    let span = t[t.len() - 1] - t0;
    let tau0 = crossing_time(t, y, first + (1.0 - (-1.0f64).exp()) * (last - first))
        .map_or(span, |tc| tc - t0)
        .max(span * 1e-3);
    let model = move |x: f64, p: &[f64]| p[0] - p[1] * (-(x - t0) / p[2]).exp();
    let bounds = Bounds::new(
        vec![f64::NEG_INFINITY, f64::NEG_INFINITY, span * 1e-6],
        vec![f64::INFINITY, f64::INFINITY, f64::INFINITY],
    )?;
    let fit = fit::fit(&model, record, &[last, last - first, tau0], Some(&bounds))?;
    if !fit.converged {
        return Err(Error::FitFailure(format!(
            "approach fit did not converge after {} iterations: {}",
            fit.iterations, fit.message
        )));
    }
    Ok(ApproachFit {
        plateau: fit.params[0],
        amplitude: fit.params[1],
        tau: fit.params[2],
        t0,
        r_squared: r_squared(record, &model, &fit.params)?,
        fit,
    })
}
