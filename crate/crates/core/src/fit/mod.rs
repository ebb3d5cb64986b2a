//! Model-agnostic nonlinear least squares.
//!
//! The primary solver is a damped (Levenberg–Marquardt) Gauss–Newton
//! iteration on a central-difference Jacobian. When it stalls, a Nelder–Mead
//! simplex takes over from the best point found and the damped solver polishes
//! the simplex result. Failures produce a non-converged [`FitResult`], never a
//! panic.

mod lm;
mod record;
mod simplex;
mod stats;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use lm::finite_difference_jacobian;
pub use record::ExperimentRecord;
pub use stats::{goodness, Goodness};

/// Box constraints on the parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::domain("bounds have mismatched lengths"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::domain("every lower bound must be <= its upper bound"));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Bounds {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lower.len()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub(crate) fn clamp(&self, p: &mut [f64]) {
        for (v, (l, u)) in p.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Damped least squares only.
    LevenbergMarquardt,
    /// Nelder–Mead only.
    Simplex,
    /// Damped least squares with simplex fallback.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative step threshold for convergence.
    pub step_tol: f64,
    /// Relative residual-decrease threshold for convergence.
    pub residual_tol: f64,
    pub initial_damping: f64,
    pub method: FitMethod,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            step_tol: 1e-9,
            residual_tol: 1e-9,
            initial_damping: 1e-3,
            method: FitMethod::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Parameter covariance, scaled by the reduced χ² when no σ was supplied.
    pub covariance: Vec<Vec<f64>>,
    /// √(Σ weighted residual²)
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Normal matrix was singular or badly conditioned at the solution.
    pub condition_warning: bool,
    pub method: FitMethod,
    pub message: String,
}

impl FitResult {
    /// Standard errors from the covariance diagonal.
    pub fn std_errors(&self) -> Vec<f64> {
        (0..self.params.len())
            .map(|i| self.covariance[i][i].max(0.0).sqrt())
            .collect()
    }
}

/// Borrowed view of the points being fitted; unlike [`ExperimentRecord`]
/// it does not require ordered x.
#[derive(Debug, Clone, Copy)]
pub struct Points<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub sigma: Option<&'a [f64]>,
}

impl<'a> Points<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64], sigma: Option<&'a [f64]>) -> Result<Self> {
        if x.len() != y.len() || sigma.is_some_and(|s| s.len() != x.len()) {
            return Err(Error::Validation("x, y and sigma lengths differ".into()));
        }
        if x.is_empty() {
            return Err(Error::Validation("no data points".into()));
        }
        if let Some(s) = sigma {
            if s.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Validation("sigma must be > 0".into()));
            }
        }
        Ok(Points { x, y, sigma })
    }

    fn weight(&self, i: usize) -> f64 {
        self.sigma.map_or(1.0, |s| 1.0 / s[i])
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

impl<'a> From<&'a ExperimentRecord> for Points<'a> {
    fn from(r: &'a ExperimentRecord) -> Self {
        Points {
            x: &r.x,
            y: &r.y,
            sigma: r.sigma.as_deref(),
        }
    }
}

/// Weighted sum of squared residuals; `None` if the model is not finite.
pub(crate) fn cost<M>(model: &M, pts: &Points, p: &[f64]) -> Option<f64>
where
    M: Fn(f64, &[f64]) -> f64,
{
    let mut s = 0.0;
    for i in 0..pts.len() {
        let r = (pts.y[i] - model(pts.x[i], p)) * pts.weight(i);
        s += r * r;
    }
    s.is_finite().then_some(s)
}

/// Fits `model(x, params)` to a record with default options.
pub fn fit<M>(model: &M, record: &ExperimentRecord, initial: &[f64], bounds: Option<&Bounds>) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    record.validate()?;
    fit_points(model, record.into(), initial, bounds, &FitOptions::default())
}

pub fn fit_with<M>(
    model: &M,
    record: &ExperimentRecord,
    initial: &[f64],
    bounds: Option<&Bounds>,
    options: &FitOptions,
) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    record.validate()?;
    fit_points(model, record.into(), initial, bounds, options)
}

/// Core entry point. Errors only for invalid input (initial point outside the
/// bounds, model not finite at the initial point); numerical trouble yields a
/// non-converged result.
pub fn fit_points<M>(
    model: &M,
    pts: Points,
    initial: &[f64],
    bounds: Option<&Bounds>,
    options: &FitOptions,
) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    if initial.is_empty() {
        return Err(Error::domain("at least one parameter is required"));
    }
    let bounds = match bounds {
        Some(b) => {
            if b.lower.len() != initial.len() {
                return Err(Error::domain("bounds length differs from parameter count"));
            }
            if !b.contains(initial) {
                return Err(Error::domain(format!("initial point {initial:?} outside bounds")));
            }
            b.clone()
        }
        None => Bounds::unbounded(initial.len()),
    };
    for &x in pts.x {
        let v = model(x, initial);
        if !v.is_finite() {
            return Err(Error::Domain(format!(
                "model not finite at x = {x} for the initial parameters"
            )));
        }
    }

    match options.method {
        FitMethod::LevenbergMarquardt => lm::levenberg_marquardt(model, &pts, initial, &bounds, options),
        FitMethod::Simplex => {
            let s = simplex::nelder_mead(model, &pts, initial, &bounds, options);
            Ok(stats::finish(model, &pts, s, &bounds))
        }
        FitMethod::Auto => {
            let first = lm::levenberg_marquardt(model, &pts, initial, &bounds, options)?;
            if first.converged {
                return Ok(first);
            }
            let s = simplex::nelder_mead(model, &pts, &first.params, &bounds, options);
            let polished = lm::levenberg_marquardt(model, &pts, &s.params, &bounds, options)?;
            let simplex_result = stats::finish(model, &pts, s, &bounds);
            let mut best = [first, simplex_result, polished]
                .into_iter()
                .min_by(|a, b| {
                    (!a.converged, a.residual_norm)
                        .partial_cmp(&(!b.converged, b.residual_norm))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("three candidates");
            best.method = FitMethod::Auto;
            if !best.converged {
                best.message = format!("no convergence after simplex fallback: {}", best.message);
            }
            Ok(best)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiStartResult {
    pub best: FitResult,
    pub best_index: usize,
    pub starts: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
}

/// Latin-hypercube sample of `n` points inside finite `bounds`.
pub fn latin_hypercube(bounds: &Bounds, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if !bounds.is_finite() {
        return Err(Error::Usage("multi-start requires finite bounds".into()));
    }
    let dim = bounds.lower.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; dim]; n];
    for (d, (&lo, &hi)) in bounds.lower.iter().zip(&bounds.upper).enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (i, s) in strata.into_iter().enumerate() {
            let u: f64 = rng.random();
            points[i][d] = lo + (hi - lo) * (s as f64 + u) / n as f64;
        }
    }
    Ok(points)
}

/// Runs a local fit from each Latin-hypercube start (plus `initial`, if
/// given, as start 0) concurrently. The lowest residual wins; ties go to
/// the lowest start index.
pub fn fit_multistart<M>(
    model: &M,
    pts: Points,
    initial: Option<&[f64]>,
    bounds: &Bounds,
    n_starts: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<MultiStartResult>
where
    M: Fn(f64, &[f64]) -> f64 + Sync,
{
    let mut starts = Vec::new();
    if let Some(p) = initial {
        starts.push(p.to_vec());
    }
    starts.extend(latin_hypercube(bounds, n_starts, seed)?);
    if starts.is_empty() {
        return Err(Error::Usage("multi-start needs at least one start".into()));
    }
    let results: Vec<Option<FitResult>> = starts
        .par_iter()
        .map(|s| fit_points(model, pts, s, Some(bounds), options).ok())
        .collect();
    let residual_norms: Vec<f64> = results
        .iter()
        .map(|r| r.as_ref().map_or(f64::INFINITY, |r| r.residual_norm))
        .collect();
    let mut best_index = None;
    for (i, r) in residual_norms.iter().enumerate() {
        if r.is_finite() && best_index.is_none_or(|b: usize| *r < residual_norms[b]) {
            best_index = Some(i);
        }
    }
    let best_index =
        best_index.ok_or_else(|| Error::FitFailure("no multi-start instance produced a fit".into()))?;
    let best = results[best_index].clone().expect("finite residual implies a result");
    Ok(MultiStartResult {
        best,
        best_index,
        starts,
        residual_norms,
    })
}
