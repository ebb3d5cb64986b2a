use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spherically symmetric diffusion–relaxation problem around one NV centre.
///
/// ∂P/∂t = D·(∂²P/∂r² + (2/r)·∂P/∂r) − P/T₁ on [r_inner, r_outer] with
/// P(r_inner) = source, ∂P/∂r(r_outer) = 0 and P(r, 0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    /// nm²/s
    pub d_coeff: f64,
    /// Barrier radius, nm.
    pub r_inner: f64,
    /// nm; half the NV nearest-neighbour distance by default.
    pub r_outer: f64,
    /// Nuclear relaxation time, s. `None` disables relaxation.
    pub t1_nuclear: Option<f64>,
    pub source_polarization: f64,
    pub grid_points: usize,
    /// s
    pub dt: f64,
    /// s
    pub t_end: f64,
    /// Times (s) at which full radial profiles are kept.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Spacing (s) of the bulk-average series; 0 records every step.
    #[serde(default)]
    pub series_interval: f64,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        let mut c = DiffusionConfig {
            d_coeff: 0.67,
            r_inner: 4.31,
            r_outer: 8.27,
            t1_nuclear: Some(900.0),
            source_polarization: 0.05,
            grid_points: 256,
            dt: 0.0,
            t_end: 120.0,
            snapshot_times: vec![1.0, 10.0, 60.0, 120.0],
            series_interval: 0.5,
        };
        c.dt = 0.9 * c.max_stable_dt();
        c
    }
}

impl DiffusionConfig {
    pub fn spacing(&self) -> f64 {
        (self.r_outer - self.r_inner) / (self.grid_points.max(2) - 1) as f64
    }

    /// Explicit-scheme bound 0.5·Δr²/D.
    pub fn max_stable_dt(&self) -> f64 {
        let h = self.spacing();
        0.5 * h * h / self.d_coeff
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_coeff > 0.0) {
            return Err(Error::Config(format!("d_coeff must be > 0, got {}", self.d_coeff)));
        }
        if !(self.r_inner > 0.0 && self.r_inner < self.r_outer) {
            return Err(Error::Config(format!(
                "need 0 < r_inner < r_outer, got {} and {}",
                self.r_inner, self.r_outer
            )));
        }
        if self.grid_points < 16 {
            return Err(Error::Config(format!("grid_points must be >= 16, got {}", self.grid_points)));
        }
        if self.spacing() >= self.r_inner {
            return Err(Error::Config("grid spacing must be below r_inner".into()));
        }
        if let Some(t1) = self.t1_nuclear {
            if !(t1 > 0.0) {
                return Err(Error::Config(format!("t1_nuclear must be > 0, got {t1}")));
            }
        }
        if !(self.source_polarization >= 0.0) {
            return Err(Error::Config("source_polarization must be >= 0".into()));
        }
        if !(self.t_end >= 0.0) || !(self.series_interval >= 0.0) {
            return Err(Error::Config("t_end and series_interval must be >= 0".into()));
        }
        let bound = self.max_stable_dt();
        if !(self.dt > 0.0 && self.dt <= bound) {
            return Err(Error::Config(format!(
                "dt = {} s violates the stability bound 0.5·Δr²/D = {bound} s",
                self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionSolution {
    /// Node radii, nm.
    pub radii: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Volume-averaged polarization, sampled every `series_interval`.
    pub times: Vec<f64>,
    pub bulk: Vec<f64>,
    pub final_profile: Vec<f64>,
    pub steps: usize,
    /// Time step actually used (t_end split into equal steps ≤ dt).
    pub dt_used: f64,
    /// Extremes over every node and step.
    pub min_value: f64,
    pub max_value: f64,
}

impl DiffusionSolution {
    pub fn final_bulk(&self) -> f64 {
        *self.bulk.last().expect("series holds at least t = 0")
    }
}

/// Volume average ∫P·r²dr / ∫r²dr by the trapezoid rule on the node grid.
pub fn volume_average(radii: &[f64], profile: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..radii.len() {
        let h = radii[i] - radii[i - 1];
        let (w0, w1) = (radii[i - 1].powi(2), radii[i].powi(2));
        num += 0.5 * h * (w0 * profile[i - 1] + w1 * profile[i]);
        den += 0.5 * h * (w0 + w1);
    }
    num / den
}

/// Explicit finite-difference solve. Diffusion uses the centred stencil with
/// the 2/r drift term; relaxation is applied as an exact exp(−dt/T₁) factor
/// after each diffusion step, so every update is a convex combination and the
/// discrete maximum principle holds up to the stability bound.
pub fn solve_radial_diffusion(config: &DiffusionConfig) -> Result<DiffusionSolution> {
    config.validate()?;
    let n = config.grid_points;
    let h = config.spacing();
    let radii: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { config.r_outer } else { config.r_inner + i as f64 * h })
        .collect();

    let steps = if config.t_end == 0.0 {
        0
    } else {
        (config.t_end / config.dt).ceil() as usize
    };
    let dt = if steps == 0 { config.dt } else { config.t_end / steps as f64 };
    let lambda = config.d_coeff * dt / (h * h);
    let decay = config.t1_nuclear.map_or(1.0, |t1| (-dt / t1).exp());

    let left: Vec<f64> = radii.iter().map(|r| lambda * (1.0 - h / r)).collect();
    let right: Vec<f64> = radii.iter().map(|r| lambda * (1.0 + h / r)).collect();
    let centre = 1.0 - 2.0 * lambda;

    let record_every = if config.series_interval > 0.0 {
        ((config.series_interval / dt).round() as usize).max(1)
    } else {
        1
    };

    let mut p = vec![0.0; n];
    p[0] = config.source_polarization;
    let mut next = p.clone();

    let mut snapshot_queue: Vec<f64> = config.snapshot_times.clone();
    snapshot_queue.sort_by(f64::total_cmp);
    let mut snapshot_iter = snapshot_queue.into_iter().peekable();
    let mut snapshots = Vec::new();
    while let Some(&t) = snapshot_iter.peek() {
        if t <= 0.0 {
            snapshots.push(Snapshot { time: 0.0, profile: p.clone() });
            snapshot_iter.next();
        } else {
            break;
        }
    }

    let mut times = vec![0.0];
    let mut bulk = vec![volume_average(&radii, &p)];
    let mut min_value = p.iter().copied().fold(f64::INFINITY, f64::min);
    let mut max_value = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    for step in 1..=steps {
        for i in 1..n - 1 {
            next[i] = decay * (centre * p[i] + left[i] * p[i - 1] + right[i] * p[i + 1]);
        }
        next[n - 1] = decay * (centre * p[n - 1] + 2.0 * lambda * p[n - 2]);
        std::mem::swap(&mut p, &mut next);

        for &v in &p[1..] {
            if v < min_value {
                min_value = v;
            }
            if v > max_value {
                max_value = v;
            }
        }

        let t = step as f64 * dt;
        if step % record_every == 0 || step == steps {
            times.push(t);
            bulk.push(volume_average(&radii, &p));
        }
        while let Some(&ts) = snapshot_iter.peek() {
            if ts <= t + 0.5 * dt {
                snapshots.push(Snapshot { time: t, profile: p.clone() });
                snapshot_iter.next();
            } else {
                break;
            }
        }
    }
    if !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("diffusion solve produced non-finite values".into()));
    }

    Ok(DiffusionSolution {
        radii,
        snapshots,
        times,
        bulk,
        final_profile: p,
        steps,
        dt_used: dt,
        min_value,
        max_value,
    })
}
