//! Microwave-power and magnetic-field response of the NV → ¹³C transfer.
//!
//! * power response  ε ∝ P·exp(−β·P)
//! * Landau–Zener probability  p = 1 − exp(−c·P / (2π·Δ̇))
//! * solid-effect detuning  δf = √((γ_C·B)² − c·P)
//!
//! Working units: P in W, B in mT, c in MHz²/W (so c·P = Ω²_mw in MHz²),
//! Δ̇ in MHz/ms, γ_C in MHz/T, detunings in kHz.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search;

/// Factor that makes c·P/Δ̇ dimensionless: MHz² / (MHz/ms) = MHz·ms = 10³.
pub const LZ_EXPONENT_SCALE: f64 = 1.0e3;

/// Field at which the default coupling is calibrated, mT.
pub const CALIBRATION_FIELD_MT: f64 = 9.4;
/// Power at which Ω_mw equals the ¹³C Larmor frequency under the default coupling, W.
pub const CALIBRATION_POWER_W: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferParams {
    /// Decay constant of the power response, 1/W.
    pub beta: f64,
    /// Ω²_mw = c·P, MHz²/W.
    pub coupling_c: f64,
    /// mT
    pub field_b: f64,
    /// W
    pub power_p: f64,
    /// MHz/ms
    pub sweep_rate: f64,
}

impl TransferParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0
            && self.coupling_c > 0.0
            && self.field_b > 0.0
            && self.power_p >= 0.0
            && self.sweep_rate > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid transfer parameters: {self:?}")))
        }
    }
}

impl Default for TransferParams {
    fn default() -> Self {
        TransferParams {
            beta: 0.025,
            coupling_c: default_coupling(crate::quantities::PhysicalConstants::default().gamma_c),
            field_b: CALIBRATION_FIELD_MT,
            power_p: CALIBRATION_POWER_W,
            sweep_rate: 10.0,
        }
    }
}

/// Coupling such that Ω_mw at 40 W equals the ¹³C Larmor frequency at 9.4 mT.
pub fn default_coupling(gamma_c: f64) -> f64 {
    let larmor = larmor_mhz(CALIBRATION_FIELD_MT, gamma_c);
    larmor * larmor / CALIBRATION_POWER_W
}

/// ¹³C Larmor frequency in MHz for a field in mT.
pub fn larmor_mhz(field_mt: f64, gamma_c: f64) -> f64 {
    gamma_c * field_mt * 1e-3
}

/// Relative polarization P·exp(−β·P).
pub fn polarization_vs_power(p_mw: f64, beta: f64) -> Result<f64> {
    if !(p_mw >= 0.0) {
        return Err(Error::domain(format!("MW power must be >= 0, got {p_mw}")));
    }
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be > 0, got {beta}")));
    }
    Ok(p_mw * (-beta * p_mw).exp())
}

/// d/dP of the power response: exp(−β·P)·(1 − β·P).
pub fn polarization_slope(p_mw: f64, beta: f64) -> f64 {
    (-beta * p_mw).exp() * (1.0 - beta * p_mw)
}

/// Analytic maximizer 1/β of the power response.
pub fn optimal_power(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be > 0, got {beta}")));
    }
    Ok(1.0 / beta)
}

/// Maximizer of the power response found numerically from the sign change of
/// its slope, starting from a bracket that does not assume the answer.
pub fn numeric_optimal_power(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be > 0, got {beta}")));
    }
    search::argmax_by_slope(|p| polarization_slope(p, beta), 0.0, 1.0)
}

/// Landau–Zener transition probability for drive c·P at sweep rate Δ̇.
///
/// The exponent is c·P·10³ / (2π·Δ̇): c·P in MHz², Δ̇ in MHz/ms.
pub fn lz_probability(p_mw: f64, coupling_c: f64, sweep_rate: f64) -> Result<f64> {
    if !(sweep_rate > 0.0) {
        return Err(Error::domain(format!("sweep rate must be > 0, got {sweep_rate}")));
    }
    if !(p_mw >= 0.0 && coupling_c >= 0.0) {
        return Err(Error::domain("power and coupling must be >= 0"));
    }
    let x = coupling_c * p_mw * LZ_EXPONENT_SCALE / (2.0 * std::f64::consts::PI * sweep_rate);
    Ok(-(-x).exp_m1())
}

/// Solid-effect detuning in kHz.
pub fn se_detuning(field_b: f64, p_mw: f64, coupling_c: f64, gamma_c: f64) -> Result<f64> {
    if !(field_b > 0.0) {
        return Err(Error::domain(format!("field must be > 0, got {field_b}")));
    }
    if !(p_mw >= 0.0) {
        return Err(Error::domain(format!("MW power must be >= 0, got {p_mw}")));
    }
    let larmor = larmor_mhz(field_b, gamma_c);
    let larmor_sq = larmor * larmor;
    let drive_sq = coupling_c * p_mw;
    if drive_sq > larmor_sq {
        return Err(Error::SeConditionViolated { drive_sq, larmor_sq });
    }
    Ok((larmor_sq - drive_sq).sqrt() * 1e3)
}

/// MW power that keeps the solid-effect detuning at `detuning_target` (kHz).
pub fn optimal_power_vs_field(
    field_b: f64,
    detuning_target: f64,
    coupling_c: f64,
    gamma_c: f64,
) -> Result<f64> {
    if !(field_b > 0.0) {
        return Err(Error::domain(format!("field must be > 0, got {field_b}")));
    }
    if !(coupling_c > 0.0) {
        return Err(Error::domain(format!("coupling must be > 0, got {coupling_c}")));
    }
    let larmor = larmor_mhz(field_b, gamma_c);
    let df = detuning_target * 1e-3;
    if !(df >= 0.0) || df > larmor {
        return Err(Error::domain(format!(
            "detuning {detuning_target} kHz outside [0, {}] kHz",
            larmor * 1e3
        )));
    }
    Ok((larmor * larmor - df * df) / coupling_c)
}

/// Diagnostic curve: LZ probability gated by the validity of the
/// solid-effect condition. Not a replacement for the power response.
pub fn ise_diagnostic(p_mw: f64, params: &TransferParams, gamma_c: f64) -> Result<f64> {
    let p = lz_probability(p_mw, params.coupling_c, params.sweep_rate)?;
    match se_detuning(params.field_b, p_mw, params.coupling_c, gamma_c) {
        Ok(_) => Ok(p),
        Err(Error::SeConditionViolated { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// β at a given field, either fitted per field or from inverting the
/// solid-effect condition at fixed detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMapping {
    Fixed(f64),
    /// (field mT, β 1/W) pairs; 1/β is interpolated linearly in field.
    Fitted(Vec<(f64, f64)>),
    /// β(B) = c / ((γ_C·B)² − δf²)
    Analytic {
        detuning_khz: f64,
        coupling_c: f64,
        gamma_c: f64,
    },
}

impl BetaMapping {
    pub fn beta_at(&self, field_b: f64) -> Result<f64> {
        match self {
            BetaMapping::Fixed(b) => {
                if *b > 0.0 {
                    Ok(*b)
                } else {
                    Err(Error::domain(format!("beta must be > 0, got {b}")))
                }
            }
            BetaMapping::Fitted(points) => interpolate_beta(points, field_b),
            BetaMapping::Analytic {
                detuning_khz,
                coupling_c,
                gamma_c,
            } => {
                let p_opt = optimal_power_vs_field(field_b, *detuning_khz, *coupling_c, *gamma_c)?;
                if p_opt > 0.0 {
                    Ok(1.0 / p_opt)
                } else {
                    Err(Error::domain(format!(
                        "no positive optimal power at {field_b} mT for detuning {detuning_khz} kHz"
                    )))
                }
            }
        }
    }
}

fn interpolate_beta(points: &[(f64, f64)], field_b: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::domain("fitted beta mapping is empty"));
    }
    if points.iter().any(|&(_, b)| !(b > 0.0)) {
        return Err(Error::domain("fitted beta values must be > 0"));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::domain("fitted beta fields must be strictly increasing"));
    }
    let tol = 1e-9 * field_b.abs().max(1.0);
    if let Some(&(_, b)) = points.iter().find(|(f, _)| (f - field_b).abs() <= tol) {
        return Ok(b);
    }
    let i = points.partition_point(|&(f, _)| f < field_b);
    if i == 0 || i == points.len() {
        return Err(Error::domain(format!(
            "field {field_b} mT outside fitted range [{}, {}]",
            points[0].0,
            points[points.len() - 1].0
        )));
    }
    let (f0, b0) = points[i - 1];
    let (f1, b1) = points[i];
    let t = (field_b - f0) / (f1 - f0);
    let p_opt = (1.0 - t) / b0 + t / b1;
    Ok(1.0 / p_opt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowArgmax {
    pub power_index: usize,
    pub power: f64,
    pub value: f64,
}

/// Power response evaluated over a (field, power) grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationSurface {
    pub fields: Vec<f64>,
    pub powers: Vec<f64>,
    pub betas: Vec<f64>,
    /// `values[i][j]` at `fields[i]`, `powers[j]`.
    pub values: Vec<Vec<f64>>,
    pub argmax: Vec<RowArgmax>,
}

pub(crate) fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::domain(format!("{name} grid is empty")));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

pub fn polarization_surface(
    fields: &[f64],
    powers: &[f64],
    mapping: &BetaMapping,
) -> Result<PolarizationSurface> {
    check_axis("field", fields)?;
    check_axis("power", powers)?;
    let rows: Vec<(f64, Vec<f64>)> = fields
        .par_iter()
        .map(|&b| {
            let beta = mapping.beta_at(b)?;
            let row = powers
                .iter()
                .map(|&p| polarization_vs_power(p, beta))
                .collect::<Result<Vec<_>>>()?;
            Ok((beta, row))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut betas = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    let mut argmax = Vec::with_capacity(rows.len());
    for (beta, row) in rows {
        let j = search::first_argmax(&row).expect("non-empty row");
        argmax.push(RowArgmax {
            power_index: j,
            power: powers[j],
            value: row[j],
        });
        betas.push(beta);
        values.push(row);
    }
    Ok(PolarizationSurface {
        fields: fields.to_vec(),
        powers: powers.to_vec(),
        betas,
        values,
        argmax,
    })
}
