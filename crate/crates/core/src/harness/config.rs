use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diffusion::DiffusionConfig;
use crate::error::{Error, Result};
use crate::quantities::{
    barrier_radius, nearest_neighbor_distance, ppm_to_density, PhysicalConstants, Quantity, SampleSpec, Unit,
};
use crate::spectra::{FidSpec, Lineshape};
use crate::sweep::{AmplitudeLaw, SweepDirection, SweepResponseParams};
use crate::transfer::{default_coupling, BetaMapping, TransferParams};

/// Grid axes the sweep and optimize commands understand, with their units.
pub const AXES: [(&str, Unit); 4] = [
    ("power", Unit::Watt),
    ("field", Unit::MilliTesla),
    ("rate", Unit::MHzPerMs),
    ("width", Unit::MHz),
];

pub fn axis_unit(name: &str) -> Result<Unit> {
    AXES.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, u)| *u)
        .ok_or_else(|| {
            let known: Vec<&str> = AXES.iter().map(|a| a.0).collect();
            Error::Usage(format!("unknown axis '{name}', expected one of {known:?}"))
        })
}

/// Converts a configured quantity, reporting the config path on failure.
pub(crate) fn value(q: Quantity, unit: Unit, path: &str) -> Result<f64> {
    q.value_in(unit).map_err(|_| {
        Error::Config(format!("{path}: expected a quantity convertible to {unit}, found {}", q.unit))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
    pub unit: Unit,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, points: usize, scale: Scale, unit: Unit) -> Self {
        GridSpec { min, max, points, scale, unit }
    }

    /// Grid values converted to `unit`, ascending.
    pub fn values_in(&self, unit: Unit, path: &str) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Config(format!("{path}: grid must have at least one point")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::Config(format!("{path}: need finite min <= max")));
        }
        if self.points > 1 && self.max == self.min {
            return Err(Error::Config(format!("{path}: min == max with {} points", self.points)));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(Error::Config(format!("{path}: log grid needs min > 0")));
        }
        let raw = grid_values(self.min, self.max, self.points, self.scale);
        raw.into_iter().map(|v| value(Quantity::new(v, self.unit), unit, path)).collect()
    }
}

pub fn grid_values(min: f64, max: f64, points: usize, scale: Scale) -> Vec<f64> {
    match (points, scale) {
        (0, _) => vec![],
        (1, _) => vec![min],
        (_, Scale::Log) => crate::sweep::log_grid(min, max, points),
        (n, Scale::Linear) => (0..n)
            .map(|i| if i == n - 1 { max } else { min + (max - min) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferBlock {
    pub beta: Quantity,
    /// Defaults to the calibration coupling (Ω_mw at 40 W equals the Larmor frequency at 9.4 mT).
    pub coupling: Option<Quantity>,
    pub field: Quantity,
    pub power: Quantity,
    pub sweep_rate: Quantity,
    /// Fixed solid-effect detuning used for β(B).
    pub detuning: Quantity,
    /// Present for completeness; no model depends on it.
    pub laser_power: Quantity,
    /// Measured (field mT, β 1/W) pairs; replaces the analytic β(B) when set.
    pub beta_by_field: Option<Vec<(f64, f64)>>,
}

impl Default for TransferBlock {
    fn default() -> Self {
        TransferBlock {
            beta: Quantity::new(0.025, Unit::PerWatt),
            coupling: None,
            field: Quantity::mt(9.4),
            power: Quantity::watt(40.0),
            sweep_rate: Quantity::new(10.0, Unit::MHzPerMs),
            detuning: Quantity::khz(50.0),
            laser_power: Quantity::watt(1.0),
            beta_by_field: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub response: SweepResponseParams,
    pub width: Quantity,
    pub crossover_width: Quantity,
    pub amplitude_slope: f64,
    /// Shortest allowed sweep period Δ/Δ̇.
    pub min_period: Quantity,
    /// Measured rate-response files, one per grid width, in grid order.
    pub datasets: Option<Vec<String>>,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock {
            response: SweepResponseParams::default(),
            width: Quantity::mhz(100.0),
            crossover_width: Quantity::mhz(50.0),
            amplitude_slope: 0.5,
            min_period: Quantity::new(0.1, Unit::Millisecond),
            datasets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryBlock {
    /// Hyperfine coupling at `reference_distance`.
    pub hyperfine_ref: Quantity,
    pub reference_distance: Quantity,
    pub d_coeff: Quantity,
    pub t_pol: Quantity,
}

impl Default for GeometryBlock {
    fn default() -> Self {
        GeometryBlock {
            hyperfine_ref: Quantity::khz(10.0),
            reference_distance: Quantity::nm(2.0),
            d_coeff: Quantity::new(0.67, Unit::NmSqPerSecond),
            t_pol: Quantity::seconds(624.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffusionBlock {
    /// Defaults to geometry.d_coeff.
    pub d_coeff: Option<Quantity>,
    /// Defaults to the barrier radius.
    pub r_inner: Option<Quantity>,
    /// Defaults to half the NV nearest-neighbour distance.
    pub r_outer: Option<Quantity>,
    pub t1_nuclear: Quantity,
    pub no_relaxation: bool,
    pub source_polarization: f64,
    pub grid_points: usize,
    /// Defaults to 0.9 of the stability bound.
    pub dt: Option<Quantity>,
    pub t_end: Quantity,
    /// s
    pub snapshot_times: Vec<f64>,
    pub series_interval: Quantity,
}

impl Default for DiffusionBlock {
    fn default() -> Self {
        DiffusionBlock {
            d_coeff: None,
            r_inner: None,
            r_outer: None,
            t1_nuclear: Quantity::seconds(900.0),
            no_relaxation: false,
            source_polarization: 0.05,
            grid_points: 256,
            dt: None,
            t_end: Quantity::seconds(120.0),
            snapshot_times: vec![1.0, 10.0, 30.0, 60.0, 120.0],
            series_interval: Quantity::seconds(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumBlock {
    pub polarization: f64,
    /// Defaults to the sample's ¹³C linewidth.
    pub linewidth: Option<Quantity>,
    pub offset: Quantity,
    pub duration: Quantity,
    pub dwell: Quantity,
    pub direction: SweepDirection,
    pub lineshape: Lineshape,
    pub field: Quantity,
    /// Integration window in kHz offsets; the whole axis when unset.
    pub window: Option<(f64, f64)>,
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        SpectrumBlock {
            polarization: 0.05,
            linewidth: None,
            offset: Quantity::khz(0.0),
            duration: Quantity::seconds(0.05),
            dwell: Quantity::seconds(2e-6),
            direction: SweepDirection::Up,
            lineshape: Lineshape::Lorentzian,
            field: Quantity::tesla(6.0),
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhanceBlock {
    pub hyper_polarization: f64,
    pub polarizing_field: Quantity,
    pub readout_field: Quantity,
    pub temperature: Quantity,
}

impl Default for EnhanceBlock {
    fn default() -> Self {
        EnhanceBlock {
            hyper_polarization: 0.05,
            polarizing_field: Quantity::mt(9.4),
            readout_field: Quantity::tesla(6.0),
            temperature: Quantity::new(300.0, Unit::Kelvin),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParam {
    pub name: String,
    pub min: Option<Quantity>,
    pub max: Option<Quantity>,
    /// Coarse-grid points; falls back to `optimize.coarse_points`.
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeBlock {
    pub free: Vec<FreeParam>,
    pub coarse_points: usize,
    pub max_rounds: usize,
    /// Relative objective change that ends coordinate descent.
    pub tolerance: f64,
}

impl Default for OptimizeBlock {
    fn default() -> Self {
        OptimizeBlock {
            free: vec![FreeParam {
                name: "power".into(),
                min: Some(Quantity::watt(1.0)),
                max: Some(Quantity::watt(200.0)),
                points: None,
                scale: Scale::Linear,
            }],
            coarse_points: 9,
            max_rounds: 30,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// A·P·exp(−β·P)
    PowerResponse,
    Buildup,
    Depolarization,
    TwoComponent,
}

impl FitModel {
    pub fn x_unit(self) -> Unit {
        match self {
            FitModel::PowerResponse => Unit::Watt,
            FitModel::Buildup | FitModel::Depolarization => Unit::Second,
            FitModel::TwoComponent => Unit::MHzPerMs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitBlock {
    /// CSV or JSON dataset, relative to the config file.
    pub dataset: String,
    pub model: FitModel,
    #[serde(default)]
    pub x_column: Option<String>,
    #[serde(default)]
    pub y_column: Option<String>,
    #[serde(default)]
    pub sigma_column: Option<String>,
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
    /// Extra Latin-hypercube starts (power_response only).
    #[serde(default)]
    pub multistart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub output_dir: Option<String>,
    pub sample: SampleSpec,
    pub constants: PhysicalConstants,
    pub transfer: TransferBlock,
    pub sweep: SweepBlock,
    pub geometry: GeometryBlock,
    pub diffusion: DiffusionBlock,
    pub spectrum: SpectrumBlock,
    pub enhance: EnhanceBlock,
    pub grids: BTreeMap<String, GridSpec>,
    pub optimize: OptimizeBlock,
    pub fit: Option<FitBlock>,
    /// Directory relative paths resolve against; not part of the document.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            output_dir: None,
            sample: SampleSpec::default(),
            constants: PhysicalConstants::default(),
            transfer: TransferBlock::default(),
            sweep: SweepBlock::default(),
            geometry: GeometryBlock::default(),
            diffusion: DiffusionBlock::default(),
            spectrum: SpectrumBlock::default(),
            enhance: EnhanceBlock::default(),
            grids: BTreeMap::new(),
            optimize: OptimizeBlock::default(),
            fit: None,
            base_dir: PathBuf::from("."),
        }
    }
}

fn default_grid(axis: &str) -> GridSpec {
    match axis {
        "power" => GridSpec::new(0.0, 200.0, 401, Scale::Linear, Unit::Watt),
        "field" => GridSpec::new(6.0, 20.0, 29, Scale::Linear, Unit::MilliTesla),
        "rate" => GridSpec::new(0.1, 50.0, 60, Scale::Log, Unit::MHzPerMs),
        _ => GridSpec::new(10.0, 150.0, 15, Scale::Linear, Unit::MHz),
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for name in self.grids.keys() {
            axis_unit(name)?;
        }
        for p in &self.optimize.free {
            axis_unit(&p.name)?;
        }
        self.sample.validate()?;
        self.constants.validate()?;
        self.transfer_params()?.validate()?;
        self.sweep.response.validate()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (sorted grid keys, fixed field order).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve(&self, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Grid for `axis` in the axis unit, falling back to a built-in default.
    pub fn grid(&self, axis: &str) -> Result<Vec<f64>> {
        let unit = axis_unit(axis)?;
        let spec = self.grids.get(axis).cloned().unwrap_or_else(|| default_grid(axis));
        spec.values_in(unit, &format!("grids.{axis}"))
    }

    pub fn coupling_c(&self) -> Result<f64> {
        match self.transfer.coupling {
            Some(q) => value(q, Unit::MHzSqPerWatt, "transfer.coupling"),
            None => Ok(default_coupling(self.constants.gamma_c)),
        }
    }

    pub fn transfer_params(&self) -> Result<TransferParams> {
        let t = &self.transfer;
        Ok(TransferParams {
            beta: value(t.beta, Unit::PerWatt, "transfer.beta")?,
            coupling_c: self.coupling_c()?,
            field_b: value(t.field, Unit::MilliTesla, "transfer.field")?,
            power_p: value(t.power, Unit::Watt, "transfer.power")?,
            sweep_rate: value(t.sweep_rate, Unit::MHzPerMs, "transfer.sweep_rate")?,
        })
    }

    pub fn beta_mapping(&self) -> Result<BetaMapping> {
        if let Some(points) = &self.transfer.beta_by_field {
            return Ok(BetaMapping::Fitted(points.clone()));
        }
        Ok(BetaMapping::Analytic {
            detuning_khz: value(self.transfer.detuning, Unit::KHz, "transfer.detuning")?,
            coupling_c: self.coupling_c()?,
            gamma_c: self.constants.gamma_c,
        })
    }

    pub fn amplitude_law(&self) -> Result<AmplitudeLaw> {
        Ok(AmplitudeLaw {
            crossover_width: value(self.sweep.crossover_width, Unit::MHz, "sweep.crossover_width")?,
            slope: self.sweep.amplitude_slope,
        })
    }

    pub fn min_period_ms(&self) -> Result<f64> {
        value(self.sweep.min_period, Unit::Millisecond, "sweep.min_period")
    }

    pub fn r_nn_nm(&self) -> Result<f64> {
        let density = ppm_to_density(self.sample.nv_ppm, &self.constants)?;
        Ok(nearest_neighbor_distance(density)?.value)
    }

    pub fn barrier_radius_nm(&self) -> Result<f64> {
        let g = &self.geometry;
        Ok(barrier_radius(g.hyperfine_ref, g.reference_distance, self.sample.c13_linewidth)?.value)
    }

    pub fn diffusion_config(&self) -> Result<DiffusionConfig> {
        let d = &self.diffusion;
        let d_coeff = value(d.d_coeff.unwrap_or(self.geometry.d_coeff), Unit::NmSqPerSecond, "diffusion.d_coeff")?;
        let r_inner = match d.r_inner {
            Some(q) => value(q, Unit::Nanometer, "diffusion.r_inner")?,
            None => self.barrier_radius_nm()?,
        };
        let r_outer = match d.r_outer {
            Some(q) => value(q, Unit::Nanometer, "diffusion.r_outer")?,
            None => 0.5 * self.r_nn_nm()?,
        };
        let t1 = value(d.t1_nuclear, Unit::Second, "diffusion.t1_nuclear")?;
        let mut c = DiffusionConfig {
            d_coeff,
            r_inner,
            r_outer,
            t1_nuclear: (!d.no_relaxation).then_some(t1),
            source_polarization: d.source_polarization,
            grid_points: d.grid_points,
            dt: 0.0,
            t_end: value(d.t_end, Unit::Second, "diffusion.t_end")?,
            snapshot_times: d.snapshot_times.clone(),
            series_interval: value(d.series_interval, Unit::Second, "diffusion.series_interval")?,
        };
        c.dt = match d.dt {
            Some(q) => value(q, Unit::Second, "diffusion.dt")?,
            None => 0.9 * c.max_stable_dt(),
        };
        Ok(c)
    }

    pub fn fid_spec(&self) -> Result<FidSpec> {
        let s = &self.spectrum;
        let field = value(s.field, Unit::Tesla, "spectrum.field")?;
        Ok(FidSpec {
            polarization: s.polarization,
            linewidth: value(s.linewidth.unwrap_or(self.sample.c13_linewidth), Unit::KHz, "spectrum.linewidth")?,
            offset: value(s.offset, Unit::KHz, "spectrum.offset")?,
            duration: value(s.duration, Unit::Second, "spectrum.duration")?,
            dwell: value(s.dwell, Unit::Second, "spectrum.dwell")?,
            direction: s.direction,
            lineshape: s.lineshape,
            carrier_frequency: self.constants.gamma_c * field,
            field,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg: ScenarioConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.grid("power").unwrap().len(), 401);
    }

    #[test]
    fn quantities_carry_units() {
        let cfg: ScenarioConfig =
            serde_json::from_str(r#"{"transfer": {"field": {"value": 0.0094, "unit": "T"}}}"#).unwrap();
        assert!((cfg.transfer_params().unwrap().field_b - 9.4).abs() < 1e-12);
        let bad: ScenarioConfig =
            serde_json::from_str(r#"{"transfer": {"field": {"value": 9.4, "unit": "W"}}}"#).unwrap();
        let err = bad.transfer_params().unwrap_err().to_string();
        assert!(err.contains("transfer.field") && err.contains("mT") && err.contains('W'), "{err}");
    }

    #[test]
    fn unknown_axis_is_a_usage_error() {
        let cfg: ScenarioConfig = serde_json::from_str(
            r#"{"grids": {"temperature": {"min": 1, "max": 2, "points": 2, "unit": "K"}}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Usage(_))));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"sede": 1}"#).is_err());
    }

    #[test]
    fn grids_and_hash() {
        assert_eq!(grid_values(1.0, 3.0, 3, Scale::Linear), vec![1.0, 2.0, 3.0]);
        assert_eq!(grid_values(5.0, 9.0, 1, Scale::Log), vec![5.0]);
        let g = GridSpec::new(0.0094, 0.0188, 2, Scale::Linear, Unit::Tesla);
        let v = g.values_in(Unit::MilliTesla, "g").unwrap();
        assert!((v[1] - 18.8).abs() < 1e-12);
        let a = ScenarioConfig::default();
        let b = ScenarioConfig { seed: 1, ..ScenarioConfig::default() };
        assert_eq!(a.hash(), ScenarioConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn derived_geometry_defaults() {
        let c = ScenarioConfig::default().diffusion_config().unwrap();
        assert!((c.r_inner - 4.31).abs() < 0.01);
        assert!((c.r_outer - 8.27).abs() < 0.02);
        c.validate().unwrap();
    }
}
