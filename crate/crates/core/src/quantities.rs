//! Unit-tagged scalars, physical constants, the sample description and the
//! NV-ensemble geometry chain (density, nearest-neighbour spacing, diffusion
//! barrier radius, diffusion length).
//!
//! Internal working units: lengths in nm, frequencies in MHz (kHz for
//! nuclear linewidths and couplings), fields in mT, times in s.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit tags understood by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "GHz")]
    GHz,
    #[serde(rename = "MHz")]
    MHz,
    #[serde(rename = "kHz")]
    KHz,
    #[serde(rename = "T")]
    Tesla,
    #[serde(rename = "mT")]
    MilliTesla,
    #[serde(rename = "W")]
    Watt,
    #[serde(rename = "1/W")]
    PerWatt,
    #[serde(rename = "MHz^2/W")]
    MHzSqPerWatt,
    #[serde(rename = "MHz/ms")]
    MHzPerMs,
    #[serde(rename = "nm")]
    Nanometer,
    #[serde(rename = "cm")]
    Centimeter,
    #[serde(rename = "nm^2/s")]
    NmSqPerSecond,
    #[serde(rename = "cm^-3")]
    PerCubicCm,
    #[serde(rename = "s")]
    Second,
    #[serde(rename = "ms")]
    Millisecond,
    #[serde(rename = "min")]
    Minute,
    #[serde(rename = "K")]
    Kelvin,
    #[serde(rename = "dimensionless")]
    Dimensionless,
}

/// Physical dimension of a unit; conversions are only defined within one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Frequency,
    Field,
    Power,
    InversePower,
    Coupling,
    SweepRate,
    Length,
    Diffusivity,
    NumberDensity,
    Time,
    Temperature,
    Pure,
}

impl Unit {
    const ALL: [Unit; 18] = [
        Unit::GHz,
        Unit::MHz,
        Unit::KHz,
        Unit::Tesla,
        Unit::MilliTesla,
        Unit::Watt,
        Unit::PerWatt,
        Unit::MHzSqPerWatt,
        Unit::MHzPerMs,
        Unit::Nanometer,
        Unit::Centimeter,
        Unit::NmSqPerSecond,
        Unit::PerCubicCm,
        Unit::Second,
        Unit::Millisecond,
        Unit::Minute,
        Unit::Kelvin,
        Unit::Dimensionless,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::GHz => "GHz",
            Unit::MHz => "MHz",
            Unit::KHz => "kHz",
            Unit::Tesla => "T",
            Unit::MilliTesla => "mT",
            Unit::Watt => "W",
            Unit::PerWatt => "1/W",
            Unit::MHzSqPerWatt => "MHz^2/W",
            Unit::MHzPerMs => "MHz/ms",
            Unit::Nanometer => "nm",
            Unit::Centimeter => "cm",
            Unit::NmSqPerSecond => "nm^2/s",
            Unit::PerCubicCm => "cm^-3",
            Unit::Second => "s",
            Unit::Millisecond => "ms",
            Unit::Minute => "min",
            Unit::Kelvin => "K",
            Unit::Dimensionless => "dimensionless",
        }
    }

    fn dimension(self) -> Dimension {
        match self {
            Unit::GHz | Unit::MHz | Unit::KHz => Dimension::Frequency,
            Unit::Tesla | Unit::MilliTesla => Dimension::Field,
            Unit::Watt => Dimension::Power,
            Unit::PerWatt => Dimension::InversePower,
            Unit::MHzSqPerWatt => Dimension::Coupling,
            Unit::MHzPerMs => Dimension::SweepRate,
            Unit::Nanometer | Unit::Centimeter => Dimension::Length,
            Unit::NmSqPerSecond => Dimension::Diffusivity,
            Unit::PerCubicCm => Dimension::NumberDensity,
            Unit::Second | Unit::Millisecond | Unit::Minute => Dimension::Time,
            Unit::Kelvin => Dimension::Temperature,
            Unit::Dimensionless => Dimension::Pure,
        }
    }

    /// Multiplier to the base unit of the dimension, expressed as an exact
    /// `numerator / denominator` pair so conversions stay exact in f64 where
    /// the ratio allows it.
    fn ratio_to_base(self) -> (f64, f64) {
        match self {
            Unit::GHz => (1000.0, 1.0),
            Unit::MHz => (1.0, 1.0),
            Unit::KHz => (1.0, 1000.0),
            Unit::Tesla => (1000.0, 1.0),
            Unit::MilliTesla => (1.0, 1.0),
            Unit::Nanometer => (1.0, 1.0),
            Unit::Centimeter => (1.0e7, 1.0),
            Unit::Second => (1.0, 1.0),
            Unit::Millisecond => (1.0, 1000.0),
            Unit::Minute => (60.0, 1.0),
            _ => (1.0, 1.0),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Unit::ALL
            .iter()
            .copied()
            .find(|u| u.symbol() == s)
            .or(match s {
                "" | "1" => Some(Unit::Dimensionless),
                "MHz²/W" => Some(Unit::MHzSqPerWatt),
                "nm²/s" => Some(Unit::NmSqPerSecond),
                "cm⁻³" => Some(Unit::PerCubicCm),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown unit '{s}'")))
    }
}

/// A real value carrying its unit tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub const fn new(value: f64, unit: Unit) -> Self {
        Quantity { value, unit }
    }

    pub fn mhz(v: f64) -> Self {
        Self::new(v, Unit::MHz)
    }
    pub fn khz(v: f64) -> Self {
        Self::new(v, Unit::KHz)
    }
    pub fn mt(v: f64) -> Self {
        Self::new(v, Unit::MilliTesla)
    }
    pub fn tesla(v: f64) -> Self {
        Self::new(v, Unit::Tesla)
    }
    pub fn watt(v: f64) -> Self {
        Self::new(v, Unit::Watt)
    }
    pub fn nm(v: f64) -> Self {
        Self::new(v, Unit::Nanometer)
    }
    pub fn seconds(v: f64) -> Self {
        Self::new(v, Unit::Second)
    }
    pub fn minutes(v: f64) -> Self {
        Self::new(v, Unit::Minute)
    }

    /// Converts to `target`; only units of the same dimension convert.
    pub fn to(self, target: Unit) -> Result<Quantity> {
        if self.unit == target {
            return Ok(self);
        }
        if self.unit.dimension() != target.dimension() {
            return Err(Error::UnitMismatch {
                expected: target,
                found: self.unit,
            });
        }
        let (fnum, fden) = self.unit.ratio_to_base();
        let (tnum, tden) = target.ratio_to_base();
        // value · (fnum/fden) / (tnum/tden), ordered to keep exact ratios exact
        let value = self.value * (fnum * tden) / (fden * tnum);
        Ok(Quantity::new(value, target))
    }

    /// Value in `unit`, converting when the dimension matches.
    pub fn value_in(self, unit: Unit) -> Result<f64> {
        self.to(unit).map(|q| q.value)
    }

    /// Requires the exact unit tag, without conversion.
    pub fn expect(self, unit: Unit) -> Result<f64> {
        if self.unit == unit {
            Ok(self.value)
        } else {
            Err(Error::UnitMismatch {
                expected: unit,
                found: self.unit,
            })
        }
    }

    pub fn try_add(self, other: Quantity) -> Result<Quantity> {
        let v = other.expect(self.unit)?;
        Ok(Quantity::new(self.value + v, self.unit))
    }

    pub fn try_sub(self, other: Quantity) -> Result<Quantity> {
        let v = other.expect(self.unit)?;
        Ok(Quantity::new(self.value - v, self.unit))
    }

    pub fn scale(self, k: f64) -> Quantity {
        Quantity::new(self.value * k, self.unit)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// Fixed physical constants: CODATA values and standard diamond data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// ¹³C gyromagnetic ratio, MHz/T.
    pub gamma_c: f64,
    /// Electron gyromagnetic ratio, MHz/T.
    pub gamma_e: f64,
    /// J·s
    pub planck: f64,
    /// J/K
    pub boltzmann: f64,
    /// Carbon atoms per cm³ in diamond.
    pub diamond_atom_density: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            gamma_c: 10.7084,
            gamma_e: 28024.95,
            planck: 6.62607e-34,
            boltzmann: 1.380649e-23,
            diamond_atom_density: 1.76e23,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_c", self.gamma_c),
            ("gamma_e", self.gamma_e),
            ("planck", self.planck),
            ("boltzmann", self.boltzmann),
            ("diamond_atom_density", self.diamond_atom_density),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("constant {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Description of the diamond sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSpec {
    pub nv_ppm: f64,
    pub n_ppm: f64,
    /// ¹³C natural abundance as a fraction.
    pub c13_abundance: f64,
    pub c13_linewidth: Quantity,
    pub odmr_width: Quantity,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            nv_ppm: 0.3,
            n_ppm: 0.2,
            c13_abundance: 0.011,
            c13_linewidth: Quantity::khz(1.0),
            odmr_width: Quantity::mhz(6.0),
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.nv_ppm >= 0.0 && self.n_ppm >= 0.0) {
            return Err(Error::Config("ppm concentrations must be >= 0".into()));
        }
        if !(self.c13_abundance > 0.0 && self.c13_abundance < 1.0) {
            return Err(Error::Config(format!(
                "c13_abundance must lie in (0, 1), got {}",
                self.c13_abundance
            )));
        }
        if self.c13_linewidth.value_in(Unit::KHz)? <= 0.0 {
            return Err(Error::Config("c13_linewidth must be > 0".into()));
        }
        if self.odmr_width.value_in(Unit::MHz)? <= 0.0 {
            return Err(Error::Config("odmr_width must be > 0".into()));
        }
        Ok(())
    }

    pub fn odmr_width_mhz(&self) -> f64 {
        self.odmr_width.value_in(Unit::MHz).unwrap_or(f64::NAN)
    }
}

/// Number density of a defect present at `ppm` parts per million of lattice sites.
pub fn ppm_to_density(ppm: f64, constants: &PhysicalConstants) -> Result<Quantity> {
    if !(ppm >= 0.0) {
        return Err(Error::domain(format!("ppm must be >= 0, got {ppm}")));
    }
    Ok(Quantity::new(
        ppm * 1e-6 * constants.diamond_atom_density,
        Unit::PerCubicCm,
    ))
}

/// Mean nearest-neighbour distance 0.62·n^(−1/3) for randomly placed defects.
pub fn nearest_neighbor_distance(density: Quantity) -> Result<Quantity> {
    let n = density.expect(Unit::PerCubicCm)?;
    if !(n > 0.0) {
        return Err(Error::domain(format!("number density must be > 0, got {n}")));
    }
    let cm = Quantity::new(0.62 * n.powf(-1.0 / 3.0), Unit::Centimeter);
    cm.to(Unit::Nanometer)
}

/// Radius at which a 1/r³ hyperfine coupling, known to be `a_ref` at
/// distance `r_ref`, drops to the nuclear linewidth. The crossover is
/// treated as a sharp threshold.
pub fn barrier_radius(a_ref: Quantity, r_ref: Quantity, linewidth: Quantity) -> Result<Quantity> {
    let a = a_ref.value_in(Unit::KHz)?;
    let lw = linewidth.value_in(Unit::KHz)?;
    let r = r_ref.value_in(Unit::Nanometer)?;
    if !(a > 0.0 && lw > 0.0 && r > 0.0) {
        return Err(Error::domain(
            "barrier_radius inputs must all be > 0".to_string(),
        ));
    }
    Ok(Quantity::nm(r * (a / lw).cbrt()))
}

/// Root-mean diffusion length √(D·t).
pub fn diffusion_length(d_coeff: Quantity, t_pol: Quantity) -> Result<Quantity> {
    let d = d_coeff.expect(Unit::NmSqPerSecond)?;
    let t = t_pol.value_in(Unit::Second)?;
    if !(d >= 0.0 && t >= 0.0) {
        return Err(Error::domain(format!(
            "diffusion_length needs D >= 0 and t >= 0, got D = {d}, t = {t}"
        )));
    }
    Ok(Quantity::nm((d * t).sqrt()))
}
