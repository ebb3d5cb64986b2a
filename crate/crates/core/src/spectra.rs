//! FID synthesis, Fourier transform and the thermal-polarization reference.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::{PhysicalConstants, Quantity, Unit};
use crate::sweep::SweepDirection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lineshape {
    /// Exponential decay, rate π·linewidth.
    #[default]
    Lorentzian,
    /// exp(−a·t²) with a = (π·linewidth)²/(4 ln 2), same FWHM.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidSpec {
    pub polarization: f64,
    /// kHz
    pub linewidth: f64,
    /// Offset from the carrier, kHz.
    pub offset: f64,
    /// s
    pub duration: f64,
    /// s
    pub dwell: f64,
    pub direction: SweepDirection,
    #[serde(default)]
    pub lineshape: Lineshape,
    /// MHz
    pub carrier_frequency: f64,
    /// T
    pub field: f64,
}

impl Default for FidSpec {
    fn default() -> Self {
        FidSpec {
            polarization: 0.05,
            linewidth: 1.0,
            offset: 0.0,
            duration: 0.05,
            dwell: 2e-6,
            direction: SweepDirection::Up,
            lineshape: Lineshape::Lorentzian,
            carrier_frequency: 10.7084 * 6.0,
            field: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidSignal {
    /// Zero-padded to a power of two.
    pub samples: Vec<Complex64>,
    /// s
    pub dwell_time: f64,
    /// MHz
    pub carrier_frequency: f64,
    /// T
    pub field: f64,
}

impl FidSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|i| i as f64 * self.dwell_time)
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Exponentially decaying complex tone A·exp((i2πf − π·lw)·t), negated for a
/// down sweep. The record is zero-padded to the next power of two.
pub fn synthesize_fid(spec: &FidSpec) -> Result<FidSignal> {
    if !(spec.linewidth > 0.0) {
        return Err(Error::domain(format!("linewidth must be > 0, got {}", spec.linewidth)));
    }
    if !(spec.duration > 0.0) {
        return Err(Error::domain(format!("duration must be > 0, got {}", spec.duration)));
    }
    if !(spec.dwell > 0.0) || spec.dwell > spec.duration {
        return Err(Error::domain(format!("dwell must be in (0, duration], got {}", spec.dwell)));
    }
    if !spec.polarization.is_finite() || !spec.offset.is_finite() {
        return Err(Error::domain("polarization and offset must be finite"));
    }
    let n = (spec.duration / spec.dwell).round().max(1.0) as usize;
    let amp = spec.polarization * spec.direction.sign();
    let lw_hz = spec.linewidth * 1e3;
    let omega = 2.0 * PI * spec.offset * 1e3;
    let gauss = (PI * lw_hz).powi(2) / (4.0 * std::f64::consts::LN_2);
    let mut samples: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = i as f64 * spec.dwell;
            let envelope = match spec.lineshape {
                Lineshape::Lorentzian => (-PI * lw_hz * t).exp(),
                Lineshape::Gaussian => (-gauss * t * t).exp(),
            };
            Complex64::from_polar(amp * envelope, omega * t)
        })
        .collect();
    samples.resize(n.next_power_of_two(), Complex64::new(0.0, 0.0));
    Ok(FidSignal {
        samples,
        dwell_time: spec.dwell,
        carrier_frequency: spec.carrier_frequency,
        field: spec.field,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Offsets from the carrier in kHz, ascending and uniform.
    pub frequency: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Unnormalized forward DFT, reordered so the frequency axis ascends from
/// −1/(2·dwell). With this scaling Σ|x|² = Σ|X|²/N.
pub fn transform(fid: &FidSignal) -> Spectrum {
    let n = fid.samples.len();
    let mut buf = fid.samples.clone();
    if n > 0 {
        FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    }
    let half = n / 2;
    buf.rotate_left(n - half);
    let df = 1.0 / (n as f64 * fid.dwell_time) * 1e-3;
    Spectrum {
        frequency: (0..n).map(|k| (k as f64 - half as f64) * df).collect(),
        re: buf.iter().map(|z| z.re).collect(),
        im: buf.iter().map(|z| z.im).collect(),
    }
}

/// |Σ|x|² − Σ|X|²/N| relative to Σ|x|² (absolute when the signal is zero).
pub fn parseval_error(fid: &FidSignal, spectrum: &Spectrum) -> f64 {
    let e_time = fid.energy();
    let e_freq = spectrum.re.iter().zip(&spectrum.im).map(|(a, b)| a * a + b * b).sum::<f64>()
        / spectrum.len().max(1) as f64;
    let diff = (e_time - e_freq).abs();
    if e_time > 0.0 {
        diff / e_time
    } else {
        diff
    }
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequency.is_empty()
    }

    /// kHz
    pub fn bin_width(&self) -> f64 {
        if self.len() < 2 {
            0.0
        } else {
            self.frequency[1] - self.frequency[0]
        }
    }

    /// Index of the largest |real part|.
    pub fn peak_index(&self) -> Option<usize> {
        self.re
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
    }

    /// Full width at half maximum of the real part around its largest-magnitude
    /// point, with linear interpolation of both half-height crossings. kHz.
    pub fn fwhm(&self) -> Option<f64> {
        let k = self.peak_index()?;
        let sign = self.re[k].signum();
        let peak = self.re[k] * sign;
        if peak <= 0.0 {
            return None;
        }
        let half = 0.5 * peak;
        let v = |i: usize| self.re[i] * sign;
        let mut lo = k;
        while lo > 0 && v(lo - 1) > half {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < self.len() && v(hi + 1) > half {
            hi += 1;
        }
        if lo == 0 || hi + 1 == self.len() {
            return None;
        }
        let cross = |a: usize, b: usize| {
            let f = (half - v(a)) / (v(b) - v(a));
            self.frequency[a] + f * (self.frequency[b] - self.frequency[a])
        };
        Some(cross(hi, hi + 1) - cross(lo, lo - 1))
    }

    /// Trapezoid integral of the real part over the grid segments touching
    /// [lo, hi] kHz.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        let (first, last) = match (self.frequency.first(), self.frequency.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(Error::domain("empty spectrum")),
        };
        if !(lo < hi && lo >= first && hi <= last) {
            return Err(Error::domain(format!(
                "integral window [{lo}, {hi}] kHz outside axis [{first}, {last}]"
            )));
        }
        let mut s = 0.0;
        for i in 1..self.len() {
            let (f0, f1) = (self.frequency[i - 1], self.frequency[i]);
            if f1 < lo || f0 > hi {
                continue;
            }
            s += 0.5 * (f1 - f0) * (self.re[i - 1] + self.re[i]);
        }
        Ok(s)
    }

    /// Integral over the whole axis.
    pub fn total_integral(&self) -> f64 {
        match (self.frequency.first(), self.frequency.last()) {
            (Some(a), Some(b)) if a < b => self.integral(*a, *b).unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

/// Two-level Boltzmann polarization tanh(h·γ_C·B / 2kT) of ¹³C.
pub fn thermal_polarization(field: Quantity, temperature_k: f64, constants: &PhysicalConstants) -> Result<f64> {
    let b = field.value_in(Unit::Tesla)?;
    if !(b > 0.0) {
        return Err(Error::domain(format!("field must be > 0, got {field}")));
    }
    if !(temperature_k > 0.0) {
        return Err(Error::domain(format!("temperature must be > 0 K, got {temperature_k}")));
    }
    let energy = constants.planck * constants.gamma_c * 1e6 * b;
    Ok((energy / (2.0 * constants.boltzmann * temperature_k)).tanh())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnhancementReport {
    pub hyper_polarization: f64,
    /// T
    pub polarizing_field: f64,
    /// T
    pub readout_field: f64,
    /// K
    pub temperature: f64,
    pub thermal_at_polarizing_field: f64,
    pub thermal_at_readout_field: f64,
    pub enhancement_vs_polarizing_field: f64,
    pub integral_ratio_at_readout: f64,
}

pub fn enhancement_report(
    hyper_polarization: f64,
    polarizing_field: Quantity,
    readout_field: Quantity,
    temperature_k: f64,
    constants: &PhysicalConstants,
) -> Result<EnhancementReport> {
    if !(hyper_polarization > 0.0 && hyper_polarization <= 1.0) {
        return Err(Error::domain(format!(
            "hyperpolarization must be in (0, 1], got {hyper_polarization}"
        )));
    }
    let tp = thermal_polarization(polarizing_field, temperature_k, constants)?;
    let tr = thermal_polarization(readout_field, temperature_k, constants)?;
    Ok(EnhancementReport {
        hyper_polarization,
        polarizing_field: polarizing_field.value_in(Unit::Tesla)?,
        readout_field: readout_field.value_in(Unit::Tesla)?,
        temperature: temperature_k,
        thermal_at_polarizing_field: tp,
        thermal_at_readout_field: tr,
        enhancement_vs_polarizing_field: hyper_polarization / tp,
        integral_ratio_at_readout: hyper_polarization / tr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn signal(samples: Vec<Complex64>, dwell: f64) -> FidSignal {
        FidSignal { samples, dwell_time: dwell, carrier_frequency: 0.0, field: 6.0 }
    }

    #[test]
    fn zero_polarization_gives_zero_fid_and_spectrum() {
        let fid = synthesize_fid(&FidSpec { polarization: 0.0, ..FidSpec::default() }).unwrap();
        assert!(fid.samples.iter().all(|z| z.norm() == 0.0));
        let s = transform(&fid);
        assert!(s.re.iter().chain(&s.im).all(|v| *v == 0.0));
        assert_eq!(parseval_error(&fid, &s), 0.0);
    }

    #[test]
    fn padded_to_power_of_two() {
        let fid = synthesize_fid(&FidSpec { duration: 0.001, dwell: 1e-5, ..FidSpec::default() }).unwrap();
        assert_eq!(fid.len(), 128);
        assert_eq!(fid.samples[100], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn decay_constant_is_inverse_pi_linewidth() {
        let spec = FidSpec { dwell: 1e-6, duration: 0.002, ..FidSpec::default() };
        let fid = synthesize_fid(&spec).unwrap();
        let tau = 1.0 / (PI * 1000.0);
        assert!((tau - 318.3e-6).abs() < 0.1e-6);
        let i = 318;
        let expect = 0.05 * (-(i as f64) * 1e-6 / tau).exp();
        assert!((fid.samples[i].norm() - expect).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs_are_domain_errors() {
        for spec in [
            FidSpec { duration: 0.0, ..FidSpec::default() },
            FidSpec { linewidth: 0.0, ..FidSpec::default() },
            FidSpec { dwell: -1.0, ..FidSpec::default() },
        ] {
            assert!(matches!(synthesize_fid(&spec), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn down_sweep_negates_trace() {
        let up = synthesize_fid(&FidSpec::default()).unwrap();
        let down = synthesize_fid(&FidSpec { direction: SweepDirection::Down, ..FidSpec::default() }).unwrap();
        assert!(up.samples.iter().zip(&down.samples).all(|(a, b)| *a == -*b));
        let (su, sd) = (transform(&up), transform(&down));
        let k = su.peak_index().unwrap();
        assert!(su.re[k] > 0.0 && sd.re[k] < 0.0);
    }

    #[test]
    fn tone_lands_in_its_bin() {
        let n = 256;
        let dwell = 1e-5;
        let df_khz = 1.0 / (n as f64 * dwell) * 1e-3;
        let f = 12.0 * df_khz;
        let x = (0..n).map(|i| Complex64::from_polar(1.0, 2.0 * PI * f * 1e3 * i as f64 * dwell)).collect();
        let s = transform(&signal(x, dwell));
        let k = s.peak_index().unwrap();
        assert!((s.frequency[k] - f).abs() < 1e-9);
        assert!((s.re[k] - n as f64).abs() < 1e-9);
    }

    #[test]
    fn lorentzian_fwhm_is_the_linewidth() {
        let fid = synthesize_fid(&FidSpec::default()).unwrap();
        let s = transform(&fid);
        let w = s.fwhm().unwrap();
        assert!((w - 1.0).abs() <= s.bin_width(), "fwhm {w}, bin {}", s.bin_width());
        assert!(parseval_error(&fid, &s) < 1e-9);
    }

    #[test]
    fn gaussian_fwhm_is_the_linewidth() {
        let fid = synthesize_fid(&FidSpec { lineshape: Lineshape::Gaussian, ..FidSpec::default() }).unwrap();
        let s = transform(&fid);
        let w = s.fwhm().unwrap();
        assert!((w - 1.0).abs() <= s.bin_width(), "fwhm {w}");
    }

    #[test]
    fn offset_moves_peak() {
        let fid = synthesize_fid(&FidSpec { offset: 20.0, ..FidSpec::default() }).unwrap();
        let s = transform(&fid);
        let k = s.peak_index().unwrap();
        assert!((s.frequency[k] - 20.0).abs() <= s.bin_width());
    }

    #[test]
    fn integral_scales_with_polarization() {
        let a = transform(&synthesize_fid(&FidSpec::default()).unwrap()).total_integral();
        let b = transform(&synthesize_fid(&FidSpec { polarization: 0.1, ..FidSpec::default() }).unwrap())
            .total_integral();
        assert!((b / a - 2.0).abs() < 1e-12);
        let s = transform(&synthesize_fid(&FidSpec::default()).unwrap());
        assert!(s.integral(-1e6, 0.0).is_err());
    }

    #[test]
    fn golden_four_point_transform() {
        let x = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, -1.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(-4.0, 0.5),
        ];
        let s = transform(&signal(x, 0.25e-3));
        // Ordered −2, −1, 0, +1 kHz after the shift.
        assert_eq!(s.frequency, vec![-2.0, -1.0, 0.0, 1.0]);
        assert_eq!(s.re, vec![3.0, 2.5, -1.0, -0.5]);
        assert_eq!(s.im, vec![3.5, 3.0, 2.5, -9.0]);
    }

    #[test]
    fn matches_direct_dft() {
        let fid = synthesize_fid(&FidSpec { duration: 1e-3, dwell: 1e-5, offset: 7.3, ..FidSpec::default() }).unwrap();
        let fast = transform(&fid);
        let mut direct = naive_dft(&fid.samples);
        direct.rotate_left(fid.len() / 2);
        let scale = direct.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (k, z) in direct.iter().enumerate() {
            assert!((z.re - fast.re[k]).abs() < 1e-9 * scale);
            assert!((z.im - fast.im[k]).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn thermal_values() {
        let c = PhysicalConstants::default();
        let p6 = thermal_polarization(Quantity::tesla(6.0), 300.0, &c).unwrap();
        assert!((p6 / 5.139e-6 - 1.0).abs() < 1e-3, "{p6}");
        let pl = thermal_polarization(Quantity::mt(9.4), 300.0, &c).unwrap();
        assert!((pl / 8.05e-9 - 1.0).abs() < 1e-3, "{pl}");
        let hot = thermal_polarization(Quantity::tesla(6.0), 1e30, &c).unwrap();
        assert!(hot < 1e-30);
        assert!(thermal_polarization(Quantity::tesla(0.0), 300.0, &c).is_err());
        assert!(thermal_polarization(Quantity::mhz(1.0), 300.0, &c).is_err());
    }

    #[test]
    fn enhancement_values() {
        let c = PhysicalConstants::default();
        let r = enhancement_report(0.05, Quantity::mt(9.4), Quantity::tesla(6.0), 300.0, &c).unwrap();
        assert!((r.enhancement_vs_polarizing_field / 6.21e6 - 1.0).abs() < 0.01);
        assert!((r.integral_ratio_at_readout / 9.73e3 - 1.0).abs() < 0.01);
        let t = thermal_polarization(Quantity::tesla(6.0), 300.0, &c).unwrap();
        let unity = enhancement_report(t, Quantity::tesla(6.0), Quantity::tesla(6.0), 300.0, &c).unwrap();
        assert!((unity.enhancement_vs_polarizing_field - 1.0).abs() < 1e-12);
        assert!(enhancement_report(0.0, Quantity::mt(9.4), Quantity::tesla(6.0), 300.0, &c).is_err());
    }

    proptest! {
        #[test]
        fn transform_is_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, f1 in -50.0f64..50.0, f2 in -50.0f64..50.0) {
            let mk = |p: f64, f: f64| synthesize_fid(&FidSpec { polarization: p, offset: f, duration: 2e-3, dwell: 1e-5, ..FidSpec::default() }).unwrap();
            let (x, y) = (mk(a, f1), mk(b, f2));
            let sum = signal(x.samples.iter().zip(&y.samples).map(|(p, q)| p + q).collect(), 1e-5);
            let (sx, sy, ss) = (transform(&x), transform(&y), transform(&sum));
            let scale = ss.re.iter().chain(&sx.re).chain(&sy.re).fold(1e-300f64, |m, v| m.max(v.abs()));
            for k in 0..ss.len() {
                prop_assert!((ss.re[k] - sx.re[k] - sy.re[k]).abs() <= 1e-9 * scale);
                prop_assert!((ss.im[k] - sx.im[k] - sy.im[k]).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn parseval_holds(p in 0.001f64..1.0, lw in 0.2f64..5.0, f in -100.0f64..100.0) {
            let fid = synthesize_fid(&FidSpec { polarization: p, linewidth: lw, offset: f, duration: 5e-3, dwell: 2e-6, ..FidSpec::default() }).unwrap();
            prop_assert!(parseval_error(&fid, &transform(&fid)) < 1e-9);
        }

        #[test]
        fn thermal_monotone_and_linear(b in 0.01f64..10.0, t in 1.0f64..1000.0) {
            let c = PhysicalConstants::default();
            let p = |b: f64, t: f64| thermal_polarization(Quantity::tesla(b), t, &c).unwrap();
            prop_assert!(p(b * 1.01, t) > p(b, t));
            prop_assert!(p(b, t * 1.01) < p(b, t));
            let lin = c.planck * c.gamma_c * 1e6 * b / (2.0 * c.boltzmann * 300.0);
            prop_assert!((p(b, 300.0) / lin - 1.0).abs() < 1e-4);
        }
    }
}
