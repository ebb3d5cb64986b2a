//! Sweep-rate response ε ∝ Δ̇^c·(1 − exp(−b/Δ̇)), its two-component
//! decomposition and the sweep-width rules.
//!
//! The single-component response is strictly increasing for c ≥ 1, so it has
//! no interior peak. Each component is therefore confined to a rate band
//! (cosine-tapered in log-rate to zero at the band edges) and normalized so
//! that its value at the band's centre rate equals its amplitude. The
//! "peak intensity" of a component is that amplitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, Bounds, ExperimentRecord, FitResult};
use crate::quantities::{SampleSpec, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    /// Low to high frequency.
    Up,
    /// High to low frequency.
    Down,
}

impl SweepDirection {
    /// Sign of the resulting nuclear polarization.
    pub fn sign(self) -> f64 {
        match self {
            SweepDirection::Up => 1.0,
            SweepDirection::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    /// MHz
    pub width: f64,
    /// MHz/ms
    pub rate: f64,
    /// GHz
    pub center: f64,
    pub direction: SweepDirection,
}

impl SweepParams {
    /// Checks positivity and that the sweep stays inside the `[lo, hi]` GHz band.
    pub fn validate(&self, mw_band_ghz: (f64, f64)) -> Result<()> {
        if !(self.width > 0.0 && self.rate > 0.0) {
            return Err(Error::Config("sweep width and rate must be > 0".into()));
        }
        let half = 0.5 * self.width * 1e-3;
        if self.center - half < mw_band_ghz.0 || self.center + half > mw_band_ghz.1 {
            return Err(Error::Config(format!(
                "sweep {:.4}–{:.4} GHz leaves the MW band [{}, {}] GHz",
                self.center - half,
                self.center + half,
                mw_band_ghz.0,
                mw_band_ghz.1
            )));
        }
        Ok(())
    }

    /// Duration of one sweep, ms.
    pub fn period_ms(&self) -> f64 {
        self.width / self.rate
    }
}

/// Single-component response Δ̇^c·(1 − exp(−b/Δ̇)).
pub fn sweep_rate_response(rate: f64, exponent_c: f64, b: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::domain(format!("sweep rate must be > 0, got {rate}")));
    }
    if !(exponent_c > 0.0 && b > 0.0) {
        return Err(Error::domain("exponent c and b must be > 0"));
    }
    Ok(response_unchecked(rate, exponent_c, b))
}

#[inline]
fn response_unchecked(rate: f64, c: f64, b: f64) -> f64 {
    rate.powf(c) * -(-b / rate).exp_m1()
}

/// A rate band with a raised-cosine taper in log-rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBand {
    pub lo: f64,
    pub hi: f64,
}

impl RateBand {
    pub fn new(lo: f64, hi: f64) -> Self {
        RateBand { lo, hi }
    }

    /// Window value: 0 outside the band, 1 on the flat top, cosine ramps
    /// over the outer `taper` fraction (per side) of the log-width.
    pub fn window(&self, rate: f64, taper: f64) -> f64 {
        if !(rate > self.lo && rate < self.hi) {
            return 0.0;
        }
        let (l0, l1, lr) = (self.lo.ln(), self.hi.ln(), rate.ln());
        let ramp = taper * (l1 - l0);
        if ramp <= 0.0 {
            return 1.0;
        }
        let d = (lr - l0).min(l1 - lr);
        if d >= ramp {
            1.0
        } else {
            0.5 * (1.0 - (std::f64::consts::PI * d / ramp).cos())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepResponseParams {
    pub exponent_c: f64,
    /// Separate exponent for the high-rate component; `None` shares `exponent_c`.
    #[serde(default)]
    pub exponent_c_high: Option<f64>,
    /// MHz/ms
    pub b_low: f64,
    /// MHz/ms
    pub b_high: f64,
    pub amp_low: f64,
    pub amp_high: f64,
    /// Centre of the low-rate component, MHz/ms.
    pub rate_low: f64,
    /// Centre of the high-rate component, MHz/ms.
    pub rate_high: f64,
    pub band_low: RateBand,
    pub band_high: RateBand,
    /// Taper fraction of each band's log-width, per side.
    pub taper: f64,
}

impl Default for SweepResponseParams {
    fn default() -> Self {
        SweepResponseParams {
            exponent_c: 1.6,
            exponent_c_high: None,
            b_low: 1.5,
            b_high: 15.0,
            amp_low: 1.0,
            amp_high: 1.0,
            rate_low: 1.5,
            rate_high: 15.0,
            band_low: RateBand::new(0.1, 5.0),
            band_high: RateBand::new(5.0, 50.0),
            taper: 0.25,
        }
    }
}

impl SweepResponseParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.exponent_c, self.b_low, self.b_high, self.rate_low, self.rate_high]
            .iter()
            .all(|v| *v > 0.0)
            && self.exponent_c_high.is_none_or(|c| c > 0.0);
        if !positive {
            return Err(Error::Config("sweep response parameters must be > 0".into()));
        }
        if !(self.amp_low >= 0.0 && self.amp_high >= 0.0) {
            return Err(Error::Config("component amplitudes must be >= 0".into()));
        }
        if !(self.rate_low < self.rate_high) {
            return Err(Error::Config("rate_low must be below rate_high".into()));
        }
        if !(0.0..0.5).contains(&self.taper) {
            return Err(Error::Config("taper fraction must lie in [0, 0.5)".into()));
        }
        for (band, centre) in [(self.band_low, self.rate_low), (self.band_high, self.rate_high)] {
            if !(band.lo > 0.0 && band.lo < band.hi) {
                return Err(Error::Config(format!("invalid rate band {band:?}")));
            }
            if band.window(centre, self.taper) < 1.0 {
                return Err(Error::Config(format!(
                    "centre rate {centre} MHz/ms is not on the flat top of band [{}, {}]",
                    band.lo, band.hi
                )));
            }
        }
        Ok(())
    }

    pub fn exponent_high(&self) -> f64 {
        self.exponent_c_high.unwrap_or(self.exponent_c)
    }

    /// Rate domain covered by the two bands.
    pub fn domain(&self) -> (f64, f64) {
        (self.band_low.lo.min(self.band_high.lo), self.band_low.hi.max(self.band_high.hi))
    }

    pub fn low_component(&self, rate: f64) -> f64 {
        component(rate, self.amp_low, self.exponent_c, self.b_low, self.rate_low, self.band_low, self.taper)
    }

    pub fn high_component(&self, rate: f64) -> f64 {
        component(
            rate,
            self.amp_high,
            self.exponent_high(),
            self.b_high,
            self.rate_high,
            self.band_high,
            self.taper,
        )
    }

    /// Free-parameter vector used by the fitter:
    /// `[c, b_low, b_high, amp_low, amp_high]`, with `c_high` appended when
    /// per-component exponents are enabled.
    pub fn free_vector(&self) -> Vec<f64> {
        let mut v = vec![self.exponent_c, self.b_low, self.b_high, self.amp_low, self.amp_high];
        if let Some(ch) = self.exponent_c_high {
            v.push(ch);
        }
        v
    }

    pub fn with_free_vector(&self, v: &[f64]) -> Self {
        let mut p = *self;
        p.exponent_c = v[0];
        p.b_low = v[1];
        p.b_high = v[2];
        p.amp_low = v[3];
        p.amp_high = v[4];
        if p.exponent_c_high.is_some() {
            p.exponent_c_high = Some(v[5]);
        }
        p
    }

    /// Box constraints for the free vector; exponents in [1.0, 2.5].
    pub fn free_bounds(&self) -> Bounds {
        let mut lower = vec![1.0, 1e-3, 1e-3, 0.0, 0.0];
        let mut upper = vec![2.5, 1e3, 1e3, f64::INFINITY, f64::INFINITY];
        if self.exponent_c_high.is_some() {
            lower.push(1.0);
            upper.push(2.5);
        }
        Bounds { lower, upper }
    }
}

fn component(rate: f64, amp: f64, c: f64, b: f64, centre: f64, band: RateBand, taper: f64) -> f64 {
    let w = band.window(rate, taper);
    if w == 0.0 || amp == 0.0 {
        return 0.0;
    }
    amp * w * response_unchecked(rate, c, b) / response_unchecked(centre, c, b)
}

/// Sum of the two band-limited components at `rate`.
pub fn two_component_response(rate: f64, params: &SweepResponseParams, domain: (f64, f64)) -> Result<f64> {
    if !(rate >= domain.0 && rate <= domain.1) {
        return Err(Error::domain(format!(
            "rate {rate} MHz/ms outside domain [{}, {}]",
            domain.0, domain.1
        )));
    }
    if !(rate > 0.0) {
        return Err(Error::domain("rate must be > 0"));
    }
    Ok(params.low_component(rate) + params.high_component(rate))
}

/// Model closure over the free vector, for the fitter.
pub fn two_component_model(template: SweepResponseParams) -> impl Fn(f64, &[f64]) -> f64 + Sync {
    move |rate: f64, v: &[f64]| {
        let p = template.with_free_vector(v);
        p.low_component(rate) + p.high_component(rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFit {
    pub params: SweepResponseParams,
    /// Component values at their centre rates.
    pub peak_low: f64,
    pub peak_high: f64,
    pub fit: FitResult,
}

/// Fits all free parameters of the two-component response to a record.
pub fn fit_two_component(record: &ExperimentRecord, initial: &SweepResponseParams) -> Result<SweepFit> {
    initial.validate()?;
    record.validate()?;
    let (lo, hi) = initial.domain();
    if let Some(x) = record.x.iter().find(|x| !(**x >= lo && **x <= hi)) {
        return Err(Error::Validation(format!(
            "rate {x} MHz/ms outside the response domain [{lo}, {hi}]"
        )));
    }
    let model = two_component_model(*initial);
    let bounds = initial.free_bounds();
    let mut start = initial.free_vector();
    bounds.clamp(&mut start);
    let fit = fit::fit(&model, record, &start, Some(&bounds))?;
    let params = initial.with_free_vector(&fit.params);
    Ok(SweepFit {
        peak_low: params.low_component(params.rate_low),
        peak_high: params.high_component(params.rate_high),
        params,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthRow {
    /// MHz
    pub width: f64,
    pub peak_low: Option<f64>,
    pub peak_high: Option<f64>,
    pub error: Option<String>,
}

impl WidthRow {
    fn difference(&self) -> Option<f64> {
        Some(self.peak_low? - self.peak_high?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthTable {
    pub rows: Vec<WidthRow>,
    /// Width (MHz) where the dominant component switches, if it does.
    pub crossover: Option<f64>,
}

/// Fits the two-component response for each width and locates where the
/// dominant component changes. A failed fit becomes an error entry.
pub fn peak_intensity_vs_width(
    widths: &[f64],
    datasets: &[ExperimentRecord],
    template: &SweepResponseParams,
) -> Result<WidthTable> {
    if widths.len() != datasets.len() {
        return Err(Error::Validation(format!(
            "{} widths but {} datasets",
            widths.len(),
            datasets.len()
        )));
    }
    crate::transfer::check_axis("width", widths)?;
    template.validate()?;

    let rows: Vec<WidthRow> = widths
        .par_iter()
        .zip(datasets.par_iter())
        .map(|(&width, rec)| {
            if !rec.is_empty() && rec.y.iter().all(|y| *y == 0.0) {
                return WidthRow {
                    width,
                    peak_low: Some(0.0),
                    peak_high: Some(0.0),
                    error: None,
                };
            }
            match fit_two_component(rec, template) {
                Ok(f) if f.fit.converged => WidthRow {
                    width,
                    peak_low: Some(f.peak_low),
                    peak_high: Some(f.peak_high),
                    error: None,
                },
                Ok(f) => WidthRow {
                    width,
                    peak_low: None,
                    peak_high: None,
                    error: Some(format!("fit did not converge: {}", f.fit.message)),
                },
                Err(e) => WidthRow {
                    width,
                    peak_low: None,
                    peak_high: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let crossover = find_crossover(&rows);
    Ok(WidthTable { rows, crossover })
}

fn find_crossover(rows: &[WidthRow]) -> Option<f64> {
    let signed: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.difference().map(|d| (r.width, d)))
        .collect();
    let mut last_nonzero: Option<usize> = None;
    for (k, &(w, d)) in signed.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        if let Some(i) = last_nonzero {
            let (w0, d0) = signed[i];
            if d0.signum() != d.signum() {
                if k == i + 1 {
                    return Some(w0 + (w - w0) * d0 / (d0 - d));
                }
                // exact ties in between: take their centre
                let ties = &signed[i + 1..k];
                return Some(ties.iter().map(|t| t.0).sum::<f64>() / ties.len() as f64);
            }
        }
        last_nonzero = Some(k);
    }
    None
}

/// Width dependence of the component amplitudes used for synthetic data and
/// the composite objective: amp_low(Δ) = amp_high·(Δ_x/Δ)^slope, so the two
/// peaks are equal at the crossover width Δ_x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeLaw {
    /// MHz
    pub crossover_width: f64,
    pub slope: f64,
}

impl Default for AmplitudeLaw {
    fn default() -> Self {
        AmplitudeLaw {
            crossover_width: 50.0,
            slope: 0.5,
        }
    }
}

impl AmplitudeLaw {
    pub fn amplitudes(&self, width: f64, amp_high: f64) -> (f64, f64) {
        (amp_high * (self.crossover_width / width).powf(self.slope), amp_high)
    }
}

/// True when a sweep of `width` at `rate` repeats faster than the instrument allows.
pub fn violates_repetition_floor(width: f64, rate: f64, min_period_ms: f64) -> bool {
    width / rate < min_period_ms
}

/// Noise-free synthetic response datasets, one per width, over `rates`.
/// Points violating the repetition floor are left out.
pub fn synthesize_width_datasets(
    widths: &[f64],
    rates: &[f64],
    template: &SweepResponseParams,
    law: &AmplitudeLaw,
    min_period_ms: f64,
) -> Result<Vec<ExperimentRecord>> {
    template.validate()?;
    widths
        .iter()
        .map(|&width| {
            let (amp_low, amp_high) = law.amplitudes(width, template.amp_high);
            let p = SweepResponseParams {
                amp_low,
                amp_high,
                ..*template
            };
            let (x, y): (Vec<f64>, Vec<f64>) = rates
                .iter()
                .filter(|&&r| !violates_repetition_floor(width, r, min_period_ms))
                .map(|&r| Ok((r, two_component_response(r, &p, p.domain())?)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            Ok(ExperimentRecord::new(x, y, None)?
                .with_axes("sweep_rate", Unit::MHzPerMs, "polarization", Unit::Dimensionless)
                .with_source(format!("synthetic:two-component:width={width}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthCheck {
    pub pass: bool,
    /// width − ODMR width, MHz
    pub margin: f64,
}

/// A sweep must at least cover the ODMR line.
pub fn min_sweep_width_check(width: f64, sample: &SampleSpec) -> WidthCheck {
    let margin = width - sample.odmr_width_mhz();
    WidthCheck {
        pass: margin >= 0.0,
        margin,
    }
}

/// `n` log-spaced points over `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i == n - 1 {
                    hi
                } else {
                    (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn response_examples() {
        assert!(sweep_rate_response(1e-9, 1.5, 2.0).unwrap() < 1e-13);
        let b = 2.0;
        let v = sweep_rate_response(b, 1.5, b).unwrap();
        assert!(rel(v, b.powf(1.5) * (1.0 - (-1.0f64).exp())) < 1e-14);
        assert!(sweep_rate_response(0.0, 1.5, 1.0).is_err());
        assert!(sweep_rate_response(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn response_increasing_for_c_1_5() {
        let grid = log_grid(1e-3, 1e3, 20_000);
        let vals: Vec<f64> = grid.iter().map(|&r| sweep_rate_response(r, 1.5, 3.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn response_asymptote() {
        for &(c, b) in &[(1.5, 1.5), (1.6, 15.0), (1.7, 0.4)] {
            let rate: f64 = 1e3 * b;
            let v = sweep_rate_response(rate, c, b).unwrap();
            assert!(rel(v, b * rate.powf(c - 1.0)) < 0.01);
        }
    }

    #[test]
    fn window_shape() {
        let band = RateBand::new(0.1, 5.0);
        assert_eq!(band.window(0.1, 0.25), 0.0);
        assert_eq!(band.window(5.0, 0.25), 0.0);
        assert_eq!(band.window(50.0, 0.25), 0.0);
        assert_eq!(band.window(1.5, 0.25), 1.0);
        let w = band.window(0.15, 0.25);
        assert!(w > 0.0 && w < 1.0);
    }

    #[test]
    fn two_component_examples() {
        let p = SweepResponseParams {
            amp_high: 0.0,
            ..SweepResponseParams::default()
        };
        let d = p.domain();
        for r in log_grid(0.1, 50.0, 50) {
            assert_eq!(two_component_response(r, &p, d).unwrap(), p.low_component(r));
        }
        let zero = SweepResponseParams {
            amp_low: 0.0,
            amp_high: 0.0,
            ..p
        };
        assert!(log_grid(0.1, 50.0, 50)
            .into_iter()
            .all(|r| two_component_response(r, &zero, d).unwrap() == 0.0));
        assert!(two_component_response(60.0, &p, d).is_err());

        let def = SweepResponseParams::default();
        def.validate().unwrap();
        assert!(rel(def.low_component(1.5), 1.0) < 1e-15);
        assert!(rel(def.high_component(15.0), 1.0) < 1e-15);
    }

    #[test]
    fn centre_must_sit_on_flat_top() {
        let p = SweepResponseParams {
            rate_low: 0.12,
            ..SweepResponseParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn fit_round_trip_noise_free() {
        let truth = SweepResponseParams {
            exponent_c: 1.6,
            amp_low: 0.7,
            amp_high: 1.3,
            b_low: 1.2,
            b_high: 18.0,
            ..SweepResponseParams::default()
        };
        let rates = log_grid(0.1, 50.0, 80);
        let y: Vec<f64> = rates
            .iter()
            .map(|&r| two_component_response(r, &truth, truth.domain()).unwrap())
            .collect();
        let rec = ExperimentRecord::new(rates, y, None).unwrap();
        let start = SweepResponseParams::default();
        let f = fit_two_component(&rec, &start).unwrap();
        assert!(f.fit.converged, "{}", f.fit.message);
        for (got, want) in f.params.free_vector().iter().zip(truth.free_vector()) {
            assert!(rel(*got, want) < 0.01, "{got} vs {want}");
        }
        assert!(rel(f.peak_low, 0.7) < 0.01 && rel(f.peak_high, 1.3) < 0.01);
    }

    #[test]
    fn crossover_detection() {
        let widths = [10.0, 20.0, 30.0, 40.0, 60.0, 80.0, 100.0, 200.0];
        let rates = log_grid(0.1, 50.0, 60);
        let t = SweepResponseParams::default();
        let data = synthesize_width_datasets(&widths, &rates, &t, &AmplitudeLaw::default(), 0.0).unwrap();
        let table = peak_intensity_vs_width(&widths, &data, &t).unwrap();
        let x = table.crossover.unwrap();
        assert!((x - 50.0).abs() <= 20.0, "{x}");
        assert!(table.rows.iter().all(|r| r.error.is_none()));
        let low_dominant: Vec<bool> = table.rows.iter().map(|r| r.difference().unwrap() > 0.0).collect();
        assert_eq!(low_dominant, vec![true, true, true, true, false, false, false, false]);

        let scaled: Vec<ExperimentRecord> = data.iter().map(|d| d.scaled(37.0)).collect();
        let again = peak_intensity_vs_width(&widths, &scaled, &t).unwrap();
        assert!((again.crossover.unwrap() - x).abs() < 1e-6);
    }

    #[test]
    fn single_width_high_dominant_and_zero_data() {
        let rates = log_grid(0.1, 50.0, 40);
        let t = SweepResponseParams::default();
        let p = SweepResponseParams {
            amp_low: 0.01,
            amp_high: 5.0,
            ..t
        };
        let y: Vec<f64> = rates.iter().map(|&r| two_component_response(r, &p, p.domain()).unwrap()).collect();
        let rec = ExperimentRecord::new(rates.clone(), y, None).unwrap();
        let table = peak_intensity_vs_width(&[200.0], &[rec], &t).unwrap();
        assert!(table.rows[0].peak_high.unwrap() > table.rows[0].peak_low.unwrap());
        assert_eq!(table.crossover, None);

        let zeros = ExperimentRecord::new(rates.clone(), vec![0.0; rates.len()], None).unwrap();
        let table = peak_intensity_vs_width(&[6.0, 100.0], &[zeros.clone(), zeros], &t).unwrap();
        assert!(table.rows.iter().all(|r| r.peak_low == Some(0.0) && r.peak_high == Some(0.0)));
        assert_eq!(table.crossover, None);
    }

    #[test]
    fn failed_width_becomes_error_entry() {
        let t = SweepResponseParams::default();
        let bad = ExperimentRecord::new(vec![100.0, 200.0], vec![1.0, 2.0], None).unwrap();
        let good = ExperimentRecord::new(vec![1.0, 2.0], vec![0.0, 0.0], None).unwrap();
        let table = peak_intensity_vs_width(&[10.0, 20.0], &[bad, good], &t).unwrap();
        assert!(table.rows[0].error.is_some());
        assert!(table.rows[1].error.is_none());
    }

    #[test]
    fn width_check_examples() {
        let s = SampleSpec::default();
        assert_eq!(min_sweep_width_check(6.0, &s), WidthCheck { pass: true, margin: 0.0 });
        assert_eq!(min_sweep_width_check(5.0, &s), WidthCheck { pass: false, margin: -1.0 });
        assert_eq!(min_sweep_width_check(200.0, &s), WidthCheck { pass: true, margin: 194.0 });
    }

    #[test]
    fn repetition_floor_masks_fast_narrow_sweeps() {
        assert!(violates_repetition_floor(6.0, 50.0, 0.5));
        assert!(!violates_repetition_floor(6.0, 1.5, 0.5));
        let rates = log_grid(0.1, 50.0, 30);
        let d = synthesize_width_datasets(&[6.0, 200.0], &rates, &SweepResponseParams::default(), &AmplitudeLaw::default(), 0.5)
            .unwrap();
        assert!(d[0].len() < rates.len());
        assert_eq!(d[1].len(), rates.len());
    }

    #[test]
    fn sweep_params_band() {
        let s = SweepParams {
            width: 6.0,
            rate: 1.5,
            center: 2.743,
            direction: SweepDirection::Down,
        };
        s.validate((2.6, 3.2)).unwrap();
        assert!(s.validate((2.742, 3.2)).is_err());
        assert!((s.period_ms() - 4.0).abs() < 1e-15);
        assert_eq!(SweepDirection::Down.sign(), -1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn response_nonnegative(r in 1e-4f64..1e4, c in 0.5f64..2.5, b in 1e-3f64..1e3) {
                prop_assert!(sweep_rate_response(r, c, b).unwrap() >= 0.0);
            }

            #[test]
            fn linear_in_amplitudes(r in 0.1f64..50.0, a in 0.0f64..10.0, h in 0.0f64..10.0) {
                let p = SweepResponseParams { amp_low: a, amp_high: h, ..SweepResponseParams::default() };
                let q = SweepResponseParams { amp_low: 2.0 * a, amp_high: 2.0 * h, ..p };
                let d = p.domain();
                let v = two_component_response(r, &p, d).unwrap();
                let w = two_component_response(r, &q, d).unwrap();
                prop_assert!((w - 2.0 * v).abs() <= 1e-12 * v.abs().max(1e-300));
            }
        }
    }
}
