use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::search::golden_section_max;
use crate::sweep::{two_component_response, violates_repetition_floor, AmplitudeLaw, SweepResponseParams};
use crate::transfer::BetaMapping;

use super::config::{axis_unit, grid_values, value, Scale, ScenarioConfig, AXES};
use super::table::Table;
use super::{quadratic_fit, RunOutput};

pub const OBJECTIVE_LABEL: &str = "model-composite";

/// Index of each axis in a parameter vector `[power W, field mT, rate MHz/ms, width MHz]`.
fn axis_index(name: &str) -> usize {
    AXES.iter().position(|a| a.0 == name).expect("axis validated")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factors {
    pub power: f64,
    pub rate: f64,
    pub gate: f64,
    pub total: f64,
}

/// Power response normalized to 1 at its optimum, with β from the field,
/// times the band-windowed sweep-rate response, times a gate that is zero
/// for sweeps narrower than the ODMR line or faster than the repetition floor.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeObjective {
    pub mapping: BetaMapping,
    pub response: SweepResponseParams,
    pub law: AmplitudeLaw,
    pub odmr_width: f64,
    pub min_period_ms: f64,
}

impl CompositeObjective {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        Ok(CompositeObjective {
            mapping: cfg.beta_mapping()?,
            response: cfg.sweep.response,
            law: cfg.amplitude_law()?,
            odmr_width: cfg.sample.odmr_width_mhz(),
            min_period_ms: cfg.min_period_ms()?,
        })
    }

    /// Points where β(B) or the rate response is undefined score zero.
    pub fn factors(&self, x: &[f64; 4]) -> Factors {
        let [power, field, rate, width] = *x;
        let power_f = match self.mapping.beta_at(field) {
            Ok(beta) if power >= 0.0 => beta * std::f64::consts::E * power * (-beta * power).exp(),
            _ => 0.0,
        };
        let (amp_low, amp_high) = self.law.amplitudes(width, self.response.amp_high);
        let p = SweepResponseParams { amp_low, amp_high, ..self.response };
        let rate_f = two_component_response(rate, &p, p.domain()).unwrap_or(0.0);
        let gate = if width >= self.odmr_width && !violates_repetition_floor(width, rate, self.min_period_ms) {
            1.0
        } else {
            0.0
        };
        Factors { power: power_f, rate: rate_f, gate, total: power_f * rate_f * gate }
    }

    pub fn evaluate(&self, x: &[f64; 4]) -> f64 {
        self.factors(x).total
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FreeDim {
    name: String,
    index: usize,
    lo: f64,
    hi: f64,
    points: usize,
    scale: Scale,
}

impl FreeDim {
    fn to_search(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => v,
            Scale::Log => v.ln(),
        }
    }

    fn value_at(&self, s: f64) -> f64 {
        match self.scale {
            Scale::Linear => s,
            Scale::Log => s.exp(),
        }
        .clamp(self.lo, self.hi)
    }

    fn coarse(&self) -> Vec<f64> {
        grid_values(self.lo, self.hi, self.points, self.scale)
    }

    /// Coarse spacing in search coordinates.
    fn step(&self) -> f64 {
        if self.points < 2 {
            self.to_search(self.hi) - self.to_search(self.lo)
        } else {
            (self.to_search(self.hi) - self.to_search(self.lo)) / (self.points - 1) as f64
        }
    }
}

fn free_dims(cfg: &ScenarioConfig) -> Result<Vec<FreeDim>> {
    let mut dims: Vec<FreeDim> = Vec::new();
    for p in &cfg.optimize.free {
        let unit = axis_unit(&p.name)?;
        if dims.iter().any(|d| d.name == p.name) {
            return Err(Error::Usage(format!("parameter '{}' listed twice", p.name)));
        }
        let (lo, hi) = match (p.min, p.max) {
            (Some(a), Some(b)) => (
                value(a, unit, &format!("optimize.{}.min", p.name))?,
                value(b, unit, &format!("optimize.{}.max", p.name))?,
            ),
            _ => return Err(Error::Usage(format!("free parameter '{}' needs both min and max", p.name))),
        };
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Usage(format!(
                "free parameter '{}' needs finite bounds with min < max, got [{lo}, {hi}]",
                p.name
            )));
        }
        if p.scale == Scale::Log && !(lo > 0.0) {
            return Err(Error::Usage(format!("log-scaled parameter '{}' needs min > 0", p.name)));
        }
        let points = p.points.unwrap_or(cfg.optimize.coarse_points);
        if points == 0 {
            return Err(Error::Usage(format!("free parameter '{}' needs at least one grid point", p.name)));
        }
        dims.push(FreeDim { name: p.name.clone(), index: axis_index(&p.name), lo, hi, points, scale: p.scale });
    }
    Ok(dims)
}

fn base_point(cfg: &ScenarioConfig) -> Result<[f64; 4]> {
    let tp = cfg.transfer_params()?;
    Ok([tp.power_p, tp.field_b, tp.sweep_rate, value(cfg.sweep.width, crate::quantities::Unit::MHz, "sweep.width")?])
}

struct Trace {
    dims: Vec<usize>,
    table: Table,
}

impl Trace {
    fn record(&mut self, stage: usize, x: &[f64; 4], f: f64) {
        let mut row = vec![self.table.rows.len() as f64, stage as f64];
        row.extend(self.dims.iter().map(|&i| x[i]));
        row.push(f);
        self.table.push_values(&row);
    }
}

/// Coarse grid scan over the free parameters, then coordinate-wise
/// golden-section refinement within one coarse step of the incumbent.
pub fn optimize(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let objective = CompositeObjective::from_config(cfg)?;
    let dims = free_dims(cfg)?;
    let mut x = base_point(cfg)?;

    let names: Vec<String> = dims.iter().map(|d| d.name.clone()).collect();
    let mut cols: Vec<(&str, crate::quantities::Unit)> = vec![
        ("evaluation", crate::quantities::Unit::Dimensionless),
        ("stage", crate::quantities::Unit::Dimensionless),
    ];
    for d in &dims {
        cols.push((d.name.as_str(), AXES[d.index].1));
    }
    cols.push(("objective", crate::quantities::Unit::Dimensionless));
    let mut trace = Trace { dims: dims.iter().map(|d| d.index).collect(), table: Table::new("optimize_trace", &cols) };

    // coarse grid, first parameter slowest; ties keep the lowest index
    let grids: Vec<Vec<f64>> = dims.iter().map(FreeDim::coarse).collect();
    let total: usize = grids.iter().map(Vec::len).product();
    let points: Vec<[f64; 4]> = (0..total)
        .map(|mut k| {
            let mut p = x;
            for (d, g) in dims.iter().zip(&grids).rev() {
                p[d.index] = g[k % g.len()];
                k /= g.len();
            }
            p
        })
        .collect();
    let values: Vec<f64> = points.par_iter().map(|p| objective.evaluate(p)).collect();
    let mut best = 0;
    for (k, (p, v)) in points.iter().zip(&values).enumerate() {
        trace.record(0, p, *v);
        if *v > values[best] {
            best = k;
        }
    }
    x = points[best];
    let mut fx = values[best];
    let coarse_best = fx;

    let mut rounds = 0;
    let mut converged = dims.is_empty();
    while !converged && rounds < cfg.optimize.max_rounds {
        rounds += 1;
        let before = fx;
        for d in &dims {
            let s = d.to_search(x[d.index]);
            let (a, b) = (
                (s - d.step()).max(d.to_search(d.lo)),
                (s + d.step()).min(d.to_search(d.hi)),
            );
            let mut evals: Vec<([f64; 4], f64)> = Vec::new();
            let (s_best, f_best) = golden_section_max(
                |t| {
                    let mut p = x;
                    p[d.index] = d.value_at(t);
                    let f = objective.evaluate(&p);
                    evals.push((p, f));
                    f
                },
                a,
                b,
                1e-12 * (b - a).abs().max(1e-300),
                200,
            );
            for (p, f) in &evals {
                trace.record(rounds, p, *f);
            }
            if f_best > fx {
                x[d.index] = d.value_at(s_best);
                fx = f_best;
            }
        }
        converged = (fx - before).abs() <= cfg.optimize.tolerance * fx.abs().max(f64::MIN_POSITIVE);
    }

    let mut s = Map::new();
    s.insert("command".into(), json!("optimize"));
    s.insert("objective".into(), json!(OBJECTIVE_LABEL));
    let best_point: Map<String, Value> = AXES.iter().zip(&x).map(|(a, v)| (a.0.to_string(), json!(v))).collect();
    s.insert("best_point".into(), Value::Object(best_point));
    s.insert("free".into(), json!(names));
    s.insert("best_objective".into(), json!(fx));
    s.insert("coarse_best_objective".into(), json!(coarse_best));
    s.insert("factors".into(), serde_json::to_value(objective.factors(&x)).expect("factors serialize"));
    s.insert("evaluations".into(), json!(trace.table.rows.len()));
    s.insert("rounds".into(), json!(rounds));
    s.insert("converged".into(), json!(converged));

    let mut tables = vec![trace.table];
    let power = dims.iter().find(|d| d.name == "power");
    let field = dims.iter().find(|d| d.name == "field");
    if let (Some(pd), Some(fd)) = (power, field) {
        let (ridge, fields, powers) = ridge_scan(&objective, &x, pd, fd);
        if fields.len() >= 3 {
            let (coef, r2) = quadratic_fit(&fields, &powers)?;
            s.insert("ridge_quadratic_coefficients".into(), json!(coef));
            s.insert("ridge_quadratic_r_squared".into(), json!(r2));
        }
        tables.push(ridge);
    }
    Ok(RunOutput::new("optimize", tables, s))
}

/// Best power at each coarse field value with everything else at `x`.
fn ridge_scan(objective: &CompositeObjective, x: &[f64; 4], pd: &FreeDim, fd: &FreeDim) -> (Table, Vec<f64>, Vec<f64>) {
    use crate::quantities::Unit;
    let rows: Vec<Option<(f64, f64, f64)>> = fd
        .coarse()
        .par_iter()
        .map(|&b| {
            let mut p = *x;
            p[fd.index] = b;
            let (s, f) = golden_section_max(
                |t| {
                    let mut q = p;
                    q[pd.index] = pd.value_at(t);
                    objective.evaluate(&q)
                },
                pd.to_search(pd.lo),
                pd.to_search(pd.hi),
                1e-12 * (pd.to_search(pd.hi) - pd.to_search(pd.lo)),
                300,
            );
            (f > 0.0).then(|| (b, pd.value_at(s), f))
        })
        .collect();
    let mut t = Table::new(
        "optimize_ridge",
        &[("field", Unit::MilliTesla), ("best_power", Unit::Watt), ("objective", Unit::Dimensionless)],
    );
    let (mut fields, mut powers) = (Vec::new(), Vec::new());
    for (b, p, f) in rows.into_iter().flatten() {
        t.push_values(&[b, p, f]);
        fields.push(b);
        powers.push(p);
    }
    (t, fields, powers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::FreeParam;
    use crate::quantities::Quantity;
    use crate::transfer::optimal_power_vs_field;

    fn free(name: &str, lo: Quantity, hi: Quantity) -> FreeParam {
        FreeParam { name: name.into(), min: Some(lo), max: Some(hi), points: None, scale: Scale::Linear }
    }

    #[test]
    fn one_dimensional_power_matches_analytic_optimum() {
        let mut cfg = ScenarioConfig::default();
        cfg.optimize.free = vec![free("power", Quantity::watt(1.0), Quantity::watt(200.0))];
        let out = optimize(&cfg).unwrap();
        let p = out.summary["best_point"]["power"].as_f64().unwrap();
        let c = cfg.coupling_c().unwrap();
        let expect = optimal_power_vs_field(9.4, 50.0, c, cfg.constants.gamma_c).unwrap();
        assert!((p / expect - 1.0).abs() < 1e-6, "{p} vs {expect}");
    }

    #[test]
    fn all_fixed_is_a_single_evaluation() {
        let mut cfg = ScenarioConfig::default();
        cfg.optimize.free.clear();
        let out = optimize(&cfg).unwrap();
        assert_eq!(out.tables[0].rows.len(), 1);
        assert_eq!(out.summary["evaluations"], json!(1));
    }

    #[test]
    fn unbounded_parameter_is_usage_error() {
        let mut cfg = ScenarioConfig::default();
        cfg.optimize.free = vec![FreeParam {
            name: "rate".into(),
            min: Some(Quantity::new(0.1, crate::quantities::Unit::MHzPerMs)),
            max: None,
            points: None,
            scale: Scale::Log,
        }];
        assert!(matches!(optimize(&cfg), Err(Error::Usage(_))));
    }

    #[test]
    fn power_field_ridge_is_quadratic() {
        let mut cfg = ScenarioConfig::default();
        cfg.optimize.free = vec![
            free("power", Quantity::watt(1.0), Quantity::watt(200.0)),
            free("field", Quantity::mt(6.0), Quantity::mt(20.0)),
        ];
        let out = optimize(&cfg).unwrap();
        let r2 = out.summary["ridge_quadratic_r_squared"].as_f64().unwrap();
        assert!(r2 >= 0.99, "{r2}");
        let ridge = &out.tables[1];
        let c = cfg.coupling_c().unwrap();
        for row in &ridge.rows {
            let (b, p) = (row[0].unwrap(), row[1].unwrap());
            let expect = optimal_power_vs_field(b, 50.0, c, cfg.constants.gamma_c).unwrap();
            assert!((p / expect - 1.0).abs() < 1e-4, "{b}: {p} vs {expect}");
        }
    }

    #[test]
    fn narrow_sweeps_are_gated() {
        let cfg = ScenarioConfig::default();
        let obj = CompositeObjective::from_config(&cfg).unwrap();
        assert_eq!(obj.evaluate(&[30.0, 9.4, 10.0, 3.0]), 0.0);
        assert!(obj.evaluate(&[30.0, 9.4, 10.0, 100.0]) > 0.0);
    }
}
