use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::Unit;

/// A measured or synthetic (x, y[, σ]) dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    #[serde(default)]
    pub source: String,
    #[serde(default = "default_x_label")]
    pub x_label: String,
    #[serde(default = "dimensionless")]
    pub x_unit: Unit,
    #[serde(default = "default_y_label")]
    pub y_label: String,
    #[serde(default = "dimensionless")]
    pub y_unit: Unit,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
}

fn default_x_label() -> String {
    "x".into()
}
fn default_y_label() -> String {
    "y".into()
}
fn dimensionless() -> Unit {
    Unit::Dimensionless
}

impl ExperimentRecord {
    /// Builds and validates a record with dimensionless axes.
    pub fn new(x: Vec<f64>, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        let r = ExperimentRecord {
            source: String::new(),
            x_label: default_x_label(),
            x_unit: Unit::Dimensionless,
            y_label: default_y_label(),
            y_unit: Unit::Dimensionless,
            x,
            y,
            sigma,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_axes(mut self, x_label: &str, x_unit: Unit, y_label: &str, y_unit: Unit) -> Self {
        self.x_label = x_label.into();
        self.x_unit = x_unit;
        self.y_label = y_label.into();
        self.y_unit = y_unit;
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::Validation(format!(
                "x has {} values but y has {}",
                self.x.len(),
                self.y.len()
            )));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.x.len() {
                return Err(Error::Validation(format!(
                    "sigma has {} values but x has {}",
                    s.len(),
                    self.x.len()
                )));
            }
            let bad: Vec<usize> = s
                .iter()
                .enumerate()
                .filter(|(_, v)| !(v.is_finite() && **v > 0.0))
                .map(|(i, _)| i)
                .collect();
            if !bad.is_empty() {
                return Err(Error::Validation(format!("sigma must be > 0 at indices {bad:?}")));
            }
        }
        let non_finite: Vec<usize> = (0..self.x.len())
            .filter(|&i| !(self.x[i].is_finite() && self.y[i].is_finite()))
            .collect();
        if !non_finite.is_empty() {
            return Err(Error::Validation(format!("non-finite values at indices {non_finite:?}")));
        }
        let offending = self.non_increasing_indices();
        if !offending.is_empty() {
            return Err(Error::Validation(format!(
                "x must be strictly increasing; offending indices {offending:?}"
            )));
        }
        Ok(())
    }

    /// Indices `i` where x[i] ≤ x[i-1].
    pub fn non_increasing_indices(&self) -> Vec<usize> {
        (1..self.x.len()).filter(|&i| !(self.x[i] > self.x[i - 1])).collect()
    }

    /// Copy with y (and σ) multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut r = self.clone();
        r.y.iter_mut().for_each(|v| *v *= k);
        if let Some(s) = r.sigma.as_mut() {
            s.iter_mut().for_each(|v| *v *= k.abs());
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_records() {
        assert!(ExperimentRecord::new(vec![1.0, 2.0], vec![1.0], None).is_err());
        let e = ExperimentRecord::new(vec![1.0, 2.0, 2.0, 1.5], vec![0.0; 4], None).unwrap_err();
        assert!(e.to_string().contains("[2, 3]"), "{e}");
        assert!(ExperimentRecord::new(vec![1.0, 2.0], vec![1.0, 1.0], Some(vec![1.0, 0.0])).is_err());
        assert!(ExperimentRecord::new(vec![1.0, 2.0], vec![1.0, f64::NAN], None).is_err());
        ExperimentRecord::new(vec![1.0, 2.0], vec![1.0, 1.0], Some(vec![0.1, 0.2])).unwrap();
    }

    #[test]
    fn json_shape() {
        let r = ExperimentRecord::new(vec![1.0], vec![2.0], None)
            .unwrap()
            .with_axes("rate", Unit::MHzPerMs, "polarization", Unit::Dimensionless);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"x_unit\":\"MHz/ms\""), "{s}");
        let back: ExperimentRecord = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
