//! Error norms, drift tracking, rate fits and compensated sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = NeumaierSum::new();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// `(Σ (a-b)² dx)^{1/2}`.
pub fn l2_error(a: &[f64], b: &[f64], grid: &Grid1D) -> Result<f64> {
    if a.len() != b.len() || a.len() != grid.ncells {
        return Err(Error::ShapeMismatch(format!(
            "fields of length {} and {} on a {}-cell grid",
            a.len(),
            b.len(),
            grid.ncells
        )));
    }
    Ok((compensated_sum(a.iter().zip(b).map(|(x, y)| (x - y).powi(2))) * grid.dx).sqrt())
}

/// Least-squares slope of `log(error)` against `log(eps)`.
pub fn rate_estimate(errors: &[f64], eps: &[f64]) -> Result<f64> {
    if errors.len() != eps.len() {
        return Err(Error::ShapeMismatch(
            "errors and eps differ in length".into(),
        ));
    }
    if errors.len() < 3 {
        return Err(Error::NeedPoints(errors.len()));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::NonPositiveEntry("errors"));
    }
    if eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::NonPositiveEntry("eps"));
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = x.len() as f64;
    let xm = x.iter().sum::<f64>() / k;
    let ym = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Defect("eps values are all equal".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub value: f64,
    /// Set when the initial value was zero and the absolute deviation is reported.
    pub absolute: bool,
}

/// Largest deviation from the first entry, relative unless that entry is zero.
pub fn drift(series: &[f64]) -> Result<Drift> {
    let Some(&s0) = series.first() else {
        return Err(Error::NeedPoints(0));
    };
    let dev = series.iter().map(|s| (s - s0).abs()).fold(0.0, f64::max);
    if s0 == 0.0 {
        Ok(Drift {
            value: dev,
            absolute: true,
        })
    } else {
        Ok(Drift {
            value: dev / s0.abs(),
            absolute: false,
        })
    }
}

/// One row of a run's time series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub time: f64,
    pub mass: Vec<f64>,
    pub momentum: f64,
    pub energy: f64,
    pub entropy: f64,
    pub identity_residual: Option<f64>,
    pub rao: Option<f64>,
}

impl DiagnosticsRecord {
    pub fn csv_header(species: usize) -> Vec<String> {
        let mut h = vec!["step".to_string(), "t".to_string()];
        h.extend((0..species).map(|i| format!("mass_{i}")));
        h.extend(["momentum", "energy", "entropy", "identity_residual", "rao"].map(String::from));
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        let mut r = vec![self.step.to_string(), format!("{:e}", self.time)];
        r.extend(self.mass.iter().map(|m| format!("{m:e}")));
        r.push(format!("{:e}", self.momentum));
        r.push(format!("{:e}", self.energy));
        r.push(format!("{:e}", self.entropy));
        r.push(opt(self.identity_residual));
        r.push(opt(self.rao));
        r
    }
}
