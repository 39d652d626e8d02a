//! Mixture parameters, validation, and the Mach/Knudsen scaling selector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and scaling parameters shared by both kinetic models.
///
/// `nu_matrix` holds the pairwise frequencies of the Gross–Krook model,
/// `nu_vec`, `a` and `sigma` belong to the Brinkman model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub species: usize,
    pub m: Vec<f64>,
    pub nu_matrix: Vec<Vec<f64>>,
    pub nu_vec: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub eps: f64,
    pub sigma: f64,
}

impl MixtureParams {
    /// Parameters with every mass and frequency set to one, `a` the identity.
    pub fn uniform(species: usize, eps: f64) -> Self {
        let mut a = vec![vec![0.0; species]; species];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        MixtureParams {
            species,
            m: vec![1.0; species],
            nu_matrix: vec![vec![1.0; species]; species],
            nu_vec: vec![1.0; species],
            a,
            eps,
            sigma: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.species
    }

    pub fn is_empty(&self) -> bool {
        self.species == 0
    }

    /// Row sums ν_i = Σ_j ν_ij of the pairwise matrix.
    pub fn nu_row_sums(&self) -> Vec<f64> {
        self.nu_matrix.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Checks every invariant of [`MixtureParams`] and reports all violations at once.
pub fn validate_params(p: &MixtureParams) -> Result<()> {
    let n = p.species;
    let mut errs = Vec::new();
    if n == 0 {
        errs.push("species count must be at least 1".to_string());
    }
    if p.m.len() != n {
        errs.push(format!(
            "dimension mismatch: m has length {}, expected {n}",
            p.m.len()
        ));
    }
    for (i, &m) in p.m.iter().enumerate() {
        if !(m > 0.0) || !m.is_finite() {
            errs.push(format!("mass must be positive (species {i}: {m})"));
        }
    }
    let shape_ok = |mat: &Vec<Vec<f64>>| mat.len() == n && mat.iter().all(|r| r.len() == n);
    let shape = |mat: &Vec<Vec<f64>>| {
        let cols = mat.first().map_or(0, |r| r.len());
        format!("{}x{}", mat.len(), cols)
    };
    if !shape_ok(&p.nu_matrix) {
        errs.push(format!(
            "dimension mismatch: nu_matrix is {}, expected {n}x{n}",
            shape(&p.nu_matrix)
        ));
    }
    for (i, row) in p.nu_matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                errs.push(format!(
                    "collision frequency must be positive (nu[{i}][{j}] = {v})"
                ));
            }
        }
    }
    if p.nu_vec.len() != n {
        errs.push(format!(
            "dimension mismatch: nu_vec has length {}, expected {n}",
            p.nu_vec.len()
        ));
    }
    for (i, &v) in p.nu_vec.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            errs.push(format!(
                "collision frequency must be positive (nu_vec[{i}] = {v})"
            ));
        }
    }
    if !shape_ok(&p.a) {
        errs.push(format!(
            "dimension mismatch: a is {}, expected {n}x{n}",
            shape(&p.a)
        ));
    }
    if p.a.iter().flatten().any(|v| !v.is_finite()) {
        errs.push("interaction matrix entries must be finite".to_string());
    }
    if !(p.eps > 0.0 && p.eps <= 1.0) {
        errs.push(format!("eps out of range (0, 1]: {}", p.eps));
    }
    if !(p.sigma > 0.0) || !p.sigma.is_finite() {
        errs.push(format!("sigma must be positive: {}", p.sigma));
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams(errs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Diffusive,
    HighField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub kind: RegimeKind,
    pub eps: f64,
}

/// Picks the scaling regime from Mach and Knudsen numbers.
///
/// Diffusive when Kn ≈ Ma, high-field when Kn ≈ Ma², both within a relative
/// tolerance; the scaling parameter is Ma in either case.
pub fn scaling_from_physical(ma: f64, kn: f64, tol: f64) -> Result<ScalingRegime> {
    let unit = |x: f64| x > 0.0 && x < 1.0;
    if !unit(ma) || !unit(kn) {
        return Err(Error::UnsupportedRegime { ma, kn });
    }
    if (kn - ma).abs() <= tol * ma {
        Ok(ScalingRegime {
            kind: RegimeKind::Diffusive,
            eps: ma,
        })
    } else if (kn - ma * ma).abs() <= tol * ma * ma {
        Ok(ScalingRegime {
            kind: RegimeKind::HighField,
            eps: ma,
        })
    } else {
        Err(Error::UnsupportedRegime { ma, kn })
    }
}
