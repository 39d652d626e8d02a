//! Periodic spatial grid and midpoint-rule velocity grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, L)`; cell `k` is centered at `(k + 1/2) dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub length: f64,
    pub ncells: usize,
    pub dx: f64,
    pub periodic: bool,
}

impl Grid1D {
    pub fn new(length: f64, ncells: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Config(format!(
                "domain length must be positive: {length}"
            )));
        }
        if ncells < 8 {
            return Err(Error::Config(format!(
                "need at least 8 cells, got {ncells}"
            )));
        }
        Ok(Grid1D {
            length,
            ncells,
            dx: length / ncells as f64,
            periodic: true,
        })
    }

    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.ncells).map(|k| self.center(k)).collect()
    }

    #[inline]
    pub fn next(&self, k: usize) -> usize {
        if k + 1 == self.ncells {
            0
        } else {
            k + 1
        }
    }

    #[inline]
    pub fn prev(&self, k: usize) -> usize {
        if k == 0 {
            self.ncells - 1
        } else {
            k - 1
        }
    }
}

/// Midpoint nodes on `[-xi_max, xi_max]` with uniform weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid1D {
    pub xi_max: f64,
    pub nnodes: usize,
    pub nodes: Vec<f64>,
    pub weight: f64,
}

impl VelocityGrid1D {
    pub fn new(xi_max: f64, nnodes: usize) -> Result<Self> {
        if !(xi_max > 0.0) || !xi_max.is_finite() {
            return Err(Error::Config(format!("xi_max must be positive: {xi_max}")));
        }
        if nnodes < 2 {
            return Err(Error::Config(format!(
                "need at least 2 velocity nodes, got {nnodes}"
            )));
        }
        let weight = 2.0 * xi_max / nnodes as f64;
        let half = 0.5 * weight;
        // Odd integer multiples of w/2 keep the grid exactly antisymmetric.
        let nodes = (0..nnodes)
            .map(|k| (2.0 * k as f64 + 1.0 - nnodes as f64) * half)
            .collect();
        Ok(VelocityGrid1D {
            xi_max,
            nnodes,
            nodes,
            weight,
        })
    }

    /// Default half-width `8·max_i √(θ_max/m_i)` plus any velocity shift.
    pub fn default_xi_max(theta_max: f64, masses: &[f64], shift: f64) -> f64 {
        let m_min = masses.iter().cloned().fold(f64::INFINITY, f64::min);
        8.0 * (theta_max / m_min).sqrt() + shift.abs()
    }

    pub fn for_mixture(theta_max: f64, masses: &[f64], shift: f64, nnodes: usize) -> Result<Self> {
        Self::new(Self::default_xi_max(theta_max, masses, shift), nnodes)
    }

    pub fn total_weight(&self) -> f64 {
        self.weight * self.nnodes as f64
    }
}
