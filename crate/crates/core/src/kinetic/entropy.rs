//! Kinetic entropy of reduced states.
//!
//! The reduced pair only carries transverse second moments, so each node is
//! read as a Maxwellian in (ξ₂, ξ₃) with variance `H/(2G)` per axis. Under
//! that closure `∬ f(log f − 1) = G log(G²/(πH)) − 2G`, independent of mass.

use crate::diagnostics::NeumaierSum;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, VelocityGrid1D};
use crate::state::KineticState;

/// `-Σ_i ∫∫ f_i (log f_i − 1)` under the transverse-Maxwellian closure.
///
/// Nodes with `G = H = 0` contribute their limit, zero.
pub fn kinetic_entropy(state: &KineticState, vgrid: &VelocityGrid1D, grid: &Grid1D) -> Result<f64> {
    let nv = state.nnodes;
    let mut s = NeumaierSum::new();
    for i in 0..state.species() {
        for (k, (&g, &h)) in state.g[i].iter().zip(&state.h[i]).enumerate() {
            if g == 0.0 && h == 0.0 {
                continue;
            }
            if !(g > 0.0) || !(h > 0.0) {
                return Err(Error::NonPositive {
                    field: "reduced distribution",
                    cell: k / nv,
                    species: i,
                });
            }
            s.add(g * (g * g / (std::f64::consts::PI * h)).ln() - 2.0 * g);
        }
    }
    Ok(-s.value() * vgrid.weight * grid.dx)
}

/// Same functional for the Brinkman model.
pub fn bb_kinetic_entropy(
    state: &KineticState,
    vgrid: &VelocityGrid1D,
    grid: &Grid1D,
) -> Result<f64> {
    kinetic_entropy(state, vgrid, grid)
}

/// `-∫[n(log n − 1) + (3/2) n (log(m/2πθ) − 1)]` for a single cell of a Maxwellian state.
pub fn maxwellian_entropy_density(n: f64, theta: f64, m: f64) -> f64 {
    -(n * (n.ln() - 1.0) + 1.5 * n * ((m / (2.0 * std::f64::consts::PI * theta)).ln() - 1.0))
}
