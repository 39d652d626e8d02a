//! Non-isothermal Maxwell–Stefan system on a periodic grid.
//!
//! Unknowns are `n_i` per cell and the summed thermal energy `E = (3/2) Σ n_i θ`.
//! Face velocities come from the friction system `A v = −∂x(n_i θ)` closed by
//! zero barycentric momentum. Mass and energy fluxes use arithmetic face averages.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::NeumaierSum;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::mixture::{alphas_betas, mean_velocity_bar, ms_coefficients};
use crate::params::MixtureParams;
use crate::state::MacroStateMS;

/// Solves `A v = −grad` with `A_ii = Σ_{j≠i} D_ij n_i n_j`, `A_ij = −D_ij n_i n_j`,
/// after removing the species mean of `grad`, subject to `Σ ρ_i v_i = 0`.
pub fn solve_velocities(p: &MixtureParams, n: &[f64], grad: &[f64]) -> Result<Vec<f64>> {
    let k = n.len();
    if k == 1 {
        return Ok(vec![0.0]);
    }
    let d = ms_coefficients(&p.nu_matrix, &p.m, n);
    let mean = grad.iter().sum::<f64>() / k as f64;
    let mut sys = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for i in 0..k {
        for j in 0..k {
            if i != j {
                let a = d[i][j] * n[i] * n[j];
                sys[(i, j)] = -a;
                sys[(i, i)] += a;
            }
        }
        sys[(i, k)] = 1.0;
        sys[(k, i)] = p.m[i] * n[i];
        rhs[i] = -(grad[i] - mean);
    }
    let sol = sys
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Defect("singular Maxwell–Stefan system".into()))?;
    Ok(sol.iter().take(k).copied().collect())
}

/// Per-face quantities of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MsFaces {
    pub n: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub v_bar: Vec<Vec<f64>>,
    /// `(θ_{k+1} − θ_k)/dx`.
    pub dtheta: Vec<f64>,
}

/// Face velocities and averages. Face `k` sits between cells `k` and `k+1`.
pub fn ms_faces(state: &MacroStateMS, p: &MixtureParams, grid: &Grid1D) -> Result<MsFaces> {
    let k = state.n.len();
    let nc = state.ncells();
    let mut f = MsFaces {
        n: vec![vec![0.0; nc]; k],
        theta: vec![0.0; nc],
        v: vec![vec![0.0; nc]; k],
        v_bar: vec![vec![0.0; nc]; k],
        dtheta: vec![0.0; nc],
    };
    let mut nf = vec![0.0; k];
    let mut grad = vec![0.0; k];
    for c in 0..nc {
        let r = grid.next(c);
        f.theta[c] = 0.5 * (state.theta[c] + state.theta[r]);
        f.dtheta[c] = (state.theta[r] - state.theta[c]) / grid.dx;
        for i in 0..k {
            nf[i] = 0.5 * (state.n[i][c] + state.n[i][r]);
            grad[i] = (state.n[i][r] * state.theta[r] - state.n[i][c] * state.theta[c]) / grid.dx;
            f.n[i][c] = nf[i];
        }
        let v = solve_velocities(p, &nf, &grad)?;
        let rho: Vec<f64> = nf.iter().zip(&p.m).map(|(a, b)| a * b).collect();
        let (alpha, _) = alphas_betas(&p.nu_matrix, &rho, &nf);
        let (vb, _) = mean_velocity_bar(&p.nu_matrix, &alpha, &v);
        for i in 0..k {
            f.v[i][c] = v[i];
            f.v_bar[i][c] = vb[i];
        }
    }
    Ok(f)
}

/// `min(0.4 dx² min_i(m_i ν_i)/(5 max θ), 0.9 dx/max|v|)` for the given faces.
pub fn ms_cfl_limit(
    state: &MacroStateMS,
    p: &MixtureParams,
    grid: &Grid1D,
    faces: &MsFaces,
) -> f64 {
    let mnu = p
        .nu_row_sums()
        .iter()
        .zip(&p.m)
        .map(|(a, b)| a * b)
        .fold(f64::INFINITY, f64::min);
    let tmax = state.theta.iter().cloned().fold(0.0, f64::max);
    let vmax = faces.v.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    let diff = 0.4 * grid.dx * grid.dx * mnu / (5.0 * tmax);
    if vmax > 0.0 {
        diff.min(0.9 * grid.dx / vmax)
    } else {
        diff
    }
}

/// One forward-Euler step. Cell velocities are refreshed to face averages.
pub fn ms_step(state: &mut MacroStateMS, p: &MixtureParams, grid: &Grid1D, dt: f64) -> Result<()> {
    let k = state.n.len();
    let nc = state.ncells();
    let faces = ms_faces(state, p, grid)?;
    let limit = ms_cfl_limit(state, p, grid, &faces);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let nu = p.nu_row_sums();
    let mut mass_flux = vec![vec![0.0; nc]; k];
    let mut energy_flux = vec![0.0; nc];
    for c in 0..nc {
        let r = grid.next(c);
        let mut e = 0.0;
        for i in 0..k {
            mass_flux[i][c] = faces.n[i][c] * faces.v[i][c];
            let heat = (state.n[i][r] * state.theta[r].powi(2)
                - state.n[i][c] * state.theta[c].powi(2))
                / grid.dx;
            e += faces.n[i][c] * faces.theta[c] * faces.v_bar[i][c] - heat / (p.m[i] * nu[i]);
        }
        energy_flux[c] = 2.5 * e;
    }
    let lam = dt / grid.dx;
    let mut n_new = state.n.clone();
    let mut theta_new = state.theta.clone();
    for c in 0..nc {
        let l = grid.prev(c);
        let mut ntot = 0.0;
        let mut e_old = 0.0;
        for i in 0..k {
            e_old += 1.5 * state.n[i][c] * state.theta[c];
            n_new[i][c] = state.n[i][c] - lam * (mass_flux[i][c] - mass_flux[i][l]);
            if !(n_new[i][c] > 0.0) {
                return Err(Error::NonPositive {
                    field: "density",
                    cell: c,
                    species: i,
                });
            }
            ntot += n_new[i][c];
        }
        let e_new = e_old - lam * (energy_flux[c] - energy_flux[l]);
        theta_new[c] = 2.0 * e_new / (3.0 * ntot);
        if !(theta_new[c] > 0.0) {
            return Err(Error::NonPositive {
                field: "temperature",
                cell: c,
                species: 0,
            });
        }
    }
    state.n = n_new;
    state.theta = theta_new;
    for i in 0..k {
        for c in 0..nc {
            state.v[i][c] = 0.5 * (faces.v[i][c] + faces.v[i][grid.prev(c)]);
        }
    }
    Ok(())
}

/// `−Σ_i ∫ [n_i(log n_i − 1) + (3/2) n_i (log(m_i/2πθ) − 1)] dx` (midpoint rule).
pub fn ms_entropy(state: &MacroStateMS, p: &MixtureParams, grid: &Grid1D) -> f64 {
    let mut s = NeumaierSum::new();
    for (i, row) in state.n.iter().enumerate() {
        for (c, &n) in row.iter().enumerate() {
            s.add(crate::kinetic::entropy::maxwellian_entropy_density(
                n,
                state.theta[c],
                p.m[i],
            ));
        }
    }
    s.value() * grid.dx
}

/// `∫ (1/2θ) Σ D_ij n_i n_j (v_i − v_j)² + (5/2) Σ (n_i/θ) |∂xθ|²`, face quadrature.
///
/// Also returns the smallest face integrand seen.
pub fn ms_entropy_production(
    state: &MacroStateMS,
    p: &MixtureParams,
    grid: &Grid1D,
) -> Result<(f64, f64)> {
    let faces = ms_faces(state, p, grid)?;
    let k = state.n.len();
    let mut s = NeumaierSum::new();
    let mut min_term = f64::INFINITY;
    let mut nf = vec![0.0; k];
    for c in 0..state.ncells() {
        for i in 0..k {
            nf[i] = faces.n[i][c];
        }
        let d = ms_coefficients(&p.nu_matrix, &p.m, &nf);
        let th = faces.theta[c];
        let mut term = 0.0;
        for i in 0..k {
            for j in 0..k {
                term +=
                    d[i][j] * nf[i] * nf[j] * (faces.v[i][c] - faces.v[j][c]).powi(2) / (2.0 * th);
            }
            term += 2.5 * nf[i] / th * faces.dtheta[c].powi(2);
        }
        min_term = min_term.min(term);
        s.add(term);
    }
    Ok((s.value() * grid.dx, min_term))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Compares the centered difference of `H⁰` over `(prev, next)` with the
/// production at `mid`. Requires `m_i ν_i = 1` for all species.
pub fn ms_entropy_identity_residual(
    prev: &MacroStateMS,
    mid: &MacroStateMS,
    next: &MacroStateMS,
    p: &MixtureParams,
    grid: &Grid1D,
    dt: f64,
) -> Result<IdentityResidual> {
    let nu = p.nu_row_sums();
    for (i, (&m, &v)) in p.m.iter().zip(&nu).enumerate() {
        if (m * v - 1.0).abs() > 1e-12 {
            return Err(Error::HypothesisViolated(format!(
                "m_i ν_i = {} for species {i}, expected 1",
                m * v
            )));
        }
    }
    let lhs = (ms_entropy(next, p, grid) - ms_entropy(prev, p, grid)) / (2.0 * dt);
    let (rhs, _) = ms_entropy_production(mid, p, grid)?;
    let residual = if rhs == 0.0 {
        (lhs - rhs).abs()
    } else {
        (lhs - rhs).abs() / rhs.abs()
    };
    Ok(IdentityResidual { lhs, rhs, residual })
}

/// `max_x |Σ n_i θ − mean| / mean`.
pub fn pressure_nonuniformity(state: &MacroStateMS) -> f64 {
    let p: Vec<f64> = (0..state.ncells())
        .map(|c| state.n.iter().map(|r| r[c]).sum::<f64>() * state.theta[c])
        .collect();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean
}
