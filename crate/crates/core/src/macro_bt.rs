//! Busenberg–Travis-type cross-diffusion systems.
//!
//! Mass flux `J_i = −(1/ν_i)[σ ∂x(ρ_iθ_i/m_i) − ρ_i ∂xφ_i]` with the local
//! potential `φ_i = −Σ_j a_ij ρ_j θ_j`; in the non-isothermal mode the
//! thermal energy `e_i = ρ_iθ_i/m_i` obeys
//! `(3/2)∂t e_i = (5/2)∂x F_i + (1/σ) J_i ∂xφ_i`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::diagnostics::NeumaierSum;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kinetic::entropy::maxwellian_entropy_density;
use crate::params::MixtureParams;
use crate::state::MacroStateBT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BtMode {
    NonIsothermal,
    /// θ ≡ 1, mass equations only.
    Isothermal,
    /// σ = 0, a_ij = 1, θ ≡ 1.
    Classical,
    /// σ = 0 with the configured a, θ ≡ 1.
    HighField,
}

impl std::str::FromStr for BtMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non_isothermal" => Ok(BtMode::NonIsothermal),
            "isothermal" => Ok(BtMode::Isothermal),
            "classical" => Ok(BtMode::Classical),
            "high_field" => Ok(BtMode::HighField),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

impl BtMode {
    pub fn evolves_temperature(self) -> bool {
        matches!(self, BtMode::NonIsothermal)
    }

    fn sigma(self, p: &MixtureParams) -> f64 {
        match self {
            BtMode::NonIsothermal | BtMode::Isothermal => p.sigma,
            BtMode::Classical | BtMode::HighField => 0.0,
        }
    }

    fn interaction(self, p: &MixtureParams) -> Vec<Vec<f64>> {
        match self {
            BtMode::Classical => vec![vec![1.0; p.species]; p.species],
            _ => p.a.clone(),
        }
    }
}

/// `φ_i = −Σ_j a_ij ρ_j θ_j` pointwise.
pub fn local_potential(rho: &[Vec<f64>], theta: &[Vec<f64>], a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    crate::kinetic::brinkman::pressure_rhs(a, rho, theta)
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_sym_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let k = a.len();
    let m = DMatrix::from_fn(k, k, |i, j| 0.5 * (a[i][j] + a[j][i]));
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Errors unless the symmetric part of the mode's interaction matrix is positive semidefinite.
pub fn check_mode(p: &MixtureParams, mode: BtMode) -> Result<()> {
    if matches!(mode, BtMode::Classical | BtMode::HighField) {
        let lam = min_sym_eigenvalue(&mode.interaction(p));
        if lam < -1e-12 {
            return Err(Error::HypothesisViolated(format!(
                "symmetric part of the interaction matrix is indefinite (eigenvalue {lam})"
            )));
        }
    }
    Ok(())
}

/// Face fluxes of one state. Face `k` sits between cells `k` and `k+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BTFluxes {
    pub mass: Vec<Vec<f64>>,
    pub energy: Vec<Vec<f64>>,
    /// `(1/σ) J_i ∂xφ_i` at cell centers (zero when σ = 0).
    pub joule: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}

pub fn bt_fluxes(state: &MacroStateBT, p: &MixtureParams, grid: &Grid1D, mode: BtMode) -> BTFluxes {
    let k = state.rho.len();
    let nc = state.ncells();
    let sigma = mode.sigma(p);
    let a = mode.interaction(p);
    let phi = local_potential(&state.rho, &state.theta, &a);
    let mut mass = vec![vec![0.0; nc]; k];
    let mut energy = vec![vec![0.0; nc]; k];
    let mut joule = vec![vec![0.0; nc]; k];
    for i in 0..k {
        let (m, nu) = (p.m[i], p.nu_vec[i]);
        let (rho, th, ph) = (&state.rho[i], &state.theta[i], &phi[i]);
        for c in 0..nc {
            let r = grid.next(c);
            let dphi = (ph[r] - ph[c]) / grid.dx;
            let rho_f = if sigma == 0.0 {
                // Upwind mobility along the drift velocity φ'/ν.
                if dphi > 0.0 {
                    rho[c]
                } else {
                    rho[r]
                }
            } else {
                0.5 * (rho[c] + rho[r])
            };
            let dp = (rho[r] * th[r] - rho[c] * th[c]) / (m * grid.dx);
            mass[i][c] = -(sigma * dp - rho_f * dphi) / nu;
            if mode.evolves_temperature() {
                let th_f = 0.5 * (th[c] + th[r]);
                let dq = (rho[r] * th[r] * th[r] - rho[c] * th[c] * th[c]) / (m * m * grid.dx);
                energy[i][c] = 2.5 * (sigma * dq / nu - rho_f * th_f * dphi / (nu * m));
            }
        }
        if mode.evolves_temperature() && sigma > 0.0 {
            for c in 0..nc {
                let l = grid.prev(c);
                let j_cell = 0.5 * (mass[i][c] + mass[i][l]);
                let dphi_cell = (ph[grid.next(c)] - ph[l]) / (2.0 * grid.dx);
                joule[i][c] = j_cell * dphi_cell / sigma;
            }
        }
    }
    BTFluxes {
        mass,
        energy,
        joule,
        phi,
    }
}

/// `0.4 dx² / D_max` with a bound on the effective diffusivities.
pub fn bt_cfl_limit(state: &MacroStateBT, p: &MixtureParams, grid: &Grid1D, mode: BtMode) -> f64 {
    let sigma = mode.sigma(p);
    let a = mode.interaction(p);
    let k = state.rho.len();
    let mut dmax: f64 = 0.0;
    for c in 0..state.ncells() {
        for i in 0..k {
            let th = state.theta[i][c];
            let cross: f64 = (0..k).map(|j| a[i][j].abs() * state.theta[j][c]).sum();
            let mut d = sigma * th / (p.nu_vec[i] * p.m[i]) + state.rho[i][c] * cross / p.nu_vec[i];
            if mode.evolves_temperature() {
                d *= 5.0 / 3.0 * th.max(1.0);
            }
            dmax = dmax.max(d);
        }
    }
    if dmax == 0.0 {
        f64::INFINITY
    } else {
        0.4 * grid.dx * grid.dx / dmax
    }
}

fn try_step(
    state: &MacroStateBT,
    p: &MixtureParams,
    grid: &Grid1D,
    dt: f64,
    mode: BtMode,
) -> Result<MacroStateBT> {
    let fl = bt_fluxes(state, p, grid, mode);
    let lam = dt / grid.dx;
    let mut next = state.clone();
    for i in 0..state.rho.len() {
        for c in 0..state.ncells() {
            let l = grid.prev(c);
            let rho_new = state.rho[i][c] - lam * (fl.mass[i][c] - fl.mass[i][l]);
            if !(rho_new > 0.0) {
                return Err(Error::NonPositive {
                    field: "density",
                    cell: c,
                    species: i,
                });
            }
            next.rho[i][c] = rho_new;
            if mode.evolves_temperature() {
                let e_old = state.rho[i][c] * state.theta[i][c] / p.m[i];
                let e_new = e_old
                    + dt / 1.5 * ((fl.energy[i][c] - fl.energy[i][l]) / grid.dx + fl.joule[i][c]);
                let th = p.m[i] * e_new / rho_new;
                if !(th > 0.0) {
                    return Err(Error::NonPositive {
                        field: "temperature",
                        cell: c,
                        species: i,
                    });
                }
                next.theta[i][c] = th;
            } else {
                next.theta[i][c] = 1.0;
            }
        }
    }
    let a = mode.interaction(p);
    next.phi = local_potential(&next.rho, &next.theta, &a);
    Ok(next)
}

/// One forward-Euler step. On a positivity failure the step is retried with
/// half the step size, up to ten times. Returns the step size actually taken.
pub fn bt_step(
    state: &mut MacroStateBT,
    p: &MixtureParams,
    grid: &Grid1D,
    dt: f64,
    mode: BtMode,
) -> Result<f64> {
    check_mode(p, mode)?;
    if !mode.evolves_temperature() {
        state.theta.iter_mut().flatten().for_each(|t| *t = 1.0);
    }
    let limit = bt_cfl_limit(state, p, grid, mode);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let mut h = dt;
    let mut last = None;
    for _ in 0..=10 {
        match try_step(state, p, grid, h, mode) {
            Ok(next) => {
                *state = next;
                return Ok(h);
            }
            Err(e @ Error::NonPositive { .. }) => {
                last = Some(e);
                h *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Defect("step rejection without cause".into())))
}

/// `−Σ_i ∫[n_i(log n_i − 1) + (3/2) n_i (log(m_i/2πθ_i) − 1)] dx`, `n_i = ρ_i/m_i`.
pub fn bt_entropy(state: &MacroStateBT, p: &MixtureParams, grid: &Grid1D) -> f64 {
    let mut s = NeumaierSum::new();
    for i in 0..state.rho.len() {
        for c in 0..state.ncells() {
            s.add(maxwellian_entropy_density(
                state.rho[i][c] / p.m[i],
                state.theta[i][c],
                p.m[i],
            ));
        }
    }
    s.value() * grid.dx
}

/// Entropy production of the non-isothermal system, face quadrature.
pub fn bt_entropy_production(
    state: &MacroStateBT,
    p: &MixtureParams,
    grid: &Grid1D,
) -> Result<f64> {
    let k = state.rho.len();
    let sigma = p.sigma;
    let phi = local_potential(&state.rho, &state.theta, &p.a);
    let mut s = NeumaierSum::new();
    for c in 0..state.ncells() {
        let r = grid.next(c);
        let face = |f: &Vec<f64>| 0.5 * (f[c] + f[r]);
        let diff = |f: &dyn Fn(usize) -> f64| (f(r) - f(c)) / grid.dx;
        let mut th_f = vec![0.0; k];
        let mut dp = vec![0.0; k];
        for i in 0..k {
            th_f[i] = face(&state.theta[i]);
            dp[i] = diff(&|x| state.rho[i][x] * state.theta[i][x]);
        }
        // Pointwise hypothesis: symmetric part of a_ij/(m_i ν_i θ_i) positive semidefinite.
        let b: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| p.a[i][j] / (p.m[i] * p.nu_vec[i] * th_f[i]))
                    .collect()
            })
            .collect();
        let lam = min_sym_eigenvalue(&b);
        if lam < -1e-12 {
            return Err(Error::HypothesisViolated(format!(
                "symmetric part of a_ij/(m_i ν_i θ_i) is indefinite at face {c} (eigenvalue {lam})"
            )));
        }
        let mut term = 0.0;
        for i in 0..k {
            let (m, nu) = (p.m[i], p.nu_vec[i]);
            let rho_f = face(&state.rho[i]);
            let dth = diff(&|x| state.theta[i][x]);
            let dphi = (phi[i][r] - phi[i][c]) / grid.dx;
            term += (sigma / (m * m) * dp[i] * dp[i] / (rho_f * th_f[i])
                + 2.5 * sigma / (m * m) * rho_f / th_f[i] * dth * dth
                + rho_f / (sigma * th_f[i]) * dphi * dphi)
                / nu;
            for j in 0..k {
                term += 2.0 * b[i][j] * dp[i] * dp[j];
            }
        }
        s.add(term);
    }
    Ok(s.value() * grid.dx)
}

pub use crate::macro_ms::IdentityResidual;

/// Centered difference of `H⁰` over `(prev, next)` against the production at `mid`.
pub fn bt_entropy_identity_residual(
    prev: &MacroStateBT,
    mid: &MacroStateBT,
    next: &MacroStateBT,
    p: &MixtureParams,
    grid: &Grid1D,
    dt: f64,
) -> Result<IdentityResidual> {
    let lhs = (bt_entropy(next, p, grid) - bt_entropy(prev, p, grid)) / (2.0 * dt);
    let rhs = bt_entropy_production(mid, p, grid)?;
    Ok(IdentityResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / rhs.abs().max(1.0),
    })
}

/// `E_R = ½ ΣΣ ∫ a_ij ρ_i ρ_j dx`.
pub fn rao_entropy(state: &MacroStateBT, p: &MixtureParams, grid: &Grid1D) -> f64 {
    let k = state.rho.len();
    let mut s = NeumaierSum::new();
    for c in 0..state.ncells() {
        for i in 0..k {
            for j in 0..k {
                s.add(0.5 * p.a[i][j] * state.rho[i][c] * state.rho[j][c]);
            }
        }
    }
    s.value() * grid.dx
}

/// Closed-form `dE_R/dt = −σ ΣΣ ∫ a_ij/(m_iν_i) ρ_i' ρ_j' − Σ ∫ (ρ_i/ν_i)(Σ_j a_ij ρ_j')²`.
pub fn rao_dissipation(state: &MacroStateBT, p: &MixtureParams, grid: &Grid1D) -> f64 {
    let k = state.rho.len();
    let mut s = NeumaierSum::new();
    let mut d = vec![0.0; k];
    for c in 0..state.ncells() {
        let r = grid.next(c);
        for i in 0..k {
            d[i] = (state.rho[i][r] - state.rho[i][c]) / grid.dx;
        }
        for i in 0..k {
            let rho_f = 0.5 * (state.rho[i][c] + state.rho[i][r]);
            let mut drift = 0.0;
            for j in 0..k {
                s.add(-p.sigma * p.a[i][j] / (p.m[i] * p.nu_vec[i]) * d[i] * d[j]);
                drift += p.a[i][j] * d[j];
            }
            s.add(-rho_f / p.nu_vec[i] * drift * drift);
        }
    }
    s.value() * grid.dx
}

/// Rao functional along a trajectory, with monotonicity and rate checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaoTrajectory {
    pub values: Vec<f64>,
    /// Largest `(E_R(t+dt) − E_R(t))/|E_R(t)|`; nonpositive for a dissipative run.
    pub max_rel_increase: f64,
    /// Largest `|FD dE_R/dt − closed form| / |closed form|` over interior points.
    pub max_rate_mismatch: f64,
}

/// Requires isothermal states, symmetric positive-definite `a` and `m_i ν_i = 1`.
pub fn rao_entropy_trajectory(
    states: &[MacroStateBT],
    p: &MixtureParams,
    grid: &Grid1D,
    dt: f64,
) -> Result<RaoTrajectory> {
    for (i, (&m, &nu)) in p.m.iter().zip(&p.nu_vec).enumerate() {
        if (m * nu - 1.0).abs() > 1e-12 {
            return Err(Error::HypothesisViolated(format!(
                "m_i ν_i = {} for species {i}, expected 1",
                m * nu
            )));
        }
    }
    let k = p.species;
    for i in 0..k {
        for j in 0..k {
            if (p.a[i][j] - p.a[j][i]).abs() > 1e-14 {
                return Err(Error::HypothesisViolated(
                    "interaction matrix is not symmetric".into(),
                ));
            }
        }
    }
    if min_sym_eigenvalue(&p.a) <= 0.0 {
        return Err(Error::HypothesisViolated(
            "interaction matrix is not positive definite".into(),
        ));
    }
    if states
        .iter()
        .any(|s| s.theta.iter().flatten().any(|&t| t != 1.0))
    {
        return Err(Error::HypothesisViolated(
            "Rao functional requires θ ≡ 1".into(),
        ));
    }
    let values: Vec<f64> = states.iter().map(|s| rao_entropy(s, p, grid)).collect();
    let max_rel_increase = values
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut max_rate_mismatch: f64 = 0.0;
    for n in 1..states.len().saturating_sub(1) {
        let fd = (values[n + 1] - values[n - 1]) / (2.0 * dt);
        let exact = rao_dissipation(&states[n], p, grid);
        if exact != 0.0 {
            max_rate_mismatch = max_rate_mismatch.max((fd - exact).abs() / exact.abs());
        }
    }
    Ok(RaoTrajectory {
        values,
        max_rel_increase,
        max_rate_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn local_potential_examples() {
        let z = local_potential(&[vec![1.0, 2.0]], &[vec![1.0, 1.0]], &[vec![0.0]]);
        assert!(z[0].iter().all(|&x| x == 0.0));
        let phi = local_potential(&[vec![2.0]], &[vec![3.0]], &[vec![1.0]]);
        assert_eq!(phi[0][0], -6.0);
        let phi2 = local_potential(&[vec![4.0]], &[vec![3.0]], &[vec![1.0]]);
        assert_eq!(phi2[0][0], 2.0 * phi[0][0]);
    }

    #[test]
    fn uniform_is_stationary_in_every_mode() {
        let mut p = MixtureParams::uniform(2, 0.1);
        p.a = vec![vec![1.0, 0.3], vec![0.3, 1.0]];
        let g = Grid1D::new(1.0, 16).unwrap();
        for mode in [
            BtMode::NonIsothermal,
            BtMode::Isothermal,
            BtMode::Classical,
            BtMode::HighField,
        ] {
            let mut s =
                MacroStateBT::new(vec![vec![0.7; 16], vec![1.2; 16]], vec![vec![1.0; 16]; 2])
                    .unwrap();
            let s0 = s.clone();
            bt_step(&mut s, &p, &g, 1e-4, mode).unwrap();
            assert_eq!(s.rho, s0.rho);
            assert_eq!(s.theta, s0.theta);
        }
    }

    #[test]
    fn heat_equation_decay() {
        let mut p = MixtureParams::uniform(1, 0.1);
        p.a = vec![vec![0.0]];
        p.nu_vec = vec![2.0];
        p.m = vec![1.5];
        let g = Grid1D::new(1.0, 64).unwrap();
        let rho: Vec<f64> = g
            .centers()
            .iter()
            .map(|x| 1.0 + 0.1 * (2.0 * PI * x).cos())
            .collect();
        let mut s = MacroStateBT::new(vec![rho], vec![vec![1.0; 64]]).unwrap();
        let dt = 0.5 * bt_cfl_limit(&s, &p, &g, BtMode::Isothermal);
        let steps = 400;
        for _ in 0..steps {
            bt_step(&mut s, &p, &g, dt, BtMode::Isothermal).unwrap();
        }
        let amp = s.rho[0]
            .iter()
            .zip(g.centers())
            .map(|(r, x)| (r - 1.0) * (2.0 * PI * x).cos())
            .sum::<f64>()
            * 2.0
            * g.dx;
        let rate = -(amp / 0.1).ln() / (dt * steps as f64);
        let expect = 4.0 * PI * PI / (2.0 * 1.5);
        assert!((rate - expect).abs() < 0.02 * expect, "{rate} vs {expect}");
    }

    #[test]
    fn classical_total_density_stays_uniform() {
        let mut p = MixtureParams::uniform(2, 0.1);
        p.a = vec![vec![1.0; 2]; 2];
        let g = Grid1D::new(1.0, 64).unwrap();
        let r1: Vec<f64> = g
            .centers()
            .iter()
            .map(|x| 0.5 + 0.2 * (2.0 * PI * x).sin())
            .collect();
        let r2: Vec<f64> = r1.iter().map(|r| 1.0 - r).collect();
        let mut s = MacroStateBT::new(vec![r1, r2], vec![vec![1.0; 64]; 2]).unwrap();
        let dt = 0.5 * bt_cfl_limit(&s, &p, &g, BtMode::Classical);
        for _ in 0..200 {
            bt_step(&mut s, &p, &g, dt, BtMode::Classical).unwrap();
        }
        for c in 0..64 {
            assert!((s.rho[0][c] + s.rho[1][c] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_examples() {
        let mut p = MixtureParams::uniform(1, 0.1);
        p.m = vec![2.0 * PI];
        let g = Grid1D::new(1.0, 8).unwrap();
        let s = MacroStateBT::new(vec![vec![2.0 * PI; 8]], vec![vec![1.0; 8]]).unwrap();
        assert!((bt_entropy(&s, &p, &g) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn rao_initial_value() {
        let p = MixtureParams::uniform(1, 0.1);
        let g = Grid1D::new(1.0, 128).unwrap();
        let rho: Vec<f64> = g
            .centers()
            .iter()
            .map(|x| 1.0 + 0.1 * (2.0 * PI * x).cos())
            .collect();
        let s = MacroStateBT::new(vec![rho], vec![vec![1.0; 128]]).unwrap();
        assert!((rao_entropy(&s, &p, &g) - 0.5 * 1.005).abs() < 1e-14);
    }

    #[test]
    fn indefinite_interaction_rejected() {
        let mut p = MixtureParams::uniform(2, 0.1);
        p.a = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let g = Grid1D::new(1.0, 8).unwrap();
        let mut s = MacroStateBT::new(vec![vec![1.0; 8]; 2], vec![vec![1.0; 8]; 2]).unwrap();
        assert!(bt_step(&mut s, &p, &g, 1e-5, BtMode::HighField).is_err());
    }
}
