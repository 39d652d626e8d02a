//! BGK model with a Brinkman force.
//!
//! `∂t f_i + (σ/ε) ξ₁ ∂x f_i + (1/ε) ∂xφ_i ∂ξ₁ f_i = (σν_i/ε²)(M_i − f_i)`,
//! with `−ε φ_i'' + φ_i = −Σ_j a_ij ρ_j θ_j`. The high-field regime is the
//! same equation at `σ = √ε`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::NeumaierSum;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, VelocityGrid1D};
use crate::kinetic::entropy::bb_kinetic_entropy;
use crate::kinetic::transport::{advect_coupled_with, transport_with_speed, Boundary, Limiter};
use crate::maxwellian::add_reduced_pair;
use crate::params::{MixtureParams, RegimeKind};
use crate::state::KineticState;

/// Solves `−ε (φ_{k−1} − 2φ_k + φ_{k+1})/dx² + φ_k = rhs_k` on a periodic grid.
pub fn brinkman_solve(rhs: &[f64], eps: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    let n = rhs.len();
    if n != grid.ncells {
        return Err(Error::ShapeMismatch(format!(
            "rhs has {n} entries for {} cells",
            grid.ncells
        )));
    }
    if rhs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Defect("non-finite Brinkman right-hand side".into()));
    }
    let off = -eps / (grid.dx * grid.dx);
    let diag = 1.0 - 2.0 * off;
    if off == 0.0 {
        return Ok(rhs.to_vec());
    }
    // Sherman–Morrison: A = T + u vᵀ with u = (γ, 0, …, 0, off), v = (1, 0, …, 0, off/γ).
    let gamma = -diag;
    let mut b = vec![diag; n];
    b[0] -= gamma;
    b[n - 1] -= off * off / gamma;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = off;
    let x = thomas(off, &b, off, rhs);
    let z = thomas(off, &b, off, &u);
    let fact = (x[0] + off * x[n - 1] / gamma) / (1.0 + z[0] + off * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

fn thomas(a: f64, b: &[f64], c: f64, d: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c / b[0];
    dp[0] = d[0] / b[0];
    for k in 1..n {
        let m = b[k] - a * cp[k - 1];
        cp[k] = c / m;
        dp[k] = (d[k] - a * dp[k - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for k in (0..n - 1).rev() {
        x[k] = dp[k] - cp[k] * x[k + 1];
    }
    x
}

/// Residual `max_k |L φ − rhs|_k / max(‖rhs‖_∞, 1e-300)` of a Brinkman solve.
pub fn brinkman_residual(phi: &[f64], rhs: &[f64], eps: f64, grid: &Grid1D) -> f64 {
    let n = phi.len();
    let k2 = eps / (grid.dx * grid.dx);
    let scale = rhs.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
    (0..n)
        .map(|k| {
            let lap = phi[grid.prev(k)] - 2.0 * phi[k] + phi[grid.next(k)];
            (-k2 * lap + phi[k] - rhs[k]).abs()
        })
        .fold(0.0, f64::max)
        / scale
}

/// Per-species potentials and their derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrinkmanField {
    pub phi: Vec<Vec<f64>>,
    /// `(φ_{k+1} − φ_k)/dx` at face `k + 1/2`.
    pub grad_face: Vec<Vec<f64>>,
    /// `(φ_{k+1} − φ_{k−1})/(2dx)` at cell `k`.
    pub grad_cell: Vec<Vec<f64>>,
}

impl BrinkmanField {
    pub fn max_abs_grad(&self) -> f64 {
        self.grad_cell
            .iter()
            .flatten()
            .fold(0.0, |a, b| a.max(b.abs()))
    }
}

/// `−Σ_j a_ij ρ_j θ_j` per cell.
pub fn pressure_rhs(a: &[Vec<f64>], rho: &[Vec<f64>], theta: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = rho.len();
    let nc = rho.first().map_or(0, |r| r.len());
    (0..k)
        .map(|i| {
            (0..nc)
                .map(|c| {
                    -(0..k)
                        .map(|j| a[i][j] * rho[j][c] * theta[j][c])
                        .sum::<f64>()
                })
                .collect()
        })
        .collect()
}

/// Brinkman potentials from per-cell `ρ` and `θ`.
pub fn brinkman_field_from(
    a: &[Vec<f64>],
    rho: &[Vec<f64>],
    theta: &[Vec<f64>],
    eps: f64,
    grid: &Grid1D,
) -> Result<BrinkmanField> {
    let rhs = pressure_rhs(a, rho, theta);
    let mut phi = Vec::with_capacity(rhs.len());
    for r in &rhs {
        phi.push(brinkman_solve(r, eps, grid)?);
    }
    let grad_face = phi
        .iter()
        .map(|p| {
            (0..grid.ncells)
                .map(|k| (p[grid.next(k)] - p[k]) / grid.dx)
                .collect()
        })
        .collect();
    let grad_cell = phi
        .iter()
        .map(|p| {
            (0..grid.ncells)
                .map(|k| (p[grid.next(k)] - p[grid.prev(k)]) / (2.0 * grid.dx))
                .collect()
        })
        .collect();
    Ok(BrinkmanField {
        phi,
        grad_face,
        grad_cell,
    })
}

/// Brinkman potentials of the state's cached moments.
pub fn brinkman_field(
    state: &KineticState,
    p: &MixtureParams,
    grid: &Grid1D,
) -> Result<BrinkmanField> {
    let rho: Vec<Vec<f64>> = state
        .n
        .iter()
        .zip(&state.m)
        .map(|(n, m)| n.iter().map(|x| x * m).collect())
        .collect();
    brinkman_field_from(&p.a, &rho, &state.theta, p.eps, grid)
}

/// The σ in effect: the configured value, or √ε in the high-field regime.
pub fn effective_sigma(p: &MixtureParams, regime: RegimeKind) -> f64 {
    match regime {
        RegimeKind::Diffusive => p.sigma,
        RegimeKind::HighField => p.eps.sqrt(),
    }
}

/// `0.9 · min(ε dx/(σ ξ_max), ε dξ/max|φ'|)`.
pub fn bb_cfl_limit(
    p: &MixtureParams,
    regime: RegimeKind,
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    max_grad: f64,
) -> f64 {
    let sigma = effective_sigma(p, regime);
    let x = p.eps * grid.dx / (sigma * vgrid.xi_max);
    let f = if max_grad > 0.0 {
        p.eps * vgrid.weight / max_grad
    } else {
        f64::INFINITY
    };
    0.9 * x.min(f)
}

/// Velocity-space advection `∂t f + (φ_i'/ε) ∂ξ₁ f = 0` over `dt`, per cell.
///
/// Returns the largest escaped mass per species relative to its total.
pub fn force_substep(
    state: &mut KineticState,
    field: &BrinkmanField,
    vgrid: &VelocityGrid1D,
    eps: f64,
    dt: f64,
) -> Vec<f64> {
    let nv = state.nnodes;
    let mut choices = Vec::with_capacity(nv);
    let mut flux = Vec::with_capacity(nv + 1);
    let mut rel = Vec::with_capacity(state.species());
    for i in 0..state.species() {
        let total: f64 = state.g[i].iter().sum();
        let mut lost = NeumaierSum::new();
        for c in 0..state.ncells {
            let courant = field.grad_cell[i][c] / eps * dt / vgrid.weight;
            let s = c * nv..(c + 1) * nv;
            let (g, h) = (&mut state.g[i][s.clone()], &mut state.h[i][s]);
            lost.add(
                advect_coupled_with(
                    g,
                    &mut [h],
                    courant,
                    Boundary::ZeroInflow,
                    Limiter::Positive,
                    &mut choices,
                    &mut flux,
                )
                .abs(),
            );
        }
        rel.push(lost.value() / total);
    }
    rel
}

/// Temperature of the relaxation target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// The cached total temperature, so relaxation conserves energy.
    #[default]
    Energy,
    /// θ ≡ 1, the isothermal model.
    Isothermal,
}

/// Exact relaxation `f ← M_i + (f − M_i) e^{−σν_i dt/ε²}` toward the zero-mean
/// Maxwellian sharing the cached `n_i` and total temperature `θ_i`.
pub fn bb_relaxation_substep(
    state: &mut KineticState,
    p: &MixtureParams,
    sigma: f64,
    vgrid: &VelocityGrid1D,
    dt: f64,
) {
    bb_relaxation_substep_with(state, p, sigma, vgrid, dt, Closure::Energy);
}

/// As [`bb_relaxation_substep`] with the target temperature set by `closure`.
pub fn bb_relaxation_substep_with(
    state: &mut KineticState,
    p: &MixtureParams,
    sigma: f64,
    vgrid: &VelocityGrid1D,
    dt: f64,
    closure: Closure,
) {
    let nv = state.nnodes;
    for i in 0..state.species() {
        let keep = (-sigma * p.nu_vec[i] * dt / (p.eps * p.eps)).exp();
        for c in 0..state.ncells {
            let theta = match closure {
                Closure::Energy => state.theta[i][c],
                Closure::Isothermal => 1.0,
            };
            let s = c * nv..(c + 1) * nv;
            let (g, h) = (&mut state.g[i][s.clone()], &mut state.h[i][s]);
            g.iter_mut().for_each(|x| *x *= keep);
            h.iter_mut().for_each(|x| *x *= keep);
            add_reduced_pair(
                g,
                h,
                state.n[i][c],
                0.0,
                theta,
                state.m[i],
                &vgrid.nodes,
                1.0 - keep,
            );
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BBStepReport {
    pub dt: f64,
    pub mass: Vec<f64>,
    pub energy: f64,
    pub entropy: f64,
    pub outflow: f64,
}

/// One Strang step: x(dt/2), force(dt/2), relax(dt), force(dt/2), x(dt/2).
///
/// The potentials are recomputed from the current moments before each force half-step.
pub fn bb_step(
    state: &mut KineticState,
    p: &MixtureParams,
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    dt: f64,
    regime: RegimeKind,
) -> Result<BBStepReport> {
    bb_step_with(state, p, grid, vgrid, dt, regime, Closure::Energy)
}

/// As [`bb_step`] with the relaxation closure given.
pub fn bb_step_with(
    state: &mut KineticState,
    p: &MixtureParams,
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    dt: f64,
    regime: RegimeKind,
    closure: Closure,
) -> Result<BBStepReport> {
    let eps = p.eps;
    let sigma = effective_sigma(p, regime);
    let field = brinkman_field(state, p, grid)?;
    let limit = bb_cfl_limit(p, regime, grid, vgrid, field.max_abs_grad());
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let check = |out: Vec<f64>| -> Result<f64> {
        let worst = out.iter().cloned().fold(0.0, f64::max);
        match out.iter().position(|&o| o > 1e-12) {
            Some(i) => Err(Error::VelocityDomain {
                outflow: out[i],
                species: i,
            }),
            None => Ok(worst),
        }
    };
    transport_with_speed(state, grid, vgrid, sigma / eps, 0.5 * dt);
    state.refresh_moments(vgrid)?;
    let field = brinkman_field(state, p, grid)?;
    let mut outflow = check(force_substep(state, &field, vgrid, eps, 0.5 * dt))?;
    state.refresh_moments(vgrid)?;
    bb_relaxation_substep_with(state, p, sigma, vgrid, dt, closure);
    state.refresh_moments(vgrid)?;
    let field = brinkman_field(state, p, grid)?;
    outflow = outflow.max(check(force_substep(state, &field, vgrid, eps, 0.5 * dt))?);
    transport_with_speed(state, grid, vgrid, sigma / eps, 0.5 * dt);
    state.refresh_moments(vgrid)?;
    Ok(BBStepReport {
        dt,
        mass: state.raw_masses(grid, vgrid),
        energy: state.energy(grid, vgrid),
        entropy: bb_kinetic_entropy(state, vgrid, grid)?,
        outflow,
    })
}

/// `E_pot = −Σ_i (m_i/2) ∫ φ_i n_i dx` and the Rao functional `E_R = ½ ΣΣ ∫ a_ij ρ_i ρ_j dx`.
pub fn potential_energy_rao(
    state: &KineticState,
    p: &MixtureParams,
    grid: &Grid1D,
) -> Result<(f64, f64)> {
    let field = brinkman_field(state, p, grid)?;
    let k = state.species();
    let mut pot = NeumaierSum::new();
    let mut rao = NeumaierSum::new();
    for c in 0..state.ncells {
        for i in 0..k {
            pot.add(-0.5 * state.m[i] * field.phi[i][c] * state.n[i][c]);
            for j in 0..k {
                rao.add(0.5 * p.a[i][j] * state.m[i] * state.n[i][c] * state.m[j] * state.n[j][c]);
            }
        }
    }
    Ok((pot.value() * grid.dx, rao.value() * grid.dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{init_kinetic_state, ThetaConvention};
    use std::f64::consts::PI;

    #[test]
    fn constant_rhs_is_exact() {
        let g = Grid1D::new(1.0, 32).unwrap();
        let phi = brinkman_solve(&vec![2.5; 32], 0.1, &g).unwrap();
        assert!(phi.iter().all(|p| (p - 2.5).abs() < 1e-13));
        let r: Vec<f64> = (0..32).map(|k| (k as f64).sin()).collect();
        assert_eq!(brinkman_solve(&r, 0.0, &g).unwrap(), r);
    }

    #[test]
    fn fourier_mode() {
        let g = Grid1D::new(1.0, 256).unwrap();
        let eps = 0.05;
        let rhs: Vec<f64> = g.centers().iter().map(|x| (2.0 * PI * x).cos()).collect();
        let phi = brinkman_solve(&rhs, eps, &g).unwrap();
        assert!(brinkman_residual(&phi, &rhs, eps, &g) < 1e-12);
        let amp = 1.0 / (1.0 + eps * 4.0 * PI * PI);
        for (p, r) in phi.iter().zip(&rhs) {
            assert!((p - amp * r).abs() < 1e-4);
        }
    }

    #[test]
    fn maximum_principle() {
        let g = Grid1D::new(1.0, 64).unwrap();
        let rhs: Vec<f64> = (0..64)
            .map(|k| if k % 7 < 3 { 1.0 } else { -0.5 })
            .collect();
        let phi = brinkman_solve(&rhs, 0.3, &g).unwrap();
        assert!(phi.iter().all(|p| *p <= 1.0 + 1e-14 && *p >= -0.5 - 1e-14));
    }

    #[test]
    fn uniform_state_potential_is_local() {
        let mut p = MixtureParams::uniform(2, 0.1);
        p.a = vec![vec![1.0, 0.5], vec![0.5, 2.0]];
        p.m = vec![1.0, 2.0];
        let grid = Grid1D::new(1.0, 16).unwrap();
        let vg = VelocityGrid1D::for_mixture(1.0, &p.m, 0.0, 64).unwrap();
        let s = init_kinetic_state(
            &grid,
            &vg,
            |i, _| (1.0 + i as f64, 0.0, 1.0 - 0.2 * i as f64),
            &p,
            1.0,
            ThetaConvention::Total,
        )
        .unwrap();
        let f = brinkman_field(&s, &p, &grid).unwrap();
        for i in 0..2 {
            let expect = -(0..2)
                .map(|j| p.a[i][j] * s.m[j] * s.n[j][0] * s.theta[j][0])
                .sum::<f64>();
            assert!(f.phi[i].iter().all(|x| (x - expect).abs() < 1e-13));
        }
    }

    #[test]
    fn equilibrium_without_interaction_is_fixed() {
        let mut p = MixtureParams::uniform(2, 0.1);
        p.a = vec![vec![0.0; 2]; 2];
        let grid = Grid1D::new(1.0, 16).unwrap();
        let vg = VelocityGrid1D::for_mixture(1.0, &p.m, 0.0, 64).unwrap();
        let mut s = init_kinetic_state(
            &grid,
            &vg,
            |_, _| (1.0, 0.0, 1.0),
            &p,
            1.0,
            ThetaConvention::Total,
        )
        .unwrap();
        let s0 = s.clone();
        let dt = bb_cfl_limit(&p, RegimeKind::Diffusive, &grid, &vg, 0.0);
        bb_step(&mut s, &p, &grid, &vg, dt, RegimeKind::Diffusive).unwrap();
        for (a, b) in s.g[0].iter().zip(&s0.g[0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_relaxation_decay() {
        let mut p = MixtureParams::uniform(1, 0.2);
        p.a = vec![vec![0.0]];
        p.nu_vec = vec![1.3];
        let grid = Grid1D::new(1.0, 8).unwrap();
        let vg = VelocityGrid1D::new(9.0, 96).unwrap();
        let u0 = 0.4;
        let mut s = init_kinetic_state(
            &grid,
            &vg,
            |_, _| (1.0, u0, 1.2),
            &p,
            1.0,
            ThetaConvention::Total,
        )
        .unwrap();
        let dt = bb_cfl_limit(&p, RegimeKind::Diffusive, &grid, &vg, 0.0);
        let steps = 20;
        for _ in 0..steps {
            bb_step(&mut s, &p, &grid, &vg, dt, RegimeKind::Diffusive).unwrap();
        }
        let t = dt * steps as f64;
        let expect = u0 * (-p.sigma * 1.3 * t / (0.2 * 0.2)).exp();
        assert!((s.v[0][3] - expect).abs() < 1e-10);
        assert!((s.theta[0][3] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn rao_examples() {
        let mut p = MixtureParams::uniform(1, 1e-3);
        let grid = Grid1D::new(1.0, 16).unwrap();
        let vg = VelocityGrid1D::new(8.0, 64).unwrap();
        let s = init_kinetic_state(
            &grid,
            &vg,
            |_, _| (2.0, 0.0, 1.0),
            &p,
            1.0,
            ThetaConvention::Total,
        )
        .unwrap();
        let (pot, rao) = potential_energy_rao(&s, &p, &grid).unwrap();
        assert!((rao - 2.0).abs() < 1e-9);
        assert!((pot - 2.0).abs() < 1e-9);
        p.a = vec![vec![0.0]];
        assert_eq!(potential_energy_rao(&s, &p, &grid).unwrap(), (0.0, 0.0));
    }
}
