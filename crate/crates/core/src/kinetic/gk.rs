//! Gross–Krook multispecies BGK solver in the diffusion scaling.
//!
//! `∂t f_i + (ξ₁/ε) ∂x f_i = ε⁻² Σ_j ν_ij (M_ij − f_i)`, split as
//! transport(dt/2), relaxation(dt), transport(dt/2).
//!
//! With `n_i` frozen the moment exchange is linear in `v` and, given `v(t)`,
//! linear in `θ`, so the relaxed moments are computed in closed form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, VelocityGrid1D};
use crate::kinetic::entropy::kinetic_entropy;
use crate::kinetic::transport::transport_substep;
use crate::maxwellian::add_reduced_pair;
use crate::mixture::{alphas_betas, theta_pair};
use crate::params::MixtureParams;
use crate::state::KineticState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GKStepReport {
    pub dt: f64,
    pub mass: Vec<f64>,
    pub momentum: f64,
    pub energy: f64,
    pub entropy: f64,
    /// The relaxation is solved in closed form, so this is always 1.
    pub relax_iterations: usize,
}

/// Shifted Maxwellian `M(n, u, θ)` in a relaxation target, weighted by `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetComponent {
    pub weight: f64,
    /// Raw mean velocity (already multiplied by ε).
    pub u: f64,
    pub theta: f64,
}

/// `f_new = keep · f_old + (1 − keep) · Σ weight · M(n, u, θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesTarget {
    pub n: f64,
    pub keep: f64,
    pub components: Vec<TargetComponent>,
}

/// `(e^{bT} − e^{aT})/(b − a)`, stable when `a ≈ b`.
fn exp_diff(a: f64, b: f64, t: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let z = -(hi - lo) * t;
    let phi = if z.abs() < 1e-8 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    };
    (hi * t).exp() * t * phi
}

/// Symmetrizes `A` with `diag(w)`: returns eigenvalues and `P` with `A = P Λ P⁻¹`, plus `P⁻¹`.
fn spectral(a: &DMatrix<f64>, w: &[f64]) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let k = w.len();
    let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut s = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            s[(i, j)] = sq[i] * a[(i, j)] / sq[j];
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let q = eig.eigenvectors;
    let mut p = q.clone();
    let mut pinv = q.transpose();
    for i in 0..k {
        for j in 0..k {
            p[(i, j)] /= sq[i];
            pinv[(j, i)] *= sq[i];
        }
    }
    (eig.eigenvalues, p, pinv)
}

/// Exact solution of the homogeneous moment exchange over `dt`, one cell.
///
/// Returns relaxed `(v, θ)`; `n` is unchanged.
pub fn relax_cell_gk(
    p: &MixtureParams,
    n: &[f64],
    v: &[f64],
    theta: &[f64],
    eps: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = n.len();
    let big_t = dt / (eps * eps);
    let rho: Vec<f64> = n.iter().zip(&p.m).map(|(a, b)| a * b).collect();
    let (alpha, beta) = alphas_betas(&p.nu_matrix, &rho, n);
    let nu = &p.nu_matrix;

    let mut a = DMatrix::zeros(k, k);
    let mut l = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i != j {
                a[(i, j)] = nu[i][j] * alpha[j][i];
                a[(i, i)] -= nu[i][j] * alpha[j][i];
                l[(i, j)] = nu[i][j] * beta[j][i];
                l[(i, i)] -= nu[i][j] * beta[j][i];
            }
        }
    }

    let (mu, pv, pvinv) = spectral(&a, &rho);
    let c = &pvinv * DVector::from_column_slice(v);
    let v_new: Vec<f64> = (&pv
        * DVector::from_iterator(k, (0..k).map(|q| c[q] * (mu[q] * big_t).exp())))
    .iter()
    .copied()
    .collect();

    // R_i(v) = vᵀ W_i v: heating from friction and the drift part of the energy exchange.
    let e2 = eps * eps / 3.0;
    let mut w: Vec<DMatrix<f64>> = vec![DMatrix::zeros(k, k); k];
    for i in 0..k {
        let wi = &mut w[i];
        for j in 0..k {
            if j == i {
                continue;
            }
            let cij = alpha[i][j] * alpha[j][i] * (beta[i][j] * p.m[i] + beta[j][i] * p.m[j]);
            let f = nu[i][j] * cij;
            wi[(i, i)] += f;
            wi[(j, j)] += f;
            wi[(i, j)] -= f;
            wi[(j, i)] -= f;
            let g = p.m[i] * nu[i][j];
            let (ai, aj) = (alpha[i][j], alpha[j][i]);
            wi[(i, i)] += g * (ai * ai - 1.0);
            wi[(j, j)] += g * aj * aj;
            wi[(i, j)] += g * ai * aj;
            wi[(j, i)] += g * ai * aj;
        }
        for j in 0..k {
            wi[(i, j)] -= p.m[i] * a[(i, j)];
            wi[(j, i)] -= p.m[i] * a[(i, j)];
        }
        *wi *= e2;
    }

    let (lam, pt, ptinv) = spectral(&l, n);
    let z0 = &ptinv * DVector::from_column_slice(theta);
    let mut z = DVector::from_iterator(k, (0..k).map(|q| z0[q] * (lam[q] * big_t).exp()));
    let modes: Vec<DVector<f64>> = (0..k).map(|q| pv.column(q) * c[q]).collect();
    for kk in 0..k {
        for ll in 0..k {
            let rate = mu[kk] + mu[ll];
            let r = DVector::from_iterator(
                k,
                (0..k).map(|i| (modes[kk].transpose() * &w[i] * &modes[ll])[(0, 0)]),
            );
            let proj = &ptinv * r;
            for q in 0..k {
                z[q] += proj[q] * exp_diff(lam[q], rate, big_t);
            }
        }
    }
    let theta_new: Vec<f64> = (&pt * z).iter().copied().collect();
    if let Some(i) = theta_new.iter().position(|t| !(*t > 0.0)) {
        return Err(Error::NonPositive {
            field: "temperature",
            cell: 0,
            species: i,
        });
    }
    Ok((v_new, theta_new))
}

/// Field-wide relaxed moments; `n` is returned unchanged.
pub fn relax_moments_gk(
    p: &MixtureParams,
    n: &[Vec<f64>],
    v: &[Vec<f64>],
    theta: &[Vec<f64>],
    eps: f64,
    dt: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let k = n.len();
    let nc = n.first().map_or(0, |r| r.len());
    let mut vo = vec![vec![0.0; nc]; k];
    let mut to = vec![vec![0.0; nc]; k];
    for c in 0..nc {
        let col = |f: &[Vec<f64>]| -> Vec<f64> { f.iter().map(|r| r[c]).collect() };
        let (vn, tn) =
            relax_cell_gk(p, &col(n), &col(v), &col(theta), eps, dt).map_err(|e| match e {
                Error::NonPositive { field, species, .. } => Error::NonPositive {
                    field,
                    cell: c,
                    species,
                },
                other => other,
            })?;
        for i in 0..k {
            vo[i][c] = vn[i];
            to[i][c] = tn[i];
        }
    }
    Ok((vo, to))
}

/// Distribution-level relaxation targets for one cell.
///
/// Each species relaxes toward `Σ_j (ν_ij/ν_i) M(n_i, ε(v_ij + δ_i), θ_ij + τ_i)`
/// built from the relaxed moments; the shifts `δ_i`, `τ_i` make the relaxed
/// distribution carry exactly the relaxed momentum and energy.
pub fn gk_relaxation_targets(
    p: &MixtureParams,
    n: &[f64],
    v: &[f64],
    theta: &[f64],
    eps: f64,
    dt: f64,
) -> Result<Vec<SpeciesTarget>> {
    let k = n.len();
    let (vs, ts) = relax_cell_gk(p, n, v, theta, eps, dt)?;
    let rho: Vec<f64> = n.iter().zip(&p.m).map(|(a, b)| a * b).collect();
    let (alpha, beta) = alphas_betas(&p.nu_matrix, &rho, n);
    let big_t = dt / (eps * eps);
    let e2 = eps * eps;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let nu_i: f64 = p.nu_matrix[i].iter().sum();
        let gain = -(-nu_i * big_t).exp_m1();
        let keep = 1.0 - gain;
        let mut comps = Vec::with_capacity(k);
        let mut vmix_avg = 0.0;
        for j in 0..k {
            let wgt = p.nu_matrix[i][j] / nu_i;
            let vij = alpha[i][j] * vs[i] + alpha[j][i] * vs[j];
            let tij = theta_pair(
                alpha[i][j],
                alpha[j][i],
                beta[i][j],
                beta[j][i],
                p.m[i],
                p.m[j],
                ts[i],
                ts[j],
                vs[i] - vs[j],
                eps,
            );
            vmix_avg += wgt * vij;
            comps.push((wgt, vij, tij));
        }
        let (v_hat, e_hat) = if gain > 0.0 {
            let e_old = 3.0 * n[i] * theta[i] + rho[i] * e2 * v[i] * v[i];
            let e_new = 3.0 * n[i] * ts[i] + rho[i] * e2 * vs[i] * vs[i];
            (v[i] + (vs[i] - v[i]) / gain, e_old + (e_new - e_old) / gain)
        } else {
            (vs[i], 3.0 * n[i] * ts[i] + rho[i] * e2 * vs[i] * vs[i])
        };
        let delta = v_hat - vmix_avg;
        let mut e_comp = 0.0;
        for &(wgt, vij, tij) in &comps {
            e_comp += wgt * (3.0 * n[i] * tij + rho[i] * e2 * (vij + delta).powi(2));
        }
        let tau = (e_hat - e_comp) / (3.0 * n[i]);
        let mut components = Vec::with_capacity(k);
        for (wgt, vij, tij) in comps {
            let t = tij + tau;
            if !(t > 0.0) {
                return Err(Error::NonPositive {
                    field: "relaxation target temperature",
                    cell: 0,
                    species: i,
                });
            }
            components.push(TargetComponent {
                weight: wgt,
                u: eps * (vij + delta),
                theta: t,
            });
        }
        out.push(SpeciesTarget {
            n: n[i],
            keep,
            components,
        });
    }
    Ok(out)
}

/// Largest stable step `0.9 ε dx / ξ_max`.
pub fn gk_cfl_limit(eps: f64, grid: &Grid1D, vgrid: &VelocityGrid1D) -> f64 {
    0.9 * eps * grid.dx / vgrid.xi_max
}

/// Relaxation substep on every cell, using the cached moments.
pub fn relaxation_substep(
    state: &mut KineticState,
    p: &MixtureParams,
    vgrid: &VelocityGrid1D,
    eps: f64,
    dt: f64,
) -> Result<()> {
    let k = state.species();
    let nv = state.nnodes;
    let mut n = vec![0.0; k];
    let mut v = vec![0.0; k];
    let mut t = vec![0.0; k];
    for c in 0..state.ncells {
        for i in 0..k {
            n[i] = state.n[i][c];
            v[i] = state.v[i][c];
            t[i] = state.theta[i][c];
        }
        let targets = gk_relaxation_targets(p, &n, &v, &t, eps, dt).map_err(|e| match e {
            Error::NonPositive { field, species, .. } => Error::NonPositive {
                field,
                cell: c,
                species,
            },
            other => other,
        })?;
        for (i, tg) in targets.iter().enumerate() {
            let s = c * nv..(c + 1) * nv;
            let g = &mut state.g[i][s.clone()];
            let h = &mut state.h[i][s];
            g.iter_mut().for_each(|x| *x *= tg.keep);
            h.iter_mut().for_each(|x| *x *= tg.keep);
            for comp in &tg.components {
                add_reduced_pair(
                    g,
                    h,
                    tg.n,
                    comp.u,
                    comp.theta,
                    state.m[i],
                    &vgrid.nodes,
                    (1.0 - tg.keep) * comp.weight,
                );
            }
        }
    }
    Ok(())
}

/// One Strang step. The state's cached moments are current on return.
pub fn gk_step(
    state: &mut KineticState,
    p: &MixtureParams,
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    dt: f64,
) -> Result<GKStepReport> {
    let eps = p.eps;
    let limit = gk_cfl_limit(eps, grid, vgrid);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    transport_substep(state, grid, vgrid, eps, 0.5 * dt);
    state.refresh_moments(vgrid)?;
    relaxation_substep(state, p, vgrid, eps, dt)?;
    transport_substep(state, grid, vgrid, eps, 0.5 * dt);
    state.refresh_moments(vgrid)?;
    gk_report(state, grid, vgrid, dt)
}

/// Conserved totals and entropy of the current state.
pub fn gk_report(
    state: &KineticState,
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    dt: f64,
) -> Result<GKStepReport> {
    Ok(GKStepReport {
        dt,
        mass: state.raw_masses(grid, vgrid),
        momentum: state.momentum(grid, vgrid),
        energy: state.energy(grid, vgrid),
        entropy: kinetic_entropy(state, vgrid, grid)?,
        relax_iterations: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{init_kinetic_state, ThetaConvention};

    fn params() -> MixtureParams {
        let mut p = MixtureParams::uniform(2, 0.1);
        p.m = vec![1.0, 2.0];
        p.nu_matrix = vec![vec![1.0, 1.5], vec![0.7, 1.2]];
        p
    }

    /// Moment ODE right-hand side in scaled time, straight from the exchange integrals.
    fn ode_rhs(
        p: &MixtureParams,
        n: &[f64],
        v: &[f64],
        t: &[f64],
        eps: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let k = n.len();
        let rho: Vec<f64> = n.iter().zip(&p.m).map(|(a, b)| a * b).collect();
        let (al, be) = alphas_betas(&p.nu_matrix, &rho, n);
        let mut dv = vec![0.0; k];
        let mut de = vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                let vij = al[i][j] * v[i] + al[j][i] * v[j];
                let tij = theta_pair(
                    al[i][j],
                    al[j][i],
                    be[i][j],
                    be[j][i],
                    p.m[i],
                    p.m[j],
                    t[i],
                    t[j],
                    v[i] - v[j],
                    eps,
                );
                dv[i] += p.nu_matrix[i][j] * (vij - v[i]);
                de[i] += p.nu_matrix[i][j]
                    * (3.0 * n[i] * (tij - t[i]) + eps * eps * rho[i] * (vij * vij - v[i] * v[i]));
            }
        }
        let dt: Vec<f64> = (0..k)
            .map(|i| (de[i] - 2.0 * eps * eps * rho[i] * v[i] * dv[i]) / (3.0 * n[i]))
            .collect();
        (dv, dt)
    }

    fn rk4(
        p: &MixtureParams,
        n: &[f64],
        v0: &[f64],
        t0: &[f64],
        eps: f64,
        tau: f64,
        steps: usize,
    ) -> (Vec<f64>, Vec<f64>) {
        let h = tau / steps as f64;
        let (mut v, mut t) = (v0.to_vec(), t0.to_vec());
        let add = |x: &[f64], d: &[f64], s: f64| {
            x.iter().zip(d).map(|(a, b)| a + s * b).collect::<Vec<_>>()
        };
        for _ in 0..steps {
            let (a1, b1) = ode_rhs(p, n, &v, &t, eps);
            let (a2, b2) = ode_rhs(p, n, &add(&v, &a1, h / 2.0), &add(&t, &b1, h / 2.0), eps);
            let (a3, b3) = ode_rhs(p, n, &add(&v, &a2, h / 2.0), &add(&t, &b2, h / 2.0), eps);
            let (a4, b4) = ode_rhs(p, n, &add(&v, &a3, h), &add(&t, &b3, h), eps);
            for i in 0..v.len() {
                v[i] += h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
                t[i] += h / 6.0 * (b1[i] + 2.0 * b2[i] + 2.0 * b3[i] + b4[i]);
            }
        }
        (v, t)
    }

    #[test]
    fn closed_form_matches_ode_oracle() {
        let p = params();
        let n = [1.2, 0.7];
        let v = [0.8, -1.1];
        let t = [1.4, 0.6];
        for eps in [0.3, 1.0] {
            let dt = 0.4 * eps * eps;
            let (va, ta) = relax_cell_gk(&p, &n, &v, &t, eps, dt).unwrap();
            let (vb, tb) = rk4(&p, &n, &v, &t, eps, 0.4, 4000);
            for i in 0..2 {
                assert!((va[i] - vb[i]).abs() < 1e-11, "v {} {}", va[i], vb[i]);
                assert!((ta[i] - tb[i]).abs() < 1e-11, "θ {} {}", ta[i], tb[i]);
            }
        }
    }

    #[test]
    fn equilibrium_is_fixed() {
        let p = params();
        let (v, t) = relax_cell_gk(&p, &[1.0, 2.0], &[0.3, 0.3], &[0.9, 0.9], 0.1, 0.01).unwrap();
        assert!((v[0] - 0.3).abs() < 1e-15 && (v[1] - 0.3).abs() < 1e-15);
        assert!((t[0] - 0.9).abs() < 1e-15 && (t[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn momentum_and_energy_conserved() {
        let p = params();
        let n = [1.2, 0.7];
        let v = [0.8, -1.1];
        let t = [1.4, 0.6];
        let eps = 0.5;
        let (vs, ts) = relax_cell_gk(&p, &n, &v, &t, eps, 0.05).unwrap();
        let mom = |v: &[f64]| n[0] * p.m[0] * v[0] + n[1] * p.m[1] * v[1];
        let en = |v: &[f64], t: &[f64]| {
            (0..2)
                .map(|i| 3.0 * n[i] * t[i] + eps * eps * n[i] * p.m[i] * v[i] * v[i])
                .sum::<f64>()
        };
        assert!((mom(&vs) - mom(&v)).abs() < 1e-13);
        assert!((en(&vs, &ts) - en(&v, &t)).abs() < 1e-13);
    }

    #[test]
    fn long_time_limit_is_barycentric_mean() {
        let p = params();
        let n = [1.2, 0.7];
        let v = [0.8, -1.1];
        let (vs, ts) = relax_cell_gk(&p, &n, &v, &[1.4, 0.6], 0.1, 10.0).unwrap();
        let mean = (1.2 * 0.8 - 0.7 * 2.0 * 1.1) / (1.2 + 1.4);
        assert!((vs[0] - mean).abs() < 1e-12 && (vs[1] - mean).abs() < 1e-12);
        assert!((ts[0] - ts[1]).abs() < 1e-12);
    }

    #[test]
    fn temperature_gap_shrinks_monotonically() {
        let p = params();
        let n = [1.0, 0.5];
        let mut t = vec![1.5, 0.5];
        let mut v = vec![0.0, 0.0];
        let mut gap = 1.0;
        for _ in 0..20 {
            let r = relax_cell_gk(&p, &n, &v, &t, 0.1, 0.002).unwrap();
            v = r.0;
            t = r.1;
            let g = (t[0] - t[1]).abs();
            assert!(g < gap);
            gap = g;
        }
    }

    #[test]
    fn uniform_equilibrium_step_is_fixed_point() {
        let p = params();
        let grid = Grid1D::new(1.0, 16).unwrap();
        let vg = VelocityGrid1D::for_mixture(1.0, &p.m, 0.0, 64).unwrap();
        let mut s = init_kinetic_state(
            &grid,
            &vg,
            |i, _| (1.0 + i as f64, 0.0, 1.0),
            &p,
            p.eps,
            ThetaConvention::Peculiar,
        )
        .unwrap();
        let s0 = s.clone();
        let dt = gk_cfl_limit(p.eps, &grid, &vg);
        gk_step(&mut s, &p, &grid, &vg, dt).unwrap();
        for i in 0..2 {
            for (a, b) in s.g[i].iter().zip(&s0.g[i]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cfl_violation_rejected() {
        let p = params();
        let grid = Grid1D::new(1.0, 16).unwrap();
        let vg = VelocityGrid1D::for_mixture(1.0, &p.m, 0.0, 32).unwrap();
        let mut s = init_kinetic_state(
            &grid,
            &vg,
            |_, _| (1.0, 0.0, 1.0),
            &p,
            p.eps,
            ThetaConvention::Peculiar,
        )
        .unwrap();
        let dt = 2.0 * gk_cfl_limit(p.eps, &grid, &vg);
        assert!(matches!(
            gk_step(&mut s, &p, &grid, &vg, dt),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn permutation_symmetry() {
        let p = MixtureParams::uniform(2, 0.2);
        let grid = Grid1D::new(1.0, 16).unwrap();
        let vg = VelocityGrid1D::for_mixture(1.3, &p.m, 0.0, 48).unwrap();
        let prof = |_: usize, x: f64| {
            (
                1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).cos(),
                0.0,
                1.0 + 0.1 * (2.0 * std::f64::consts::PI * x).sin(),
            )
        };
        let mut s =
            init_kinetic_state(&grid, &vg, prof, &p, p.eps, ThetaConvention::Peculiar).unwrap();
        let dt = gk_cfl_limit(p.eps, &grid, &vg);
        for _ in 0..10 {
            gk_step(&mut s, &p, &grid, &vg, dt).unwrap();
        }
        assert_eq!(s.g[0], s.g[1]);
        assert_eq!(s.h[0], s.h[1]);
    }
}
