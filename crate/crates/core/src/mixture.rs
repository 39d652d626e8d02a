//! Pairwise mixture closures: α, β, v_ij, θ_ij, Maxwell–Stefan coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::VelocityGrid1D;
use crate::maxwellian::{eval_maxwellian, sample_3d};
use crate::params::MixtureParams;

pub type Matrix = Vec<Vec<f64>>;

/// All closure quantities for one spatial point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFields {
    pub alpha: Matrix,
    pub beta: Matrix,
    pub v_mix: Matrix,
    pub theta_mix: Matrix,
    pub d: Matrix,
    pub nu_i: Vec<f64>,
    pub v_bar: Vec<f64>,
}

impl MixtureFields {
    pub fn compute(
        p: &MixtureParams,
        n: &[f64],
        v: &[f64],
        theta: &[f64],
        eps: f64,
    ) -> Result<Self> {
        let rho: Vec<f64> = n.iter().zip(&p.m).map(|(n, m)| n * m).collect();
        let (alpha, beta) = alphas_betas(&p.nu_matrix, &rho, n);
        let v_mix = mix_velocity(&alpha, v);
        let theta_mix = mix_temperature(&alpha, &beta, &p.m, theta, v, eps)?;
        let d = ms_coefficients(&p.nu_matrix, &p.m, n);
        let (v_bar, nu_i) = mean_velocity_bar(&p.nu_matrix, &alpha, v);
        Ok(MixtureFields {
            alpha,
            beta,
            v_mix,
            theta_mix,
            d,
            nu_i,
            v_bar,
        })
    }
}

/// `α_ij = ν_ij ρ_i/(ν_ij ρ_i + ν_ji ρ_j)` and `β_ij = ν_ij n_i/(ν_ij n_i + ν_ji n_j)`.
pub fn alphas_betas(nu: &[Vec<f64>], rho: &[f64], n: &[f64]) -> (Matrix, Matrix) {
    let k = rho.len();
    let mut alpha = vec![vec![0.0; k]; k];
    let mut beta = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let a = nu[i][j] * rho[i];
            alpha[i][j] = a / (a + nu[j][i] * rho[j]);
            let b = nu[i][j] * n[i];
            beta[i][j] = b / (b + nu[j][i] * n[j]);
        }
    }
    (alpha, beta)
}

/// `v_ij = α_ij v_i + α_ji v_j`.
pub fn mix_velocity(alpha: &[Vec<f64>], v: &[f64]) -> Matrix {
    let k = v.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = if i <= j {
                alpha[i][j] * v[i] + alpha[j][i] * v[j]
            } else {
                out[j][i]
            };
        }
    }
    out
}

/// The manifestly positive form of θ_ij for a single pair.
#[inline]
pub fn theta_pair(
    alpha_ij: f64,
    alpha_ji: f64,
    beta_ij: f64,
    beta_ji: f64,
    mi: f64,
    mj: f64,
    ti: f64,
    tj: f64,
    dv: f64,
    eps: f64,
) -> f64 {
    beta_ij * ti
        + beta_ji * tj
        + eps * eps / 3.0 * alpha_ij * alpha_ji * (beta_ij * mi + beta_ji * mj) * dv * dv
}

/// θ_ij from both closed forms; errors if they disagree beyond 1e-12 relative.
pub fn mix_temperature(
    alpha: &[Vec<f64>],
    beta: &[Vec<f64>],
    m: &[f64],
    theta: &[f64],
    v: &[f64],
    eps: f64,
) -> Result<Matrix> {
    let k = v.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let (a_ij, a_ji, b_ij, b_ji) = (alpha[i][j], alpha[j][i], beta[i][j], beta[j][i]);
            let second = theta_pair(
                a_ij,
                a_ji,
                b_ij,
                b_ji,
                m[i],
                m[j],
                theta[i],
                theta[j],
                v[i] - v[j],
                eps,
            );
            let vij = a_ij * v[i] + a_ji * v[j];
            let first = b_ij * theta[i]
                + b_ji * theta[j]
                + eps * eps / 3.0
                    * (b_ij * m[i] * (v[i] * v[i] - vij * vij)
                        + b_ji * m[j] * (v[j] * v[j] - vij * vij));
            if (first - second).abs() > 1e-12 * second.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::Defect(format!(
                    "mixture temperature forms disagree for pair ({i},{j}): {first} vs {second}"
                )));
            }
            if !(second > 0.0) {
                return Err(Error::Defect(format!(
                    "mixture temperature not positive for pair ({i},{j})"
                )));
            }
            out[i][j] = second;
            out[j][i] = second;
        }
    }
    Ok(out)
}

/// `D_ij = ν_ij ν_ji m_i m_j/(ν_ij m_i n_i + ν_ji m_j n_j)`.
pub fn ms_coefficients(nu: &[Vec<f64>], m: &[f64], n: &[f64]) -> Matrix {
    let k = m.len();
    let mut d = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            d[i][j] = nu[i][j] * nu[j][i] * m[i] * m[j]
                / (nu[i][j] * m[i] * n[i] + nu[j][i] * m[j] * n[j]);
        }
    }
    d
}

/// `v̄_i = Σ_j ν_ij (α_ij v_i + α_ji v_j)/ν_i` together with `ν_i = Σ_j ν_ij`.
pub fn mean_velocity_bar(nu: &[Vec<f64>], alpha: &[Vec<f64>], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = v.len();
    let mut vbar = vec![0.0; k];
    let mut nu_i = vec![0.0; k];
    for i in 0..k {
        let mut s = 0.0;
        for j in 0..k {
            nu_i[i] += nu[i][j];
            s += nu[i][j] * (alpha[i][j] * v[i] + alpha[j][i] * v[j]);
        }
        vbar[i] = s / nu_i[i];
    }
    (vbar, nu_i)
}

/// Exchange integrals of one species pair, normalized by `ν_ij n_i max(1, θ_i/m_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

impl PairResidual {
    pub fn max_abs(&self) -> f64 {
        self.mass
            .abs()
            .max(self.momentum.abs())
            .max(self.energy.abs())
    }
}

/// Quadrature check that the closed-form `M_ij` conserve mass, momentum and energy.
pub fn invariance_residuals(
    p: &MixtureParams,
    n: &[f64],
    v: &[f64],
    theta: &[f64],
    eps: f64,
    nodes_per_axis: usize,
) -> Result<Vec<PairResidual>> {
    invariance_residuals_perturbed(p, n, v, theta, eps, nodes_per_axis, 1.0)
}

/// As [`invariance_residuals`], with every off-diagonal θ_ij multiplied by `theta_scale`.
pub fn invariance_residuals_perturbed(
    p: &MixtureParams,
    n: &[f64],
    v: &[f64],
    theta: &[f64],
    eps: f64,
    nodes_per_axis: usize,
    theta_scale: f64,
) -> Result<Vec<PairResidual>> {
    let k = p.species;
    let f = MixtureFields::compute(p, n, v, theta, eps)?;
    let mut tmix = f.theta_mix.clone();
    for (i, row) in tmix.iter_mut().enumerate() {
        for (j, t) in row.iter_mut().enumerate() {
            if i != j {
                *t *= theta_scale;
            }
        }
    }
    // One grid per species, sized to that species' own widths.
    let mut grids = Vec::with_capacity(k);
    for i in 0..k {
        let tmax = tmix[i].iter().cloned().fold(theta[i], f64::max);
        let vmax = f.v_mix[i].iter().fold(v[i].abs(), |a, b| a.max(b.abs()));
        grids.push(VelocityGrid1D::new(
            8.0 * (tmax / p.m[i]).sqrt() + eps * vmax,
            nodes_per_axis,
        )?);
    }

    // ∫Q_ij (1, m_i ξ₁, m_i |ξ|²) with Q_ij = ν_ij (M_ij − f_i).
    let exchange = |i: usize, j: usize| -> Result<[f64; 3]> {
        let vg = &grids[i];
        let w3 = vg.weight.powi(3);
        let mij = sample_3d(vg, |x| {
            eval_maxwellian(n[i], [eps * f.v_mix[i][j], 0.0, 0.0], tmix[i][j], p.m[i], x)
                .unwrap_or(f64::NAN)
        });
        let fi = sample_3d(vg, |x| {
            eval_maxwellian(n[i], [eps * v[i], 0.0, 0.0], theta[i], p.m[i], x).unwrap_or(f64::NAN)
        });
        let nv = vg.nnodes;
        let mut s = [0.0; 3];
        for a in 0..nv {
            for b in 0..nv {
                for c in 0..nv {
                    let idx = (a * nv + b) * nv + c;
                    let q = p.nu_matrix[i][j] * (mij[idx] - fi[idx]);
                    let (x1, x2, x3) = (vg.nodes[a], vg.nodes[b], vg.nodes[c]);
                    s[0] += q;
                    s[1] += q * p.m[i] * x1;
                    s[2] += q * p.m[i] * (x1 * x1 + x2 * x2 + x3 * x3);
                }
            }
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Defect("non-finite exchange integral".into()));
        }
        Ok([s[0] * w3, s[1] * w3, s[2] * w3])
    };

    let mut own = vec![vec![[0.0; 3]; k]; k];
    for i in 0..k {
        for j in 0..k {
            own[i][j] = exchange(i, j)?;
        }
    }
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let scale = p.nu_matrix[i][j] * n[i] * (theta[i] / p.m[i]).max(1.0);
            out.push(PairResidual {
                i,
                j,
                mass: own[i][j][0] / scale,
                momentum: (own[i][j][1] + own[j][i][1]) / scale,
                energy: (own[i][j][2] + own[j][i][2]) / scale,
            });
        }
    }
    Ok(out)
}
