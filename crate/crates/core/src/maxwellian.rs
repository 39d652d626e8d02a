//! Maxwellians, closed-form Gaussian moments, and quadrature oracles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::VelocityGrid1D;

/// Velocity moments of a distribution on ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentTable {
    pub zeroth: f64,
    pub first: [f64; 3],
    pub second_trace: f64,
    pub second_tensor_diag: [f64; 3],
    pub third_vector: [f64; 3],
    pub fourth_tensor_diag: [f64; 3],
}

impl MomentTable {
    /// Largest entrywise relative deviation, measured against `scale` per entry group.
    pub fn max_rel_diff(&self, other: &MomentTable) -> f64 {
        let rel = |a: f64, b: f64, s: f64| (a - b).abs() / s.max(f64::MIN_POSITIVE);
        let s0 = self.zeroth.abs().max(other.zeroth.abs());
        let s2 = self.second_trace.abs().max(other.second_trace.abs());
        let s1 = (s0 * s2).sqrt();
        let s4 = self
            .fourth_tensor_diag
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        let s3 = (s2 * s4).sqrt().max(s2 * s1 / s0.max(f64::MIN_POSITIVE));
        let mut worst = rel(self.zeroth, other.zeroth, s0);
        worst = worst.max(rel(self.second_trace, other.second_trace, s2));
        for a in 0..3 {
            worst = worst.max(rel(self.first[a], other.first[a], s1));
            worst = worst.max(rel(
                self.second_tensor_diag[a],
                other.second_tensor_diag[a],
                s2,
            ));
            worst = worst.max(rel(self.third_vector[a], other.third_vector[a], s3));
            worst = worst.max(rel(
                self.fourth_tensor_diag[a],
                other.fourth_tensor_diag[a],
                s4,
            ));
        }
        worst
    }
}

/// Per-cell hydrodynamic moments extracted from a reduced pair.
///
/// `u` is the raw mean velocity `∫fξ₁/∫f`; the Gross–Krook solver divides it by ε.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellMoments {
    pub n: f64,
    pub u: f64,
    pub theta: f64,
}

fn check_theta_m(theta: f64, m: f64) -> Result<()> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Defect(format!(
            "temperature must be positive: {theta}"
        )));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Defect(format!("mass must be positive: {m}")));
    }
    Ok(())
}

/// `n (m/2πθ)^{3/2} exp(-m|ξ-v|²/2θ)`.
pub fn eval_maxwellian(n: f64, v_shift: [f64; 3], theta: f64, m: f64, xi: [f64; 3]) -> Result<f64> {
    check_theta_m(theta, m)?;
    if n < 0.0 {
        return Err(Error::Defect(format!("density must be nonnegative: {n}")));
    }
    let d2: f64 = (0..3).map(|a| (xi[a] - v_shift[a]).powi(2)).sum();
    Ok(n * (m / (2.0 * PI * theta)).powf(1.5) * (-m * d2 / (2.0 * theta)).exp())
}

/// Adds `scale` times the reduced pair `(G_M, H_M)` of a Maxwellian to `g` and `h`.
///
/// No validation; callers guarantee positive θ and m.
#[inline]
pub fn add_reduced_pair(
    g: &mut [f64],
    h: &mut [f64],
    n: f64,
    u: f64,
    theta: f64,
    m: f64,
    nodes: &[f64],
    scale: f64,
) {
    let pref = scale * n * (m / (2.0 * PI * theta)).sqrt();
    let b = m / (2.0 * theta);
    let hfac = 2.0 * theta / m;
    for (k, &xi) in nodes.iter().enumerate() {
        let d = xi - u;
        let val = pref * (-b * d * d).exp();
        g[k] += val;
        h[k] += hfac * val;
    }
}

/// Samples `G_M = n (m/2πθ)^{1/2} exp(-m(ξ₁-v)²/2θ)` and `H_M = (2θ/m) G_M`.
pub fn reduced_maxwellian_pair(
    n: f64,
    v: f64,
    theta: f64,
    m: f64,
    vgrid: &VelocityGrid1D,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_theta_m(theta, m)?;
    if !(n > 0.0) {
        return Err(Error::Defect(format!("density must be positive: {n}")));
    }
    let mut g = vec![0.0; vgrid.nnodes];
    let mut h = vec![0.0; vgrid.nnodes];
    add_reduced_pair(&mut g, &mut h, n, v, theta, m, &vgrid.nodes, 1.0);
    Ok((g, h))
}

/// Closed-form moments of the centered Maxwellian.
pub fn analytic_moments_m0(n: f64, theta: f64, m: f64) -> MomentTable {
    analytic_moments_shifted(n, [0.0; 3], theta, m)
}

/// Closed-form moments of the Maxwellian with mean velocity `eps_v`.
///
/// Zeroth `n`, first `n·εv`, trace `3nθ/m + n|εv|²`; the higher entries are the
/// matching Gaussian moments, reducing to `nθ/m·I` and `5nθ²/m²·I` at zero shift.
pub fn analytic_moments_shifted(n: f64, eps_v: [f64; 3], theta: f64, m: f64) -> MomentTable {
    let s2 = theta / m;
    let u2: f64 = eps_v.iter().map(|u| u * u).sum();
    let mut t = MomentTable {
        zeroth: n,
        second_trace: n * (3.0 * s2 + u2),
        ..Default::default()
    };
    for a in 0..3 {
        let ua = eps_v[a];
        t.first[a] = n * ua;
        t.second_tensor_diag[a] = n * (s2 + ua * ua);
        t.third_vector[a] = n * ua * (u2 + 5.0 * s2);
        let mut fourth = ua.powi(4) + 6.0 * ua * ua * s2 + 3.0 * s2 * s2;
        for (b, &ub) in eps_v.iter().enumerate() {
            if b != a {
                fourth += (ua * ua + s2) * (ub * ub + s2);
            }
        }
        t.fourth_tensor_diag[a] = n * fourth;
    }
    t
}

/// Samples `f` on the tensor grid `vgrid³`, index `(i·n + j)·n + k` for `(ξ₁, ξ₂, ξ₃)`.
pub fn sample_3d(vgrid: &VelocityGrid1D, mut f: impl FnMut([f64; 3]) -> f64) -> Vec<f64> {
    let n = vgrid.nnodes;
    let mut out = Vec::with_capacity(n * n * n);
    for &a in &vgrid.nodes {
        for &b in &vgrid.nodes {
            for &c in &vgrid.nodes {
                out.push(f([a, b, c]));
            }
        }
    }
    out
}

/// Midpoint-rule moments of a function sampled on `vgrid³` (see [`sample_3d`]).
pub fn quadrature_moments_3d(f: &[f64], vgrid: &VelocityGrid1D) -> MomentTable {
    let n = vgrid.nnodes;
    assert_eq!(f.len(), n * n * n, "sample size must be nnodes³");
    let w3 = vgrid.weight.powi(3);
    let x = &vgrid.nodes;
    let mut t = MomentTable::default();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = f[(i * n + j) * n + k];
                if v == 0.0 {
                    continue;
                }
                let xi = [x[i], x[j], x[k]];
                let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                t.zeroth += v;
                t.second_trace += v * r2;
                for a in 0..3 {
                    t.first[a] += v * xi[a];
                    t.second_tensor_diag[a] += v * xi[a] * xi[a];
                    t.third_vector[a] += v * xi[a] * r2;
                    t.fourth_tensor_diag[a] += v * xi[a] * xi[a] * r2;
                }
            }
        }
    }
    t.zeroth *= w3;
    t.second_trace *= w3;
    for a in 0..3 {
        t.first[a] *= w3;
        t.second_tensor_diag[a] *= w3;
        t.third_vector[a] *= w3;
        t.fourth_tensor_diag[a] *= w3;
    }
    t
}

/// Moments of one cell: `n = Σw G`, `n u = Σw G ξ₁`, `3nθ/m = Σw (G ξ₁² + H) - n u²`.
///
/// Returns `None` when the density is not positive.
#[inline]
pub fn cell_moments(g: &[f64], h: &[f64], nodes: &[f64], w: f64, m: f64) -> Option<CellMoments> {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    let nv = nodes.len();
    // Mirror pairs are summed first so even data gives an exactly zero first moment.
    for lo in 0..nv.div_ceil(2) {
        let hi = nv - 1 - lo;
        if hi == lo {
            s0 += g[lo];
            s2 += g[lo] * nodes[lo] * nodes[lo] + h[lo];
            continue;
        }
        s0 += g[lo] + g[hi];
        s1 += g[lo] * nodes[lo] + g[hi] * nodes[hi];
        s2 += (g[lo] * nodes[lo] * nodes[lo] + h[lo]) + (g[hi] * nodes[hi] * nodes[hi] + h[hi]);
    }
    let n = s0 * w;
    if !(n > 0.0) {
        return None;
    }
    let u = s1 * w / n;
    let theta = m * (s2 * w - n * u * u) / (3.0 * n);
    Some(CellMoments { n, u, theta })
}

/// Per-cell moments of reduced arrays laid out `[cell][node]`.
pub fn reduced_moments(
    g: &[f64],
    h: &[f64],
    vgrid: &VelocityGrid1D,
    m: f64,
) -> Result<Vec<CellMoments>> {
    let nv = vgrid.nnodes;
    if g.len() != h.len() || !g.len().is_multiple_of(nv) {
        return Err(Error::ShapeMismatch(
            "G and H must be ncells × nnodes".into(),
        ));
    }
    (0..g.len() / nv)
        .map(|c| {
            let s = c * nv..(c + 1) * nv;
            cell_moments(&g[s.clone()], &h[s], &vgrid.nodes, vgrid.weight, m).ok_or(
                Error::VacuumCell {
                    cell: c,
                    species: 0,
                },
            )
        })
        .collect()
}
