//! Full three-dimensional velocity oracle for the reduced kinetic solvers.
//!
//! Each species carries `f(x, ξ₁, ξ₂, ξ₃)` on `vgrid³`. Transport and force
//! steps replay the limiter decisions of the reduced driver on every
//! transverse line, so the marginals must follow the reduced pair exactly.

#![allow(dead_code)]

use mbgk::grid::{Grid1D, VelocityGrid1D};
use mbgk::kinetic::brinkman::{brinkman_field_from, effective_sigma};
use mbgk::kinetic::gk::gk_relaxation_targets;
use mbgk::kinetic::transport::{
    advect_line, limiter_choices_with, tighten_positive, Boundary, Limiter,
};
use mbgk::maxwellian::eval_maxwellian;
use mbgk::params::{MixtureParams, RegimeKind};
use mbgk::state::ThetaConvention;

pub struct Oracle3D {
    pub ncells: usize,
    pub nv: usize,
    pub m: Vec<f64>,
    pub velocity_scale: f64,
    pub convention: ThetaConvention,
    /// `f[species][cell·nv³ + (a·nv + b)·nv + c]`.
    pub f: Vec<Vec<f64>>,
}

/// `(n, u, θ)` with `u` the raw mean of ξ₁.
#[derive(Debug, Clone, Copy)]
pub struct Moments3 {
    pub n: f64,
    pub u: f64,
    pub theta: f64,
}

impl Oracle3D {
    pub fn new(
        vg: &VelocityGrid1D,
        m: &[f64],
        profile: &[Vec<(f64, f64, f64)>],
        velocity_scale: f64,
        convention: ThetaConvention,
    ) -> Self {
        let nv = vg.nnodes;
        let ncells = profile[0].len();
        let mut f = Vec::new();
        for (i, cells) in profile.iter().enumerate() {
            let mut fi = Vec::with_capacity(ncells * nv * nv * nv);
            for &(n, v, theta) in cells {
                let u = velocity_scale * v;
                let t = match convention {
                    ThetaConvention::Peculiar => theta,
                    ThetaConvention::Total => theta - m[i] * u * u / 3.0,
                };
                for &a in &vg.nodes {
                    for &b in &vg.nodes {
                        for &c in &vg.nodes {
                            fi.push(eval_maxwellian(n, [u, 0.0, 0.0], t, m[i], [a, b, c]).unwrap());
                        }
                    }
                }
            }
            f.push(fi);
        }
        Oracle3D {
            ncells,
            nv,
            m: m.to_vec(),
            velocity_scale,
            convention,
            f,
        }
    }

    fn block(&self) -> usize {
        self.nv * self.nv * self.nv
    }

    /// Moments straight from the 3D samples.
    pub fn moments(&self, vg: &VelocityGrid1D, i: usize, cell: usize) -> Moments3 {
        let nv = self.nv;
        let w3 = vg.weight.powi(3);
        let base = cell * self.block();
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for a in 0..nv {
            for b in 0..nv {
                for c in 0..nv {
                    let v = self.f[i][base + (a * nv + b) * nv + c];
                    let (x, y, z) = (vg.nodes[a], vg.nodes[b], vg.nodes[c]);
                    s0 += v;
                    s1 += v * x;
                    s2 += v * (x * x + y * y + z * z);
                }
            }
        }
        let n = s0 * w3;
        let u = s1 * w3 / n;
        let e = s2 * w3;
        let theta = match self.convention {
            ThetaConvention::Peculiar => self.m[i] * (e - n * u * u) / (3.0 * n),
            ThetaConvention::Total => self.m[i] * e / (3.0 * n),
        };
        Moments3 { n, u, theta }
    }

    fn all_moments(&self, vg: &VelocityGrid1D) -> Vec<Vec<Moments3>> {
        (0..self.m.len())
            .map(|i| (0..self.ncells).map(|c| self.moments(vg, i, c)).collect())
            .collect()
    }

    /// Marginal `G(ξ₁) = ∫∫ f dξ₂ dξ₃` of one cell.
    fn marginal(&self, vg: &VelocityGrid1D, i: usize, cell: usize) -> Vec<f64> {
        let nv = self.nv;
        let w2 = vg.weight * vg.weight;
        let base = cell * self.block();
        (0..nv)
            .map(|a| {
                (0..nv * nv)
                    .map(|bc| self.f[i][base + a * nv * nv + bc])
                    .sum::<f64>()
                    * w2
            })
            .collect()
    }

    /// Transverse-energy marginal `H(ξ₁) = ∫∫ f (ξ₂² + ξ₃²) dξ₂ dξ₃` of one cell.
    fn marginal_h(&self, vg: &VelocityGrid1D, i: usize, cell: usize) -> Vec<f64> {
        let nv = self.nv;
        let w2 = vg.weight * vg.weight;
        let base = cell * self.block();
        (0..nv)
            .map(|a| {
                let mut s = 0.0;
                for b in 0..nv {
                    for c in 0..nv {
                        let r2 = vg.nodes[b] * vg.nodes[b] + vg.nodes[c] * vg.nodes[c];
                        s += self.f[i][base + (a * nv + b) * nv + c] * r2;
                    }
                }
                s * w2
            })
            .collect()
    }

    /// x-advection at speed `scale · ξ₁` with minmod choices from the marginals.
    pub fn transport(&mut self, vg: &VelocityGrid1D, grid: &Grid1D, scale: f64, dt: f64) {
        let (nv, nc, blk) = (self.nv, self.ncells, self.block());
        let mut choices = Vec::new();
        let mut flux = Vec::new();
        let mut line = vec![0.0; nc];
        for i in 0..self.m.len() {
            let marg: Vec<Vec<f64>> = (0..nc).map(|c| self.marginal(vg, i, c)).collect();
            let marg_h: Vec<Vec<f64>> = (0..nc).map(|c| self.marginal_h(vg, i, c)).collect();
            for a in 0..nv {
                let driver: Vec<f64> = (0..nc).map(|c| marg[c][a]).collect();
                limiter_choices_with(&driver, Boundary::Periodic, Limiter::Minmod, &mut choices);
                let follower: Vec<f64> = (0..nc).map(|c| marg_h[c][a]).collect();
                tighten_positive(&follower, Boundary::Periodic, &mut choices);
                let courant = scale * vg.nodes[a] * dt / grid.dx;
                for bc in 0..nv * nv {
                    let off = a * nv * nv + bc;
                    for c in 0..nc {
                        line[c] = self.f[i][c * blk + off];
                    }
                    advect_line(&mut line, &choices, courant, Boundary::Periodic, &mut flux);
                    for c in 0..nc {
                        self.f[i][c * blk + off] = line[c];
                    }
                }
            }
        }
    }

    /// ξ₁-advection at speed `grad/ε` per cell, positivity-limited choices from both marginals.
    pub fn force(&mut self, vg: &VelocityGrid1D, grad: &[Vec<f64>], eps: f64, dt: f64) {
        let (nv, blk) = (self.nv, self.block());
        let mut choices = Vec::new();
        let mut flux = Vec::new();
        let mut line = vec![0.0; nv];
        for i in 0..self.m.len() {
            for c in 0..self.ncells {
                let driver = self.marginal(vg, i, c);
                limiter_choices_with(
                    &driver,
                    Boundary::ZeroInflow,
                    Limiter::Positive,
                    &mut choices,
                );
                tighten_positive(
                    &self.marginal_h(vg, i, c),
                    Boundary::ZeroInflow,
                    &mut choices,
                );
                let courant = grad[i][c] / eps * dt / vg.weight;
                for bc in 0..nv * nv {
                    for a in 0..nv {
                        line[a] = self.f[i][c * blk + a * nv * nv + bc];
                    }
                    advect_line(
                        &mut line,
                        &choices,
                        courant,
                        Boundary::ZeroInflow,
                        &mut flux,
                    );
                    for a in 0..nv {
                        self.f[i][c * blk + a * nv * nv + bc] = line[a];
                    }
                }
            }
        }
    }

    fn relax_toward(
        &mut self,
        vg: &VelocityGrid1D,
        i: usize,
        cell: usize,
        keep: f64,
        parts: &[(f64, f64, f64, f64)],
    ) {
        let nv = self.nv;
        let base = cell * self.block();
        for a in 0..nv {
            for b in 0..nv {
                for c in 0..nv {
                    let xi = [vg.nodes[a], vg.nodes[b], vg.nodes[c]];
                    let target: f64 = parts
                        .iter()
                        .map(|&(w, n, u, t)| {
                            w * eval_maxwellian(n, [u, 0.0, 0.0], t, self.m[i], xi).unwrap()
                        })
                        .sum();
                    let k = base + (a * nv + b) * nv + c;
                    self.f[i][k] = keep * self.f[i][k] + (1.0 - keep) * target;
                }
            }
        }
    }

    /// Gross–Krook relaxation from the 3D moments.
    pub fn gk_relax(&mut self, vg: &VelocityGrid1D, p: &MixtureParams, dt: f64) {
        let k = self.m.len();
        for c in 0..self.ncells {
            let mo: Vec<Moments3> = (0..k).map(|i| self.moments(vg, i, c)).collect();
            let n: Vec<f64> = mo.iter().map(|x| x.n).collect();
            let v: Vec<f64> = mo.iter().map(|x| x.u / self.velocity_scale).collect();
            let t: Vec<f64> = mo.iter().map(|x| x.theta).collect();
            let targets = gk_relaxation_targets(p, &n, &v, &t, p.eps, dt).unwrap();
            for (i, tg) in targets.iter().enumerate() {
                let parts: Vec<_> = tg
                    .components
                    .iter()
                    .map(|cp| (cp.weight, tg.n, cp.u, cp.theta))
                    .collect();
                self.relax_toward(vg, i, c, tg.keep, &parts);
            }
        }
    }

    /// Brinkman relaxation toward the zero-mean Maxwellian with the total temperature.
    pub fn bb_relax(&mut self, vg: &VelocityGrid1D, p: &MixtureParams, sigma: f64, dt: f64) {
        for i in 0..self.m.len() {
            let keep = (-sigma * p.nu_vec[i] * dt / (p.eps * p.eps)).exp();
            for c in 0..self.ncells {
                let mo = self.moments(vg, i, c);
                self.relax_toward(vg, i, c, keep, &[(1.0, mo.n, 0.0, mo.theta)]);
            }
        }
    }

    pub fn gk_step(&mut self, vg: &VelocityGrid1D, grid: &Grid1D, p: &MixtureParams, dt: f64) {
        self.transport(vg, grid, 1.0 / p.eps, 0.5 * dt);
        self.gk_relax(vg, p, dt);
        self.transport(vg, grid, 1.0 / p.eps, 0.5 * dt);
    }

    fn field_grad(&self, vg: &VelocityGrid1D, grid: &Grid1D, p: &MixtureParams) -> Vec<Vec<f64>> {
        let mo = self.all_moments(vg);
        let rho: Vec<Vec<f64>> = mo
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|x| x.n * self.m[i]).collect())
            .collect();
        let theta: Vec<Vec<f64>> = mo
            .iter()
            .map(|r| r.iter().map(|x| x.theta).collect())
            .collect();
        brinkman_field_from(&p.a, &rho, &theta, p.eps, grid)
            .unwrap()
            .grad_cell
    }

    pub fn bb_step(
        &mut self,
        vg: &VelocityGrid1D,
        grid: &Grid1D,
        p: &MixtureParams,
        dt: f64,
        regime: RegimeKind,
    ) {
        let sigma = effective_sigma(p, regime);
        self.transport(vg, grid, sigma / p.eps, 0.5 * dt);
        let g = self.field_grad(vg, grid, p);
        self.force(vg, &g, p.eps, 0.5 * dt);
        self.bb_relax(vg, p, sigma, dt);
        let g = self.field_grad(vg, grid, p);
        self.force(vg, &g, p.eps, 0.5 * dt);
        self.transport(vg, grid, sigma / p.eps, 0.5 * dt);
    }
}

/// Largest relative disagreement between the oracle moments and a reduced state:
/// `|Δn|/n`, `|Δu|/√(θ/m)` and `|Δθ|/θ`.
pub fn moment_gap(o: &Oracle3D, vg: &VelocityGrid1D, s: &mbgk::KineticState) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..o.m.len() {
        for c in 0..o.ncells {
            let a = o.moments(vg, i, c);
            let (n, u, t) = (s.n[i][c], s.v[i][c] * s.velocity_scale, s.theta[i][c]);
            worst = worst
                .max((a.n - n).abs() / n)
                .max((a.u - u).abs() / (t / o.m[i]).sqrt())
                .max((a.theta - t).abs() / t);
        }
    }
    worst
}
