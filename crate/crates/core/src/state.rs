//! Field containers for the kinetic and macroscopic solvers.

use serde::{Deserialize, Serialize};

use crate::diagnostics::NeumaierSum;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, VelocityGrid1D};
use crate::maxwellian::{add_reduced_pair, cell_moments};
use crate::params::MixtureParams;

/// How the cached temperature treats the mean drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaConvention {
    /// `3nθ/m = ∫f|ξ|² − n|u|²` (Gross–Krook).
    Peculiar,
    /// `3nθ/m = ∫f|ξ|²` (Brinkman).
    Total,
}

/// Reduced distributions `G_i`, `H_i` laid out `[cell * nnodes + node]`, with cached moments.
///
/// The raw mean velocity of a cell is `velocity_scale * v`: ε for the
/// Gross–Krook scaling, one for the Brinkman model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticState {
    pub ncells: usize,
    pub nnodes: usize,
    pub m: Vec<f64>,
    pub velocity_scale: f64,
    pub convention: ThetaConvention,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub n: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
}

impl KineticState {
    pub fn species(&self) -> usize {
        self.m.len()
    }

    /// Builds a state whose cells hold the reduced Maxwellians of the given moments.
    pub fn from_moments(
        vgrid: &VelocityGrid1D,
        m: &[f64],
        n: &[Vec<f64>],
        v: &[Vec<f64>],
        theta: &[Vec<f64>],
        velocity_scale: f64,
        convention: ThetaConvention,
    ) -> Result<Self> {
        let species = m.len();
        let ncells = n.first().map_or(0, |r| r.len());
        let nv = vgrid.nnodes;
        let mut g = vec![vec![0.0; ncells * nv]; species];
        let mut h = vec![vec![0.0; ncells * nv]; species];
        for i in 0..species {
            for c in 0..ncells {
                let (ni, vi) = (n[i][c], v[i][c]);
                let u = velocity_scale * vi;
                let ti = match convention {
                    ThetaConvention::Peculiar => theta[i][c],
                    ThetaConvention::Total => theta[i][c] - m[i] * u * u / 3.0,
                };
                if !(ni > 0.0) || !ni.is_finite() {
                    return Err(Error::NonPositive {
                        field: "density",
                        cell: c,
                        species: i,
                    });
                }
                if !(ti > 0.0) || !ti.is_finite() {
                    return Err(Error::NonPositive {
                        field: "temperature",
                        cell: c,
                        species: i,
                    });
                }
                let s = c * nv..(c + 1) * nv;
                add_reduced_pair(
                    &mut g[i][s.clone()],
                    &mut h[i][s],
                    ni,
                    u,
                    ti,
                    m[i],
                    &vgrid.nodes,
                    1.0,
                );
            }
        }
        let mut st = KineticState {
            ncells,
            nnodes: nv,
            m: m.to_vec(),
            velocity_scale,
            convention,
            g,
            h,
            n: vec![vec![0.0; ncells]; species],
            v: vec![vec![0.0; ncells]; species],
            theta: vec![vec![0.0; ncells]; species],
        };
        st.refresh_moments(vgrid)?;
        Ok(st)
    }

    /// Recomputes the cached `(n, v, θ)` from the discrete distributions.
    pub fn refresh_moments(&mut self, vgrid: &VelocityGrid1D) -> Result<()> {
        let nv = self.nnodes;
        for i in 0..self.species() {
            for c in 0..self.ncells {
                let s = c * nv..(c + 1) * nv;
                let cm = cell_moments(
                    &self.g[i][s.clone()],
                    &self.h[i][s],
                    &vgrid.nodes,
                    vgrid.weight,
                    self.m[i],
                )
                .ok_or(Error::VacuumCell {
                    cell: c,
                    species: i,
                })?;
                self.n[i][c] = cm.n;
                self.v[i][c] = cm.u / self.velocity_scale;
                self.theta[i][c] = match self.convention {
                    ThetaConvention::Peculiar => cm.theta,
                    ThetaConvention::Total => cm.theta + self.m[i] * cm.u * cm.u / 3.0,
                };
            }
        }
        Ok(())
    }

    /// `∫ n_i dx` per species.
    pub fn masses(&self, grid: &Grid1D) -> Vec<f64> {
        self.n
            .iter()
            .map(|r| sum(r.iter().copied()) * grid.dx)
            .collect()
    }

    /// Raw total momentum `Σ_i m_i ∫∫ f_i ξ₁`, straight from the distributions.
    pub fn momentum(&self, grid: &Grid1D, vgrid: &VelocityGrid1D) -> f64 {
        let mut s = NeumaierSum::new();
        for i in 0..self.species() {
            for (k, &gk) in self.g[i].iter().enumerate() {
                s.add(self.m[i] * gk * vgrid.nodes[k % self.nnodes]);
            }
        }
        s.value() * vgrid.weight * grid.dx
    }

    /// Raw total energy `Σ_i m_i ∫∫ f_i |ξ|²`.
    pub fn energy(&self, grid: &Grid1D, vgrid: &VelocityGrid1D) -> f64 {
        let mut s = NeumaierSum::new();
        for i in 0..self.species() {
            for (k, (&gk, &hk)) in self.g[i].iter().zip(&self.h[i]).enumerate() {
                let xi = vgrid.nodes[k % self.nnodes];
                s.add(self.m[i] * (gk * xi * xi + hk));
            }
        }
        s.value() * vgrid.weight * grid.dx
    }

    /// Discrete mass `Σ w G` per species, directly from the distributions.
    pub fn raw_masses(&self, grid: &Grid1D, vgrid: &VelocityGrid1D) -> Vec<f64> {
        self.g
            .iter()
            .map(|g| sum(g.iter().copied()) * vgrid.weight * grid.dx)
            .collect()
    }
}

fn sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut s = NeumaierSum::new();
    it.for_each(|x| s.add(x));
    s.value()
}

/// Initializes a kinetic state from per-species profiles `(species, x) ↦ (n, v, θ)`.
pub fn init_kinetic_state<F>(
    grid: &Grid1D,
    vgrid: &VelocityGrid1D,
    profile: F,
    p: &MixtureParams,
    velocity_scale: f64,
    convention: ThetaConvention,
) -> Result<KineticState>
where
    F: Fn(usize, f64) -> (f64, f64, f64),
{
    let k = p.species;
    let mut n = vec![vec![0.0; grid.ncells]; k];
    let mut v = n.clone();
    let mut t = n.clone();
    for i in 0..k {
        for c in 0..grid.ncells {
            let (a, b, d) = profile(i, grid.center(c));
            n[i][c] = a;
            v[i][c] = b;
            t[i][c] = d;
        }
    }
    KineticState::from_moments(vgrid, &p.m, &n, &v, &t, velocity_scale, convention)
}

/// Number densities, cell velocities and a single mixture temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroStateMS {
    pub n: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
}

impl MacroStateMS {
    pub fn new(n: Vec<Vec<f64>>, theta: Vec<f64>) -> Result<Self> {
        for (i, row) in n.iter().enumerate() {
            if row.len() != theta.len() {
                return Err(Error::ShapeMismatch(
                    "density and temperature lengths differ".into(),
                ));
            }
            if let Some(c) = row.iter().position(|x| !(*x > 0.0)) {
                return Err(Error::NonPositive {
                    field: "density",
                    cell: c,
                    species: i,
                });
            }
        }
        if let Some(c) = theta.iter().position(|x| !(*x > 0.0)) {
            return Err(Error::NonPositive {
                field: "temperature",
                cell: c,
                species: 0,
            });
        }
        let v = vec![vec![0.0; theta.len()]; n.len()];
        Ok(MacroStateMS { n, v, theta })
    }

    pub fn ncells(&self) -> usize {
        self.theta.len()
    }
}

/// Mass densities, per-species temperatures and potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroStateBT {
    pub rho: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}

impl MacroStateBT {
    pub fn new(rho: Vec<Vec<f64>>, theta: Vec<Vec<f64>>) -> Result<Self> {
        if rho.len() != theta.len() || rho.iter().zip(&theta).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::ShapeMismatch(
                "density and temperature shapes differ".into(),
            ));
        }
        for i in 0..rho.len() {
            if let Some(c) = rho[i].iter().position(|x| !(*x > 0.0)) {
                return Err(Error::NonPositive {
                    field: "density",
                    cell: c,
                    species: i,
                });
            }
            if let Some(c) = theta[i].iter().position(|x| !(*x > 0.0)) {
                return Err(Error::NonPositive {
                    field: "temperature",
                    cell: c,
                    species: i,
                });
            }
        }
        let phi = vec![vec![0.0; rho.first().map_or(0, |r| r.len())]; rho.len()];
        Ok(MacroStateBT { rho, theta, phi })
    }

    pub fn ncells(&self) -> usize {
        self.rho.first().map_or(0, |r| r.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Grid1D, VelocityGrid1D, MixtureParams) {
        (
            Grid1D::new(1.0, 16).unwrap(),
            VelocityGrid1D::new(8.0, 64).unwrap(),
            MixtureParams::uniform(2, 0.1),
        )
    }

    #[test]
    fn constant_profile_density() {
        let (g, vg, p) = setup();
        let s = init_kinetic_state(
            &g,
            &vg,
            |_, _| (1.0, 0.0, 1.0),
            &p,
            0.1,
            ThetaConvention::Peculiar,
        )
        .unwrap();
        assert!(s.n.iter().flatten().all(|n| (n - 1.0).abs() < 1e-10));
        assert!(s.v.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn identical_species_identical_arrays() {
        let (g, vg, p) = setup();
        let prof = |_: usize, x: f64| (1.0 + 0.2 * (6.0 * x).cos(), 0.3, 1.0 + 0.1 * x);
        let s = init_kinetic_state(&g, &vg, prof, &p, 0.1, ThetaConvention::Peculiar).unwrap();
        assert_eq!(s.g[0], s.g[1]);
        assert_eq!(s.h[0], s.h[1]);
    }

    #[test]
    fn rejects_nonpositive_profile() {
        let (g, vg, p) = setup();
        let r = init_kinetic_state(
            &g,
            &vg,
            |_, x| (x - 0.5, 0.0, 1.0),
            &p,
            0.1,
            ThetaConvention::Peculiar,
        );
        assert!(matches!(
            r,
            Err(Error::NonPositive {
                field: "density",
                ..
            })
        ));
    }

    #[test]
    fn macro_states_validate() {
        assert!(MacroStateMS::new(vec![vec![1.0, 0.0]], vec![1.0, 1.0]).is_err());
        assert!(MacroStateBT::new(vec![vec![1.0, 1.0]], vec![vec![1.0, -1.0]]).is_err());
        assert!(MacroStateBT::new(vec![vec![1.0, 1.0]], vec![vec![1.0, 1.0]]).is_ok());
    }
}
