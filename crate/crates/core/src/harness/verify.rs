//! Seeded property suites behind `verify`, shared with the acceptance checks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::report::{Case, Report};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, VelocityGrid1D};
use crate::kinetic::brinkman::bb_step;
use crate::kinetic::entropy::kinetic_entropy;
use crate::kinetic::gk::{gk_cfl_limit, gk_step};
use crate::macro_bt::{
    bt_cfl_limit, bt_entropy_identity_residual, bt_step, rao_entropy_trajectory, BtMode,
};
use crate::macro_ms::{
    ms_cfl_limit, ms_entropy_identity_residual, ms_entropy_production, ms_faces, ms_step,
    pressure_nonuniformity,
};
use crate::maxwellian::{
    analytic_moments_m0, analytic_moments_shifted, eval_maxwellian, quadrature_moments_3d,
    sample_3d,
};
use crate::mixture::{alphas_betas, invariance_residuals};
use crate::params::{MixtureParams, RegimeKind};
use crate::state::{init_kinetic_state, MacroStateBT, MacroStateMS, ThetaConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Mixture,
    Moments,
    Entropy,
    Conservation,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixture" => Ok(Suite::Mixture),
            "moments" => Ok(Suite::Moments),
            "entropy" => Ok(Suite::Entropy),
            "conservation" => Ok(Suite::Conservation),
            "all" => Ok(Suite::All),
            _ => Err(Error::Config(format!("unknown suite {s:?}"))),
        }
    }
}

pub const DEFAULT_SEED: u64 = 20_240_611;
const EPS_CHOICES: [f64; 3] = [0.25, 0.5, 1.0];

/// Largest normalized exchange residuals over the draws.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExchangeResiduals {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    /// Largest `|α_ij + α_ji − 1|` and `|β_ij + β_ji − 1|`.
    pub weight_sum: f64,
}

/// Random mixtures with every parameter in `[0.5, 2]` and ε from {0.25, 0.5, 1}.
pub fn exchange_residuals(seed: u64, draws: usize, nodes: usize) -> Result<ExchangeResiduals> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ExchangeResiduals::default();
    for _ in 0..draws {
        let k = rng.random_range(2..=3);
        let mut u = || rng.random_range(0.5..=2.0);
        let mut p = MixtureParams::uniform(k, 0.5);
        p.m = (0..k).map(|_| u()).collect();
        p.nu_matrix = (0..k).map(|_| (0..k).map(|_| u()).collect()).collect();
        let n: Vec<f64> = (0..k).map(|_| u()).collect();
        let v: Vec<f64> = (0..k).map(|_| u()).collect();
        let theta: Vec<f64> = (0..k).map(|_| u()).collect();
        let eps = EPS_CHOICES[rng.random_range(0..3)];
        p.eps = eps;
        for r in invariance_residuals(&p, &n, &v, &theta, eps, nodes)? {
            out.mass = out.mass.max(r.mass.abs());
            out.momentum = out.momentum.max(r.momentum.abs());
            out.energy = out.energy.max(r.energy.abs());
        }
        let rho: Vec<f64> = n.iter().zip(&p.m).map(|(a, b)| a * b).collect();
        let (al, be) = alphas_betas(&p.nu_matrix, &rho, &n);
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    out.weight_sum = out
                        .weight_sum
                        .max((al[i][j] + al[j][i] - 1.0).abs())
                        .max((be[i][j] + be[j][i] - 1.0).abs());
                }
            }
        }
    }
    Ok(out)
}

/// Largest relative deviations of quadrature moments from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentDeviations {
    /// Centered Maxwellian, full table (second tensor `nθ/m·I`, fourth `5nθ²/m²·I`).
    pub centered: f64,
    /// Shifted Maxwellian: first moment `εnv` and trace `3nθ/m + ε²n|v|²`.
    pub shifted_low: f64,
    /// Shifted Maxwellian, full table.
    pub shifted_full: f64,
}

pub fn moment_identities(seed: u64, draws: usize, nodes: usize) -> Result<MomentDeviations> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9);
    let mut out = MomentDeviations::default();
    for _ in 0..draws {
        let mut u = || rng.random_range(0.5..=2.0);
        let (n, theta, m) = (u(), u(), u());
        let v = [u(), u(), u()];
        let eps = EPS_CHOICES[rng.random_range(0..3)];
        let ev = v.map(|x| eps * x);
        let shift = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let vg = VelocityGrid1D::for_mixture(theta, &[m], shift, nodes)?;
        let f0 = sample_3d(&vg, |xi| {
            eval_maxwellian(n, [0.0; 3], theta, m, xi).unwrap_or(f64::NAN)
        });
        out.centered = out
            .centered
            .max(quadrature_moments_3d(&f0, &vg).max_rel_diff(&analytic_moments_m0(n, theta, m)));
        let f1 = sample_3d(&vg, |xi| {
            eval_maxwellian(n, ev, theta, m, xi).unwrap_or(f64::NAN)
        });
        let q = quadrature_moments_3d(&f1, &vg);
        let a = analytic_moments_shifted(n, ev, theta, m);
        out.shifted_full = out.shifted_full.max(q.max_rel_diff(&a));
        let scale1 = (a.zeroth * a.second_trace).sqrt();
        let mut low = (q.second_trace - a.second_trace).abs() / a.second_trace;
        for ax in 0..3 {
            low = low.max((q.first[ax] - a.first[ax]).abs() / scale1);
        }
        out.shifted_low = out.shifted_low.max(low);
    }
    Ok(out)
}

/// Drifts of a Gross–Krook run, plus the worst per-step entropy decrease.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GkRunChecks {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    /// Largest `(H_k − H_{k+1})/|H_k|`, zero when H never decreases.
    pub entropy_drop: f64,
    pub steps: usize,
}

/// The two-species mixture used by the conservation checks.
pub fn conservation_mixture(eps: f64) -> MixtureParams {
    let mut p = MixtureParams::uniform(2, eps);
    p.m = vec![1.0, 2.0];
    p.nu_matrix = vec![vec![1.0, 1.5], vec![0.7, 1.2]];
    p
}

pub fn gk_conservation_run(
    ncells: usize,
    nnodes: usize,
    steps: usize,
    eps: f64,
) -> Result<GkRunChecks> {
    let p = conservation_mixture(eps);
    let grid = Grid1D::new(1.0, ncells)?;
    let vg = VelocityGrid1D::for_mixture(1.3, &p.m, eps * 0.6, nnodes)?;
    let profile = |i: usize, x: f64| {
        let s = (2.0 * PI * x).sin();
        let c = (2.0 * PI * x).cos();
        match i {
            0 => (1.0 + 0.2 * c, 0.3 * s, 1.0 + 0.2 * s),
            _ => (0.8 - 0.2 * s, -0.4 * c, 0.9 - 0.1 * c),
        }
    };
    let mut st = init_kinetic_state(&grid, &vg, profile, &p, eps, ThetaConvention::Peculiar)?;
    let dt = 0.9 * gk_cfl_limit(eps, &grid, &vg);
    let m0 = st.raw_masses(&grid, &vg);
    let p0 = st.momentum(&grid, &vg);
    let e0 = st.energy(&grid, &vg);
    let mut h_prev = kinetic_entropy(&st, &vg, &grid)?;
    let mut out = GkRunChecks {
        steps,
        ..Default::default()
    };
    for _ in 0..steps {
        let r = gk_step(&mut st, &p, &grid, &vg, dt)?;
        for (a, b) in r.mass.iter().zip(&m0) {
            out.mass = out.mass.max((a - b).abs() / b);
        }
        out.momentum = out.momentum.max((r.momentum - p0).abs() / e0);
        out.energy = out.energy.max((r.energy - e0).abs() / e0);
        out.entropy_drop = out.entropy_drop.max((h_prev - r.entropy) / h_prev.abs());
        h_prev = r.entropy;
    }
    Ok(out)
}

/// Mass drift of a diffusive Brinkman run.
pub fn brinkman_mass_drift(ncells: usize, nnodes: usize, steps: usize, eps: f64) -> Result<f64> {
    let mut p = MixtureParams::uniform(2, eps);
    p.a = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
    let grid = Grid1D::new(1.0, ncells)?;
    let vg = VelocityGrid1D::for_mixture(1.2, &p.m, 1.0, nnodes)?;
    let profile = |i: usize, x: f64| {
        (
            0.5 + 0.1 * (2.0 * PI * (x + 0.3 * i as f64)).cos(),
            0.0,
            1.0,
        )
    };
    let mut st = init_kinetic_state(&grid, &vg, profile, &p, 1.0, ThetaConvention::Total)?;
    let m0 = st.raw_masses(&grid, &vg);
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let f = crate::kinetic::brinkman::brinkman_field(&st, &p, &grid)?;
        let dt = 0.9
            * crate::kinetic::brinkman::bb_cfl_limit(
                &p,
                RegimeKind::Diffusive,
                &grid,
                &vg,
                f.max_abs_grad(),
            );
        let r = bb_step(&mut st, &p, &grid, &vg, dt, RegimeKind::Diffusive)?;
        for (a, b) in r.mass.iter().zip(&m0) {
            worst = worst.max((a - b).abs() / b);
        }
    }
    Ok(worst)
}

/// Maxwell–Stefan test mixture: two unit-mass species with `ν_ij = 1/2`.
pub fn ms_identity_mixture() -> MixtureParams {
    let mut p = MixtureParams::uniform(2, 0.1);
    p.nu_matrix = vec![vec![0.5; 2]; 2];
    p
}

/// `n₁ = 0.5 + 0.15 cos 2πx`, `n₂ = 1 − n₁`, θ = 1: uniform `Σ n_i θ`.
pub fn ms_identity_state(grid: &Grid1D) -> Result<MacroStateMS> {
    let n1: Vec<f64> = grid
        .centers()
        .iter()
        .map(|x| 0.5 + 0.15 * (2.0 * PI * x).cos())
        .collect();
    let n2 = n1.iter().map(|x| 1.0 - x).collect();
    MacroStateMS::new(vec![n1, n2], vec![1.0; grid.ncells])
}

/// Identity residual after `steps` steps of size `dt`, and the smallest production integrand seen.
fn ms_identity_at(ncells: usize, dt: f64, steps: usize) -> Result<(f64, f64)> {
    let p = ms_identity_mixture();
    let grid = Grid1D::new(1.0, ncells)?;
    let mut s = ms_identity_state(&grid)?;
    let mut min_term = f64::INFINITY;
    for _ in 0..steps - 1 {
        ms_step(&mut s, &p, &grid, dt)?;
        min_term = min_term.min(ms_entropy_production(&s, &p, &grid)?.1);
    }
    let prev = s.clone();
    ms_step(&mut s, &p, &grid, dt)?;
    let mid = s.clone();
    ms_step(&mut s, &p, &grid, dt)?;
    Ok((
        ms_entropy_identity_residual(&prev, &mid, &s, &p, &grid, dt)?.residual,
        min_term,
    ))
}

/// Identity residuals at `(dx, dt)` and `(dx/2, dt/4)` at the same time, and
/// the smallest production integrand seen.
pub fn ms_identity_pair(ncells: usize, steps: usize) -> Result<(f64, f64, f64)> {
    let p = ms_identity_mixture();
    let grid = Grid1D::new(1.0, ncells)?;
    let s = ms_identity_state(&grid)?;
    let dt = 0.9 * ms_cfl_limit(&s, &p, &grid, &ms_faces(&s, &p, &grid)?);
    let (coarse, m1) = ms_identity_at(ncells, dt, steps)?;
    let (fine, m2) = ms_identity_at(2 * ncells, dt / 4.0, 4 * steps)?;
    Ok((coarse, fine, m1.min(m2)))
}

/// Worst `max_x |Σ n_i θ − mean|/mean` over `steps` Maxwell–Stefan steps.
pub fn ms_pressure_run(ncells: usize, steps: usize) -> Result<f64> {
    let p = ms_identity_mixture();
    let grid = Grid1D::new(1.0, ncells)?;
    let mut s = ms_identity_state(&grid)?;
    let mut worst = pressure_nonuniformity(&s);
    for _ in 0..steps {
        let dt = 0.9 * ms_cfl_limit(&s, &p, &grid, &ms_faces(&s, &p, &grid)?);
        ms_step(&mut s, &p, &grid, dt)?;
        worst = worst.max(pressure_nonuniformity(&s));
    }
    Ok(worst)
}

/// Busenberg–Travis test mixture: unit masses and frequencies, σ = 1, SPD `a`.
pub fn bt_identity_mixture() -> MixtureParams {
    let mut p = MixtureParams::uniform(2, 0.1);
    p.a = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
    p
}

pub fn bt_identity_state(grid: &Grid1D) -> Result<MacroStateBT> {
    let xs = grid.centers();
    let r1 = xs
        .iter()
        .map(|x| 0.5 + 0.15 * (2.0 * PI * x).cos())
        .collect();
    let r2 = xs
        .iter()
        .map(|x| 0.5 + 0.1 * (2.0 * PI * x).sin())
        .collect();
    let t1 = xs
        .iter()
        .map(|x| 1.0 + 0.1 * (2.0 * PI * x).sin())
        .collect();
    let t2 = xs
        .iter()
        .map(|x| 1.0 - 0.1 * (2.0 * PI * x).cos())
        .collect();
    MacroStateBT::new(vec![r1, r2], vec![t1, t2])
}

fn bt_identity_at(ncells: usize, dt: f64, steps: usize) -> Result<f64> {
    let p = bt_identity_mixture();
    let grid = Grid1D::new(1.0, ncells)?;
    let mut s = bt_identity_state(&grid)?;
    let mode = BtMode::NonIsothermal;
    let go = |s: &mut MacroStateBT| -> Result<()> {
        let used = bt_step(s, &p, &grid, dt, mode)?;
        if used != dt {
            return Err(Error::Defect(
                "step size was reduced during the identity run".into(),
            ));
        }
        Ok(())
    };
    for _ in 0..steps - 1 {
        go(&mut s)?;
    }
    let prev = s.clone();
    go(&mut s)?;
    let mid = s.clone();
    go(&mut s)?;
    Ok(bt_entropy_identity_residual(&prev, &mid, &s, &p, &grid, dt)?.residual)
}

/// Busenberg–Travis identity residuals at `(dx, dt)` and `(dx/2, dt/4)`.
pub fn bt_identity_pair(ncells: usize, steps: usize) -> Result<(f64, f64)> {
    let p = bt_identity_mixture();
    let grid = Grid1D::new(1.0, ncells)?;
    let s = bt_identity_state(&grid)?;
    let dt = 0.9 * bt_cfl_limit(&s, &p, &grid, BtMode::NonIsothermal);
    Ok((
        bt_identity_at(ncells, dt, steps)?,
        bt_identity_at(2 * ncells, dt / 4.0, 4 * steps)?,
    ))
}

/// Rao functional on an isothermal run: worst relative per-step increase and
/// worst mismatch of its rate with the closed-form dissipation.
pub fn rao_run(ncells: usize, steps: usize) -> Result<(f64, f64)> {
    let p = bt_identity_mixture();
    let grid = Grid1D::new(1.0, ncells)?;
    let mut s = bt_identity_state(&grid)?;
    s.theta.iter_mut().flatten().for_each(|t| *t = 1.0);
    let dt = 0.9 * bt_cfl_limit(&s, &p, &grid, BtMode::Isothermal);
    let mut states = vec![s.clone()];
    for _ in 0..steps {
        bt_step(&mut s, &p, &grid, dt, BtMode::Isothermal)?;
        states.push(s.clone());
    }
    let t = rao_entropy_trajectory(&states, &p, &grid, dt)?;
    Ok((t.max_rel_increase, t.max_rate_mismatch))
}

/// Sizes of the checks; the defaults keep `verify all` under a minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub draws: usize,
    pub nodes: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            draws: 20,
            nodes: 48,
        }
    }
}

fn mixture_cases(o: &VerifyOptions) -> Result<Vec<Case>> {
    let r = exchange_residuals(o.seed, o.draws, o.nodes)?;
    Ok(vec![
        Case::at_most("exchange_mass".into(), r.mass, 1e-9),
        Case::at_most("exchange_momentum".into(), r.momentum, 1e-9),
        Case::at_most("exchange_energy".into(), r.energy, 1e-9),
        Case::at_most("weight_sums".into(), r.weight_sum, 1e-15),
    ])
}

fn moment_cases(o: &VerifyOptions) -> Result<Vec<Case>> {
    let r = moment_identities(o.seed, o.draws, o.nodes)?;
    Ok(vec![
        Case::at_most("centered_second_and_fourth".into(), r.centered, 1e-9),
        Case::at_most("shifted_first_and_trace".into(), r.shifted_low, 1e-9),
        Case::at_most("shifted_full_table".into(), r.shifted_full, 1e-9),
    ])
}

fn entropy_cases() -> Result<Vec<Case>> {
    let gk = gk_conservation_run(32, 48, 50, 0.1)?;
    let (c, f, min_term) = ms_identity_pair(64, 10)?;
    let (bc, bf) = bt_identity_pair(64, 10)?;
    let (rao_up, rao_rate) = rao_run(64, 50)?;
    Ok(vec![
        Case::at_most("gk_entropy_decrease".into(), gk.entropy_drop, 1e-10),
        Case::at_most("ms_identity_residual".into(), c, 0.05),
        Case::at_least("ms_identity_refinement_gain".into(), c / f, 3.0),
        Case::at_least("ms_production_integrand".into(), min_term, -1e-14),
        Case::at_most("bt_identity_residual".into(), bc, 0.05),
        Case::at_least("bt_identity_refinement_gain".into(), bc / bf, 3.0),
        Case::at_most("rao_increase".into(), rao_up, 1e-10),
        Case::at_most("rao_rate_mismatch".into(), rao_rate, 0.05),
    ])
}

fn conservation_cases() -> Result<Vec<Case>> {
    let gk = gk_conservation_run(32, 48, 50, 0.1)?;
    Ok(vec![
        Case::at_most("gk_mass_drift".into(), gk.mass, 1e-10),
        Case::at_most("gk_momentum_drift".into(), gk.momentum, 1e-10),
        Case::at_most("gk_energy_drift".into(), gk.energy, 1e-10),
        Case::at_most(
            "brinkman_mass_drift".into(),
            brinkman_mass_drift(32, 48, 50, 0.1)?,
            1e-10,
        ),
        Case::at_most(
            "ms_pressure_uniformity".into(),
            ms_pressure_run(64, 200)?,
            1e-8,
        ),
    ])
}

/// Runs a suite with fixed seeds. Check failures become report entries; a
/// check that cannot run at all is reported as a failing case with NaN.
pub fn verify(suite: Suite, options: &VerifyOptions) -> Report {
    let guard = |name: &str, r: Result<Vec<Case>>| match r {
        Ok(c) => c,
        Err(_) => vec![Case::at_most(format!("{name}_error"), f64::NAN, 0.0)],
    };
    let mut cases = Vec::new();
    if matches!(suite, Suite::Mixture | Suite::All) {
        cases.extend(guard("mixture", mixture_cases(options)));
    }
    if matches!(suite, Suite::Moments | Suite::All) {
        cases.extend(guard("moments", moment_cases(options)));
    }
    if matches!(suite, Suite::Entropy | Suite::All) {
        cases.extend(guard("entropy", entropy_cases()));
    }
    if matches!(suite, Suite::Conservation | Suite::All) {
        cases.extend(guard("conservation", conservation_cases()));
    }
    let name = serde_json::to_value(suite)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    Report::new(name, cases)
}
