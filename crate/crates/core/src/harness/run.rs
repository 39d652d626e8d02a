//! Single runs: state setup, time stepping, CSV output and invariant checks.

use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Model, RunConfig};
use super::report::{Case, Report};
use crate::diagnostics::{compensated_sum, drift, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, VelocityGrid1D};
use crate::kinetic::brinkman::{
    bb_cfl_limit, bb_step_with, brinkman_field, potential_energy_rao, Closure,
};
use crate::kinetic::entropy::{bb_kinetic_entropy, kinetic_entropy};
use crate::kinetic::gk::{gk_cfl_limit, gk_step};
use crate::macro_bt::{
    bt_cfl_limit, bt_entropy, bt_entropy_identity_residual, bt_step, local_potential, rao_entropy,
    BtMode,
};
use crate::macro_ms::{ms_cfl_limit, ms_entropy, ms_entropy_identity_residual, ms_faces, ms_step};
use crate::params::{MixtureParams, RegimeKind};
use crate::state::{KineticState, MacroStateBT, MacroStateMS, ThetaConvention};

/// State of whichever solver a configuration selects.
#[derive(Debug, Clone, PartialEq)]
pub enum SimState {
    Gk(KineticState),
    Brinkman(KineticState),
    Ms(MacroStateMS),
    Bt(MacroStateBT),
}

/// A configured solver: parameters, grids and the evolving state.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: MixtureParams,
    pub regime: RegimeKind,
    pub bt_mode: BtMode,
    pub grid: Grid1D,
    pub vgrid: VelocityGrid1D,
    pub cfl: f64,
    pub state: SimState,
    pub time: f64,
    pub step: usize,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.spatial_grid()?;
        let vgrid = config.velocity_grid()?;
        let params = config.params();
        let (n, v, theta) = config.sample_initial(&grid);
        for (i, row) in n.iter().enumerate() {
            if let Some(c) = row.iter().position(|x| !(*x > 0.0)) {
                return Err(Error::VacuumCell {
                    cell: c,
                    species: i,
                });
            }
        }
        let state = match config.model {
            Model::Gk => SimState::Gk(KineticState::from_moments(
                &vgrid,
                &params.m,
                &n,
                &v,
                &theta,
                params.eps,
                ThetaConvention::Peculiar,
            )?),
            Model::Brinkman => SimState::Brinkman(KineticState::from_moments(
                &vgrid,
                &params.m,
                &n,
                &v,
                &theta,
                1.0,
                ThetaConvention::Total,
            )?),
            Model::Ms => {
                let ntot: Vec<f64> = (0..grid.ncells)
                    .map(|c| n.iter().map(|r| r[c]).sum())
                    .collect();
                let th: Vec<f64> = (0..grid.ncells)
                    .map(|c| n.iter().zip(&theta).map(|(a, b)| a[c] * b[c]).sum::<f64>() / ntot[c])
                    .collect();
                SimState::Ms(MacroStateMS::new(n, th)?)
            }
            Model::Bt => {
                let rho: Vec<Vec<f64>> = n
                    .iter()
                    .zip(&params.m)
                    .map(|(r, m)| r.iter().map(|x| x * m).collect())
                    .collect();
                let mut s = MacroStateBT::new(rho, theta)?;
                if !config.solver.bt_mode.evolves_temperature() {
                    s.theta.iter_mut().flatten().for_each(|t| *t = 1.0);
                }
                s.phi = local_potential(&s.rho, &s.theta, &params.a);
                SimState::Bt(s)
            }
        };
        Ok(Simulation {
            params,
            regime: config.regime.kind,
            bt_mode: config.solver.bt_mode,
            grid,
            vgrid,
            cfl: config.solver.cfl,
            state,
            time: 0.0,
            step: 0,
        })
    }

    /// Stability limit of the current state.
    pub fn stable_dt(&self) -> Result<f64> {
        let p = &self.params;
        Ok(match &self.state {
            SimState::Gk(_) => gk_cfl_limit(p.eps, &self.grid, &self.vgrid),
            SimState::Brinkman(s) => {
                let f = brinkman_field(s, p, &self.grid)?;
                bb_cfl_limit(p, self.regime, &self.grid, &self.vgrid, f.max_abs_grad())
            }
            SimState::Ms(s) => ms_cfl_limit(s, p, &self.grid, &ms_faces(s, p, &self.grid)?),
            SimState::Bt(s) => bt_cfl_limit(s, p, &self.grid, self.bt_mode),
        })
    }

    /// Advances by at most `dt`; returns the step actually taken.
    pub fn advance(&mut self, dt: f64) -> Result<f64> {
        let p = &self.params;
        let taken = match &mut self.state {
            SimState::Gk(s) => {
                gk_step(s, p, &self.grid, &self.vgrid, dt)?;
                dt
            }
            SimState::Brinkman(s) => {
                let closure = if self.bt_mode == BtMode::Isothermal {
                    Closure::Isothermal
                } else {
                    Closure::Energy
                };
                bb_step_with(s, p, &self.grid, &self.vgrid, dt, self.regime, closure)?;
                dt
            }
            SimState::Ms(s) => {
                ms_step(s, p, &self.grid, dt)?;
                dt
            }
            SimState::Bt(s) => bt_step(s, p, &self.grid, dt, self.bt_mode)?,
        };
        self.time += taken;
        self.step += 1;
        Ok(taken)
    }

    /// Steps to `t_end`, calling `observe` after every step.
    pub fn run_to(
        &mut self,
        t_end: f64,
        mut observe: impl FnMut(&Simulation, f64) -> Result<()>,
    ) -> Result<()> {
        while self.time < t_end * (1.0 - 1e-14) {
            let dt = (self.cfl * self.stable_dt()?).min(t_end - self.time);
            let taken = self.advance(dt)?;
            observe(self, taken)?;
        }
        Ok(())
    }

    pub fn species(&self) -> usize {
        self.params.species
    }

    /// Diagnostics of the current state; identity residuals need the history.
    pub fn record(&self) -> Result<DiagnosticsRecord> {
        let (g, vg, p) = (&self.grid, &self.vgrid, &self.params);
        let mut r = DiagnosticsRecord {
            step: self.step,
            time: self.time,
            ..Default::default()
        };
        match &self.state {
            SimState::Gk(s) => {
                r.mass = s.raw_masses(g, vg);
                r.momentum = s.momentum(g, vg);
                r.energy = s.energy(g, vg);
                r.entropy = kinetic_entropy(s, vg, g)?;
            }
            SimState::Brinkman(s) => {
                r.mass = s.raw_masses(g, vg);
                r.momentum = s.momentum(g, vg);
                r.energy = s.energy(g, vg);
                r.entropy = bb_kinetic_entropy(s, vg, g)?;
                r.rao = Some(potential_energy_rao(s, p, g)?.1);
            }
            SimState::Ms(s) => {
                r.mass =
                    s.n.iter()
                        .map(|row| compensated_sum(row.iter().copied()) * g.dx)
                        .collect();
                r.momentum = compensated_sum(
                    (0..s.ncells())
                        .flat_map(|c| (0..s.n.len()).map(move |i| p.m[i] * s.n[i][c] * s.v[i][c])),
                ) * g.dx;
                r.energy =
                    1.5 * compensated_sum(
                        (0..s.ncells())
                            .flat_map(|c| s.n.iter().map(move |row| row[c] * s.theta[c])),
                    ) * g.dx;
                r.entropy = ms_entropy(s, p, g);
            }
            SimState::Bt(s) => {
                r.mass = s
                    .rho
                    .iter()
                    .map(|row| compensated_sum(row.iter().copied()) * g.dx)
                    .collect();
                r.energy =
                    1.5 * compensated_sum((0..s.ncells()).flat_map(|c| {
                        (0..s.rho.len()).map(move |i| s.rho[i][c] * s.theta[i][c] / p.m[i])
                    })) * g.dx;
                r.entropy = bt_entropy(s, p, g);
                r.rao = Some(rao_entropy(s, p, g));
            }
        }
        Ok(r)
    }

    /// Identity residual at `mid` from the macro states around it.
    fn identity_residual(&self, prev: &SimState, mid: &SimState, dt: f64) -> Option<f64> {
        let (p, g) = (&self.params, &self.grid);
        match (prev, mid, &self.state) {
            (SimState::Ms(a), SimState::Ms(b), SimState::Ms(c)) => {
                ms_entropy_identity_residual(a, b, c, p, g, dt)
                    .ok()
                    .map(|r| r.residual)
            }
            (SimState::Bt(a), SimState::Bt(b), SimState::Bt(c))
                if self.bt_mode == BtMode::NonIsothermal =>
            {
                bt_entropy_identity_residual(a, b, c, p, g, dt)
                    .ok()
                    .map(|r| r.residual)
            }
            _ => None,
        }
    }

    /// Writes the field snapshot CSV for the current state.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let k = self.species();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["x".to_string()];
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut push = |name: String, col: Vec<f64>| {
            header.push(name);
            cols.push(col);
        };
        match &self.state {
            SimState::Gk(s) | SimState::Brinkman(s) => {
                for i in 0..k {
                    push(format!("n_{i}"), s.n[i].clone());
                    push(format!("v_{i}"), s.v[i].clone());
                    push(format!("theta_{i}"), s.theta[i].clone());
                }
                if let SimState::Brinkman(_) = self.state {
                    let f = brinkman_field(s, &self.params, &self.grid)?;
                    for i in 0..k {
                        push(format!("phi_{i}"), f.phi[i].clone());
                    }
                }
            }
            SimState::Ms(s) => {
                for i in 0..k {
                    push(format!("n_{i}"), s.n[i].clone());
                    push(format!("v_{i}"), s.v[i].clone());
                }
                push("theta".into(), s.theta.clone());
            }
            SimState::Bt(s) => {
                for i in 0..k {
                    push(format!("rho_{i}"), s.rho[i].clone());
                }
                for i in 0..k {
                    push(format!("theta_{i}"), s.theta[i].clone());
                }
                for i in 0..k {
                    push(format!("phi_{i}"), s.phi[i].clone());
                }
            }
        }
        w.write_record(&header)?;
        for (c, x) in self.grid.centers().iter().enumerate() {
            let mut row = vec![format!("{x:e}")];
            row.extend(cols.iter().map(|col| format!("{:e}", col[c])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Outcome of a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub steps: usize,
    pub time: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub invariants: Report,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.invariants.passed()
    }
}

const CONSERVATION_TOL: f64 = 1e-10;

/// Per-step entropy monotonicity and conservation over the recorded series.
fn check_invariants(
    model: Model,
    records: &[DiagnosticsRecord],
    worst_entropy_drop: f64,
) -> Result<Report> {
    let mut cases = Vec::new();
    let species = records.first().map_or(0, |r| r.mass.len());
    for i in 0..species {
        let d = drift(&records.iter().map(|r| r.mass[i]).collect::<Vec<_>>())?;
        cases.push(Case::at_most(
            format!("mass_{i}_drift"),
            d.value,
            CONSERVATION_TOL,
        ));
    }
    if model == Model::Gk {
        let e0 = records[0].energy.abs();
        let mom = records
            .iter()
            .map(|r| (r.momentum - records[0].momentum).abs())
            .fold(0.0, f64::max)
            / e0;
        cases.push(Case::at_most(
            "momentum_drift".into(),
            mom,
            CONSERVATION_TOL,
        ));
        let d = drift(&records.iter().map(|r| r.energy).collect::<Vec<_>>())?;
        cases.push(Case::at_most(
            "energy_drift".into(),
            d.value,
            CONSERVATION_TOL,
        ));
        cases.push(Case::at_most(
            "entropy_decrease".into(),
            worst_entropy_drop,
            CONSERVATION_TOL,
        ));
    }
    Ok(Report::new("run", cases))
}

/// Runs a configuration to `t_end`, writing `config.toml`, `timeseries.csv`,
/// snapshots and `report.json` into the output directory.
///
/// Solver errors write `error.json` and propagate.
pub fn run_case(config: &RunConfig) -> Result<RunOutcome> {
    let dir = &config.output.dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), config.to_toml_string()?)?;
    let result = run_inner(config, dir);
    if let Err(e) = &result {
        write_error_report(dir, e)?;
    }
    result
}

/// `{"error": kind, "message": text}` in `error.json`.
pub fn write_error_report(dir: &Path, e: &Error) -> Result<()> {
    let kind = format!("{e:?}");
    let kind = kind
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("")
        .to_string();
    let v = serde_json::json!({ "error": kind, "message": e.to_string() });
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("error.json"),
        serde_json::to_string_pretty(&v)? + "\n",
    )?;
    Ok(())
}

fn run_inner(config: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let mut sim = Simulation::new(config)?;
    let cadence = config.output.cadence;
    let snap_every = config.output.snapshot_every;
    let snap =
        |sim: &Simulation| sim.write_snapshot(&dir.join(format!("snapshot_{:06}.csv", sim.step)));
    snap(&sim)?;
    let mut records = vec![sim.record()?];
    let mut prev_entropy = records[0].entropy;
    let mut worst_drop: f64 = 0.0;
    let is_macro = matches!(sim.state, SimState::Ms(_) | SimState::Bt(_));
    // Last three macro states with the step that produced each.
    let mut history: VecDeque<(SimState, f64)> = VecDeque::new();
    if is_macro {
        history.push_back((sim.state.clone(), 0.0));
    }
    sim.run_to(config.solver.t_end, |s, dt| {
        if is_macro {
            history.push_back((s.state.clone(), dt));
            if history.len() > 3 {
                history.pop_front();
            }
        }
        if matches!(s.state, SimState::Gk(_)) {
            let h = kinetic_entropy_of(s)?;
            worst_drop = worst_drop.max((prev_entropy - h) / h.abs().max(f64::MIN_POSITIVE));
            prev_entropy = h;
        }
        if cadence > 0 && s.step % cadence == 0 {
            let mut r = s.record()?;
            if history.len() == 3 && history[1].1 == dt {
                r.identity_residual = s.identity_residual(&history[0].0, &history[1].0, dt);
            }
            records.push(r);
        }
        if snap_every > 0 && s.step % snap_every == 0 {
            snap(s)?;
        }
        Ok(())
    })?;
    if records.last().map(|r| r.step) != Some(sim.step) {
        records.push(sim.record()?);
    }
    if snap_every == 0 || sim.step % snap_every != 0 {
        snap(&sim)?;
    }
    write_timeseries(&dir.join("timeseries.csv"), &records)?;
    let invariants = check_invariants(config.model, &records, worst_drop)?;
    let mut f = fs::File::create(dir.join("report.json"))?;
    writeln!(f, "{}", invariants.to_json()?)?;
    Ok(RunOutcome {
        steps: sim.step,
        time: sim.time,
        records,
        invariants,
    })
}

fn kinetic_entropy_of(s: &Simulation) -> Result<f64> {
    match &s.state {
        SimState::Gk(k) => kinetic_entropy(k, &s.vgrid, &s.grid),
        _ => Ok(0.0),
    }
}

pub fn write_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let k = records.first().map_or(0, |r| r.mass.len());
    w.write_record(DiagnosticsRecord::csv_header(k))?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
