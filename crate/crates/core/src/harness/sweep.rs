//! ε-sweeps of a kinetic model against its macroscopic limit.

use serde::{Deserialize, Serialize};

use super::config::{Model, RunConfig};
use super::run::{SimState, Simulation};
use crate::diagnostics::{l2_error, rate_estimate};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::macro_bt::BtMode;
use crate::params::RegimeKind;

/// Terminal L² errors of one compared field across the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldErrors {
    pub name: String,
    pub errors: Vec<f64>,
    pub rate: Option<f64>,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: Model,
    pub regime: RegimeKind,
    pub macro_mode: String,
    pub eps: Vec<f64>,
    pub fields: Vec<FieldErrors>,
    /// Minimum fitted rate, when the comparison asks for one.
    pub rate_threshold: Option<f64>,
    /// Kinetic steps taken per ε.
    pub steps: Vec<usize>,
    pub pass: bool,
    /// Set when a member run failed; the entries before it are kept.
    pub failure: Option<String>,
}

impl SweepResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn field(&self, name: &str) -> Option<&FieldErrors> {
        self.fields.iter().find(|f| f.name == name)
    }
}

/// Named fields compared between the kinetic and macroscopic terminal states.
fn compared_fields(
    kinetic: &SimState,
    reference: &SimState,
    temperatures: bool,
) -> Result<Vec<(String, Vec<f64>, Vec<f64>)>> {
    let mut out = Vec::new();
    match (kinetic, reference) {
        (SimState::Gk(k), SimState::Ms(m)) => {
            for i in 0..m.n.len() {
                out.push((format!("n_{i}"), k.n[i].clone(), m.n[i].clone()));
            }
            out.push((
                "theta".into(),
                mixture_theta(&k.n, &k.theta),
                m.theta.clone(),
            ));
        }
        (SimState::Brinkman(k), SimState::Bt(b)) => {
            for i in 0..b.rho.len() {
                out.push((
                    format!("rho_{i}"),
                    k.n[i].iter().map(|n| n * k.m[i]).collect(),
                    b.rho[i].clone(),
                ));
            }
            if temperatures {
                for i in 0..b.rho.len() {
                    out.push((format!("theta_{i}"), k.theta[i].clone(), b.theta[i].clone()));
                }
            }
        }
        _ => return Err(Error::Defect("mismatched sweep states".into())),
    }
    Ok(out)
}

/// `Σ n_i θ_i / Σ n_i` per cell.
pub fn mixture_theta(n: &[Vec<f64>], theta: &[Vec<f64>]) -> Vec<f64> {
    (0..theta[0].len())
        .map(|c| {
            let nt: f64 = n.iter().zip(theta).map(|(a, b)| a[c] * b[c]).sum();
            nt / n.iter().map(|a| a[c]).sum::<f64>()
        })
        .collect()
}

/// Macroscopic configuration matched to a kinetic one, and the BT mode it uses.
pub fn reference_config(config: &RunConfig) -> Result<(RunConfig, Option<BtMode>)> {
    let mut r = config.clone();
    match config.model {
        Model::Gk => {
            r.model = Model::Ms;
            Ok((r, None))
        }
        Model::Brinkman => {
            let mode = match (config.regime.kind, config.solver.bt_mode) {
                (RegimeKind::Diffusive, m @ (BtMode::NonIsothermal | BtMode::Isothermal)) => m,
                (RegimeKind::HighField, m @ (BtMode::Classical | BtMode::HighField)) => m,
                (RegimeKind::HighField, _) => BtMode::Classical,
                (RegimeKind::Diffusive, m) => {
                    return Err(Error::Config(format!(
                        "macroscopic mode {m:?} does not match the diffusive regime"
                    )));
                }
            };
            r.model = Model::Bt;
            r.solver.bt_mode = mode;
            Ok((r, Some(mode)))
        }
        m => Err(Error::Config(format!(
            "sweeps need a kinetic model, got {m:?}"
        ))),
    }
}

fn check_matched_initial(kin: &Simulation, reference: &Simulation, grid: &Grid1D) -> Result<()> {
    let fields = compared_fields(&kin.state, &reference.state, true)?;
    for (name, a, b) in fields {
        let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
        let gap = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
            / scale;
        if gap > 1e-8 {
            return Err(Error::Defect(format!(
                "kinetic initial {name} differs from the macroscopic one by {gap:e} on {} cells",
                grid.ncells
            )));
        }
    }
    Ok(())
}

/// The Maxwell–Stefan closure assumes zero net momentum and a uniform
/// mixture pressure `Σ n_i θ_i`; initial data violating either would be
/// compared against a limit it does not have.
fn check_gk_preconditions(config: &RunConfig) -> Result<()> {
    let grid = config.spatial_grid()?;
    let (n, v, theta) = config.sample_initial(&grid);
    let k = n.len();
    let mut mom = 0.0;
    let mut scale = 0.0;
    let pressure: Vec<f64> = (0..grid.ncells)
        .map(|c| {
            for i in 0..k {
                mom += config.mixture.m[i] * n[i][c] * v[i][c];
                scale += config.mixture.m[i] * n[i][c];
            }
            (0..k).map(|i| n[i][c] * theta[i][c]).sum()
        })
        .collect();
    if mom.abs() > 1e-12 * scale {
        return Err(Error::Config(format!(
            "initial net momentum {:e} is not zero",
            mom * grid.dx
        )));
    }
    let mean = pressure.iter().sum::<f64>() / pressure.len() as f64;
    let spread = pressure
        .iter()
        .map(|p| (p - mean).abs())
        .fold(0.0, f64::max)
        / mean;
    if spread > 1e-8 {
        return Err(Error::Config(format!(
            "initial mixture pressure is not uniform (relative spread {spread:e})"
        )));
    }
    Ok(())
}

/// Compared fields of one member and its step count.
type MemberOutput = (Vec<(String, Vec<f64>, Vec<f64>)>, usize);

/// Runs the kinetic model at each ε in `eps_list` (strictly decreasing, at
/// least three) and compares terminal moments with the macroscopic solution
/// on the same grid.
///
/// Compared fields: `n_i`, θ for Gross–Krook; `ρ_i`, `θ_i` for diffusive
/// Brinkman; `ρ_i` for high-field Brinkman. A fitted rate is required for the
/// diffusive comparisons only.
pub fn eps_sweep(config: &RunConfig, eps_list: &[f64], rate_threshold: f64) -> Result<SweepResult> {
    if eps_list.len() < 3 {
        return Err(Error::NeedPoints(eps_list.len()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("eps list must be strictly decreasing".into()));
    }
    if config.model == Model::Gk {
        check_gk_preconditions(config)?;
    }
    let (mut ref_cfg, mode) = reference_config(config)?;
    let mut kin_cfg = config.clone();
    if mode == Some(BtMode::Classical) {
        let k = config.mixture.species;
        kin_cfg.mixture.a = vec![vec![1.0; k]; k];
        ref_cfg.mixture.a = kin_cfg.mixture.a.clone();
    }
    let temperatures = config.model == Model::Gk || config.regime.kind == RegimeKind::Diffusive;
    let mut reference = Simulation::new(&ref_cfg)?;
    let t_end = config.solver.t_end;
    reference.run_to(t_end, |_, _| Ok(()))?;

    let mut result = SweepResult {
        model: config.model,
        regime: config.regime.kind,
        macro_mode: mode.map_or("maxwell_stefan".into(), |m| format!("{m:?}")),
        eps: Vec::new(),
        fields: Vec::new(),
        rate_threshold: (config.regime.kind == RegimeKind::Diffusive).then_some(rate_threshold),
        steps: Vec::new(),
        pass: false,
        failure: None,
    };
    // Members run on their own threads; results are gathered in ε order.
    let members: Vec<Result<MemberOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = eps_list
            .iter()
            .map(|&eps| {
                let (kin_cfg, ref_cfg, reference) = (&kin_cfg, &ref_cfg, &reference);
                scope.spawn(move || -> Result<MemberOutput> {
                    let mut cfg = kin_cfg.clone();
                    cfg.set_eps(eps);
                    let mut kin = Simulation::new(&cfg)?;
                    let ref0 = Simulation::new(ref_cfg)?;
                    check_matched_initial(&kin, &ref0, &kin.grid.clone())?;
                    kin.run_to(t_end, |_, _| Ok(()))?;
                    Ok((
                        compared_fields(&kin.state, &reference.state, temperatures)?,
                        kin.step,
                    ))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Defect("sweep member panicked".into())))
            })
            .collect()
    });
    for (&eps, member) in eps_list.iter().zip(members) {
        match member {
            Ok((fields, steps)) => {
                result.eps.push(eps);
                result.steps.push(steps);
                for (name, a, b) in fields {
                    let e = l2_error(&a, &b, &reference.grid)?;
                    match result.fields.iter_mut().find(|f| f.name == name) {
                        Some(f) => f.errors.push(e),
                        None => result.fields.push(FieldErrors {
                            name,
                            errors: vec![e],
                            rate: None,
                            monotone: true,
                        }),
                    }
                }
            }
            Err(e) => {
                result.failure = Some(format!("eps = {eps}: {e}"));
                break;
            }
        }
    }
    for f in &mut result.fields {
        f.monotone = f.errors.windows(2).all(|w| w[1] < w[0]);
        f.rate = rate_estimate(&f.errors, &result.eps).ok();
    }
    result.pass = result.failure.is_none()
        && result.fields.iter().all(|f| {
            f.monotone
                && match result.rate_threshold {
                    Some(t) => f.rate.is_some_and(|r| r >= t),
                    None => true,
                }
        });
    Ok(result)
}
