//! Run configuration, read from TOML.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, VelocityGrid1D};
use crate::macro_bt::BtMode;
use crate::params::{validate_params, MixtureParams, RegimeKind, ScalingRegime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Gross–Krook mixture model.
    Gk,
    /// Single-relaxation model with a Brinkman force.
    Brinkman,
    /// Maxwell–Stefan macroscopic system.
    Ms,
    /// Busenberg–Travis macroscopic system.
    Bt,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gk" => Ok(Model::Gk),
            "brinkman" => Ok(Model::Brinkman),
            "ms" => Ok(Model::Ms),
            "bt" => Ok(Model::Bt),
            _ => Err(Error::Config(format!("unknown model {s:?}"))),
        }
    }
}

/// `mean + amp·cos(2π k x / L + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub mean: f64,
    #[serde(default)]
    pub amp: f64,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

impl Mode {
    pub const fn constant(mean: f64) -> Self {
        Mode {
            mean,
            amp: 0.0,
            k: 1.0,
            phase: 0.0,
        }
    }

    pub fn eval(&self, x: f64, length: f64) -> f64 {
        self.mean + self.amp * (2.0 * PI * self.k * x / length + self.phase).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesProfile {
    pub n: Mode,
    #[serde(default = "zero_mode")]
    pub v: Mode,
    #[serde(default = "unit_mode")]
    pub theta: Mode,
}

fn zero_mode() -> Mode {
    Mode::constant(0.0)
}

fn unit_mode() -> Mode {
    Mode::constant(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "one")]
    pub length: f64,
    pub ncells: usize,
    #[serde(default = "default_nodes")]
    pub nnodes: usize,
    /// Velocity half-width; the default rule applies when absent.
    #[serde(default)]
    pub xi_max: Option<f64>,
}

fn default_nodes() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Fraction of the stability limit used as the step size.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_bt_mode")]
    pub bt_mode: BtMode,
}

fn default_t_end() -> f64 {
    0.1
}

fn default_cfl() -> f64 {
    0.9
}

fn default_bt_mode() -> BtMode {
    BtMode::NonIsothermal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Steps between time-series rows; zero disables the time series.
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    /// Steps between field snapshots; zero keeps only the initial and final ones.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_cadence() -> usize {
    10
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            cadence: default_cadence(),
            snapshot_every: 0,
        }
    }
}

/// Everything needed for one run; `mixture.eps` is overwritten by `regime.eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: Model,
    pub regime: ScalingRegime,
    pub mixture: MixtureParams,
    pub grid: GridSpec,
    pub solver: SolverSpec,
    pub initial: Vec<SpeciesProfile>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let mut c: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.mixture.eps = c.regime.eps;
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn set_eps(&mut self, eps: f64) {
        self.regime.eps = eps;
        self.mixture.eps = eps;
    }

    /// Mixture parameters in effect. σ is unused by the high-field regime,
    /// so a zero there does not fail validation.
    pub fn params(&self) -> MixtureParams {
        let mut p = self.mixture.clone();
        p.eps = self.regime.eps;
        p
    }

    pub fn validate(&self) -> Result<()> {
        let mut p = self.params();
        if self.regime.kind == RegimeKind::HighField
            || matches!(self.solver.bt_mode, BtMode::Classical | BtMode::HighField)
        {
            p.sigma = 1.0;
        }
        validate_params(&p)?;
        if self.initial.len() != p.species {
            return Err(Error::Config(format!(
                "{} initial profiles for {} species",
                self.initial.len(),
                p.species
            )));
        }
        if !(self.solver.t_end >= 0.0) || !(self.solver.cfl > 0.0 && self.solver.cfl <= 1.0) {
            return Err(Error::Config(
                "t_end must be nonnegative and cfl in (0, 1]".into(),
            ));
        }
        self.spatial_grid()?;
        Ok(())
    }

    pub fn spatial_grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.length, self.grid.ncells)
    }

    /// Largest initial temperature over species and cells, via the profile bounds.
    pub fn theta_max(&self) -> f64 {
        self.initial
            .iter()
            .map(|s| s.theta.mean + s.theta.amp.abs())
            .fold(0.0, f64::max)
    }

    fn velocity_shift(&self) -> f64 {
        let scale = match self.model {
            Model::Gk => self.regime.eps,
            _ => 1.0,
        };
        scale
            * self
                .initial
                .iter()
                .map(|s| s.v.mean.abs() + s.v.amp.abs())
                .fold(0.0, f64::max)
    }

    pub fn velocity_grid(&self) -> Result<VelocityGrid1D> {
        match self.grid.xi_max {
            Some(x) => VelocityGrid1D::new(x, self.grid.nnodes),
            None => VelocityGrid1D::for_mixture(
                self.theta_max(),
                &self.mixture.m,
                self.velocity_shift(),
                self.grid.nnodes,
            ),
        }
    }

    /// Per-species initial profiles sampled at cell centers: `(n, v, θ)`.
    pub fn sample_initial(&self, grid: &Grid1D) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let xs = grid.centers();
        let take = |f: &dyn Fn(&SpeciesProfile) -> Mode| -> Vec<Vec<f64>> {
            self.initial
                .iter()
                .map(|s| xs.iter().map(|&x| f(s).eval(x, grid.length)).collect())
                .collect()
        };
        (take(&|s| s.n), take(&|s| s.v), take(&|s| s.theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
model = "gk"

[regime]
kind = "diffusive"
eps = 0.1

[mixture]
species = 2
m = [1.0, 1.0]
nu_matrix = [[0.5, 0.5], [0.5, 0.5]]
nu_vec = [1.0, 1.0]
a = [[1.0, 0.0], [0.0, 1.0]]
eps = 0.1
sigma = 1.0

[grid]
ncells = 32

[solver]
t_end = 0.01

[[initial]]
n = { mean = 0.5, amp = 0.15 }

[[initial]]
n = { mean = 0.5, amp = -0.15 }
"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.grid.nnodes, 64);
        assert_eq!(c.solver.cfl, 0.9);
        assert_eq!(c.initial[1].theta, Mode::constant(1.0));
        let g = c.spatial_grid().unwrap();
        let (n, _, _) = c.sample_initial(&g);
        for k in 0..32 {
            assert!((n[0][k] + n[1][k] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::from_toml_str(SAMPLE).unwrap();
        let back = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn profile_count_checked() {
        let s = SAMPLE.replace("species = 2", "species = 3");
        assert!(matches!(
            RunConfig::from_toml_str(&s),
            Err(Error::InvalidParams(_) | Error::Config(_))
        ));
    }
}
