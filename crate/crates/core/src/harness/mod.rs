//! Run orchestration: configuration, single runs, ε-sweeps and the verify suites.

pub mod config;
pub mod report;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{GridSpec, Mode, Model, OutputSpec, RunConfig, SolverSpec, SpeciesProfile};
pub use report::{Case, Report, Status};
pub use run::{run_case, write_error_report, RunOutcome, SimState, Simulation};
pub use sweep::{eps_sweep, FieldErrors, SweepResult};
pub use verify::{verify, Suite};
