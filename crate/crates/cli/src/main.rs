use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbgk::harness::verify::{VerifyOptions, DEFAULT_SEED};
use mbgk::harness::{eps_sweep, run_case, verify, write_error_report, Model, RunConfig, Suite};
use mbgk::macro_bt::BtMode;
use mbgk::Error;

/// Multispecies BGK solvers and their diffusion limits.
#[derive(Parser)]
#[command(name = "mbgk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Advance one configuration to its final time.
    Run(Overrides),
    /// Compare a kinetic model with its macroscopic limit over several ε.
    Sweep {
        #[command(flatten)]
        common: Overrides,
        /// Minimum fitted rate for diffusive comparisons.
        #[arg(long, default_value_t = 0.8)]
        rate: f64,
    },
    /// Run a seeded property suite.
    Verify {
        /// mixture, moments, entropy, conservation or all.
        #[arg(default_value = "all")]
        suite: String,
        /// Accepted for symmetry with the other subcommands; unused.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        draws: usize,
        /// Directory for `verify.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: PathBuf,
    /// Scaling parameter; a comma-separated list for `sweep`.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// gk, brinkman, ms or bt.
    #[arg(long)]
    model: Option<String>,
    /// Macroscopic Busenberg–Travis mode: non_isothermal, isothermal, classical or high_field.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(o: &Overrides) -> Result<RunConfig, Error> {
    let mut c = RunConfig::from_path(&o.config)?;
    if let Some(m) = &o.model {
        c.model = m.parse::<Model>()?;
    }
    if let Some(m) = &o.mode {
        c.solver.bt_mode = m.parse::<BtMode>()?;
    }
    if let Some(d) = &o.out {
        c.output.dir = d.clone();
    }
    if let [eps] = o.eps[..] {
        c.set_eps(eps);
    }
    c.validate()?;
    Ok(c)
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidParams(_)
            | Error::UnsupportedRegime { .. }
            | Error::NeedPoints(_)
    )
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if is_config_error(e) { 2 } else { 1 })
}

fn run(o: &Overrides) -> ExitCode {
    let c = match load(o) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    match run_case(&c) {
        Ok(out) => {
            print!("{}", out.invariants.to_table());
            println!("{} steps to t = {}", out.steps, out.time);
            ExitCode::from(if out.passed() { 0 } else { 1 })
        }
        Err(e) => fail(&e),
    }
}

fn sweep(o: &Overrides, rate: f64) -> ExitCode {
    let c = match load(&Overrides {
        eps: Vec::new(),
        config: o.config.clone(),
        model: o.model.clone(),
        mode: o.mode.clone(),
        out: o.out.clone(),
    }) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let dir = c.output.dir.clone();
    let result = match eps_sweep(&c, &o.eps, rate) {
        Ok(r) => r,
        Err(e) => {
            let _ = write_error_report(&dir, &e);
            return fail(&e);
        }
    };
    let json = match result.to_json() {
        Ok(j) => j,
        Err(e) => return fail(&e),
    };
    if let Err(e) = std::fs::create_dir_all(&dir)
        .and_then(|_| std::fs::write(dir.join("sweep.json"), json.clone() + "\n"))
    {
        return fail(&e.into());
    }
    println!("{json}");
    if let Some(f) = &result.failure {
        eprintln!("member run failed: {f}");
    }
    ExitCode::from(if result.pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(o) => run(o),
        Command::Sweep { common, rate } => sweep(common, *rate),
        Command::Verify {
            suite,
            seed,
            draws,
            out,
            ..
        } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            let opts = VerifyOptions {
                seed: *seed,
                draws: *draws,
                ..Default::default()
            };
            let report = verify(suite, &opts);
            print!("{}", report.to_table());
            let json = match report.to_json() {
                Ok(j) => j,
                Err(e) => return fail(&e),
            };
            match out {
                Some(d) => {
                    if let Err(e) = std::fs::create_dir_all(d)
                        .and_then(|_| std::fs::write(d.join("verify.json"), json + "\n"))
                    {
                        return fail(&e.into());
                    }
                }
                None => println!("{json}"),
            }
            ExitCode::from(if report.passed() { 0 } else { 1 })
        }
    }
}
