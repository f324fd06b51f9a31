use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmeter::sweep::{Fixed, Objective, SLICE_POINTS};
use qmeter_cli::commands;
use qmeter_cli::config::{self, Beta, Fault, Overrides, RunConfig};
use qmeter_cli::error::{CliError, Result};
use qmeter_cli::verify;

#[derive(Parser)]
#[command(
    name = "qmeter",
    version,
    about = "Measurement-fuelled single-qubit engine simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Level splitting ħω in peV.
    #[arg(long, global = true)]
    hbar_omega_pev: Option<f64>,
    /// Stroke duration τ in microseconds.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tau_us: Option<f64>,
    /// `inverse_hbar_omega` or an inverse temperature in 1/peV.
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long, global = true)]
    alpha_rad: Option<f64>,
    #[arg(long, global = true)]
    phi_rad: Option<f64>,
    /// Propagator steps per stroke.
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    grid_alpha_points: Option<usize>,
    #[arg(long, global = true)]
    grid_phi_points: Option<usize>,
    /// Seed for the randomized suites.
    #[arg(long, global = true, env = "QMETER_SEED")]
    seed: Option<u64>,
    /// Random samples per suite.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Test hook; `skip-rehermitize` perturbs the measurement channel.
    #[arg(long, global = true)]
    inject_fault: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    MaxWExt,
    MaxEta,
    MinDs,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MaxWExt => Objective::MaxWorkExtracted,
            ObjectiveArg::MaxEta => Objective::MaxEfficiency,
            ObjectiveArg::MinDs => Objective::MinEntropyChange,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one cycle at (alpha, phi).
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the record as a one-row CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Scan the (alpha, phi) grid and locate extrema.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: PathBuf,
        /// Summary path; defaults to the output with a `.summary.json` extension.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Objectives to locate; all three by default.
        #[arg(long, value_enum)]
        objective: Vec<ObjectiveArg>,
    },
    /// Run every invariant suite.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// One-dimensional profile with one angle held fixed.
    Slice {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            conflicts_with = "fixed_phi",
            required_unless_present = "fixed_phi"
        )]
        fixed_alpha: Option<f64>,
        #[arg(long)]
        fixed_phi: Option<f64>,
        #[arg(long, default_value_t = SLICE_POINTS)]
        points: usize,
        #[arg(long)]
        output: PathBuf,
    },
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &common.config {
        config.apply(&config::load_file(path)?);
    }
    let flags = Overrides {
        hbar_omega_pev: common.hbar_omega_pev,
        tau_us: common.tau_us,
        beta: common.beta.as_deref().map(str::parse::<Beta>).transpose()?,
        alpha_rad: common.alpha_rad,
        phi_rad: common.phi_rad,
        steps: common.steps,
        grid_alpha_points: common.grid_alpha_points,
        grid_phi_points: common.grid_phi_points,
        seed: common.seed,
        samples: common.samples,
        fault: common
            .inject_fault
            .as_deref()
            .map(str::parse::<Fault>)
            .transpose()?,
    };
    config.apply(&flags);
    config.validate()?;
    Ok(config)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, csv } => {
            let config = resolve(&common)?;
            commands::run(&config, csv.as_deref(), &mut std::io::stdout().lock())
        }
        Command::Sweep {
            common,
            output,
            summary,
            objective,
        } => {
            let config = resolve(&common)?;
            let objectives: Vec<Objective> = if objective.is_empty() {
                Objective::ALL.to_vec()
            } else {
                objective.into_iter().map(Objective::from).collect()
            };
            let result = commands::sweep(&config, &objectives, &output, summary.as_deref())?;
            for (objective, e) in &result.extrema {
                match e {
                    Some(e) => println!(
                        "{}: alpha={:.4} phi={:.4} value={:.6e}",
                        objective.key(),
                        e.alpha_star,
                        e.phi_star,
                        e.value
                    ),
                    None => println!("{}: undefined", objective.key()),
                }
            }
            if let Some(r) = result.symmetry_residual {
                println!("symmetry_residual: {r:.3e}");
            }
            Ok(())
        }
        Command::Verify { common } => {
            let config = resolve(&common)?;
            let results = verify::verify(&config);
            let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
            for r in &results {
                println!("{}", r.line());
            }
            println!(
                "verify: {} passed, {} failed",
                results.len() - failed.len(),
                failed.len()
            );
            if failed.is_empty() {
                Ok(())
            } else {
                let names: Vec<_> = failed.iter().map(|r| r.name).collect();
                Err(CliError::Invariant(format!(
                    "failed suites: {}",
                    names.join(", ")
                )))
            }
        }
        Command::Slice {
            common,
            fixed_alpha,
            fixed_phi,
            points,
            output,
        } => {
            let config = resolve(&common)?;
            let fixed = match (fixed_alpha, fixed_phi) {
                (Some(a), _) => Fixed::Alpha(a),
                (None, Some(p)) => Fixed::Phi(p),
                (None, None) => unreachable!("clap requires one of the two"),
            };
            commands::run_slice(&config, fixed, points, &output)
        }
    }
}

fn main() -> ExitCode {
    // Usage errors are configuration errors; clap's own code 2 is reserved
    // here for invariant violations.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmeter: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
