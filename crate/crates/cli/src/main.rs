use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dce_kerr_cli::checks::{core_suite, preset_suite, Check};
use dce_kerr_cli::sweep::{index_path, sweep, SweepParam};
use dce_kerr_cli::{run, CliError, RunConfig, Settings};

/// Photon generation from vacuum in a modulated Kerr cavity.
#[derive(Parser)]
#[command(name = "dce-kerr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the vacuum with each method and write a CSV plus metadata sidecar.
    Run(RunArgs),
    /// One run per value of a parameter, with an index CSV.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to vary: kerr, epsilon, omega0, dim or dt.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Run the invariant and acceptance suite.
    Validate {
        /// Skip the preset-scale checks (two runs of each figure preset).
        #[arg(long)]
        quick: bool,
        /// Directory for the preset runs (default: a fresh temporary directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    omega0: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// One value or a comma-separated list.
    #[arg(long)]
    kerr: Option<String>,
    /// Fock truncation; default chosen per Kerr value from the tail estimate.
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    /// analytic, full, full-approx-chi, rwa, su11-stepped (comma-separated).
    #[arg(long)]
    methods: Option<String>,
    /// CSV path for `run`, directory for `sweep`.
    #[arg(long)]
    output: Option<String>,
    /// Parallel runs (default 1).
    #[arg(long)]
    workers: Option<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        for (key, value) in [
            ("preset", &self.preset),
            ("omega0", &self.omega0),
            ("epsilon", &self.epsilon),
            ("kerr", &self.kerr),
            ("dim", &self.dim),
            ("dt", &self.dt),
            ("tmax", &self.tmax),
            ("stride", &self.stride),
            ("methods", &self.methods),
            ("output", &self.output),
            ("workers", &self.workers),
        ] {
            if let Some(v) = value {
                flags.set(key, v)?;
            }
        }
        settings.merge(&flags);
        Ok(settings)
    }
}

fn workers(settings: &Settings) -> Result<usize, CliError> {
    match settings.parse::<usize>("workers")? {
        Some(0) => Err(CliError::config("workers", "must be positive")),
        Some(n) => Ok(n),
        None => Ok(1),
    }
}

fn report(checks: &[Check]) -> Result<(), CliError> {
    for c in checks {
        println!("{c}");
    }
    match checks.iter().find(|c| !c.acceptable()) {
        Some(c) => Err(CliError::Validate {
            check: c.name.clone(),
        }),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let settings = args.settings()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers(&settings)?)
                .build()
                .map_err(|e| CliError::config("workers", e.to_string()))?;
            let config = RunConfig::from_settings(&settings)?;
            let result = pool.install(|| run(&config))?;
            println!(
                "wrote {} ({} series) in {:.2}s",
                config.output.display(),
                result.series.len(),
                result.wall_time
            );
            Ok(())
        }
        Command::Sweep { run, param, values } => {
            let settings = run.settings()?;
            let dir = PathBuf::from(settings.get("output").unwrap_or("sweep"));
            let base = RunConfig::from_settings(&settings)?;
            let result = sweep(&base, param, &values, &dir, workers(&settings)?)?;
            println!(
                "wrote {} runs and {}",
                result.runs.len(),
                index_path(&dir).display()
            );
            Ok(())
        }
        Command::Validate { quick, output } => {
            let mut checks = core_suite();
            if !quick {
                let temp;
                let dir = match output {
                    Some(dir) => {
                        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
                        dir
                    }
                    None => {
                        temp = tempfile::tempdir().map_err(|e| CliError::io(&std::env::temp_dir(), e))?;
                        temp.path().to_path_buf()
                    }
                };
                checks.extend(preset_suite(&dir)?);
            }
            report(&checks)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
