use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsap_cli::check::known_ids;
use nsap_cli::compare::compare_dirs;
use nsap_cli::config::ScenarioConfig;
use nsap_cli::error::{CliError, CliResult};
use nsap_cli::output::write_json;
use nsap_cli::run::{cmd_check, cmd_resume, cmd_run};
use nsap_cli::scale::cmd_scale_test;
use nsap_cli::sweep::{run_sweep, table};
use nsap_cli::REFERENCE_CONFIG;

const EXIT_CODES: &str =
    "Exit codes: 0 ok, 1 other failure (including failed scale tests), 2 escaped, \
3 numerical failure, 4 configuration error.\nNSAP_THREADS caps the worker threads.";

#[derive(Parser)]
#[command(name = "nsap", version, about = "Pseudo-spectral Navier–Stokes runs with L^p estimate diagnostics", after_help = EXIT_CODES)]
struct Cli {
    /// More logging (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario into its output directory.
    #[command(after_long_help = REFERENCE_CONFIG)]
    Run {
        config: PathBuf,
        /// Override output.dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue an existing run in the output directory up to solver.t_end.
        #[arg(long)]
        resume: bool,
        /// Replace an existing run in the output directory.
        #[arg(long, conflicts_with = "resume")]
        force: bool,
    },
    /// Continue a completed run from its last checkpoint.
    Resume {
        dir: PathBuf,
        /// New final time (defaults to the stored solver.t_end).
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Regenerate inequality reports from a run's stored series.
    #[command(after_long_help = ids_help())]
    Check {
        dir: PathBuf,
        /// Inequality id, or "all".
        id: String,
        /// Exponent p (defaults to the first entry of monitor.p_set).
        #[arg(long)]
        p: Option<f64>,
    },
    /// Invariance of κ_p and ‖·‖_N under u ↦ λu(λx) for a scenario's datum.
    ScaleTest {
        config: PathBuf,
        /// Scale factor (a power of two).
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        /// Exponents p (defaults to monitor.p_set); repeatable.
        #[arg(long)]
        p: Vec<f64>,
        /// Also write the reports as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Differences between the series and final fields of two runs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a [sweep] family at fixed κ_p and tabulate C_emp.
    Sweep {
        config: PathBuf,
        /// Override output.dir (members go to <dir>/member_NN).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Print the reference scenario with every key and its default.
    Reference,
}

fn ids_help() -> String {
    format!("Known ids: all, {}", known_ids().join(", "))
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("NSAP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("NSAP_THREADS = {v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.into()))
}

fn dispatch(cmd: Command) -> CliResult<ExitCode> {
    match cmd {
        Command::Run {
            config,
            out,
            resume,
            force,
        } => {
            cmd_run(&config, out, resume, force)?;
        }
        Command::Resume { dir, t_end } => {
            cmd_resume(&dir, t_end)?;
        }
        Command::Check { dir, id, p } => {
            cmd_check(&dir, &id, p)?;
        }
        Command::ScaleTest {
            config,
            lambda,
            p,
            out,
        } => {
            let reports = cmd_scale_test(&config, lambda, &p)?;
            if let Some(o) = out {
                write_json(&o, &reports)?;
            }
            if !reports.iter().all(|r| r.pass) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Compare { a, b, out } => {
            let r = compare_dirs(&a, &b)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&r).map_err(anyhow::Error::from)?
            );
            if let Some(o) = out {
                write_json(&o, &r)?;
            }
        }
        Command::Sweep { config, out, force } => {
            let cfg = ScenarioConfig::load(&config)?;
            let root = out.unwrap_or_else(|| cfg.output.dir.clone());
            let r = run_sweep(&cfg, &root, force)?;
            print!("{}", table(&r));
        }
        Command::Reference => print!("{REFERENCE_CONFIG}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = init_threads().and_then(|()| dispatch(cli.command));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("nsap: {e}");
            e.exit_code()
        }
    }
}
