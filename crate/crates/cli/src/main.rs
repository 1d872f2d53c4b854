use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tpm_cli::acceptance::{self, DEFAULT_SEED};
use tpm_cli::config::SpamSetting;
use tpm_cli::{emit, load_config, run_suite, CliError, Format, Mode, Settings, Suite};

/// Two-point measurement experiment runner.
#[derive(Parser)]
#[command(name = "tpm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write its result table.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// table2, table4, fig2 or custom; may instead come from --config.
    suite: Option<Suite>,
    /// Flat TOML file with the same keys as the flags; flags win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Required for montecarlo and both modes.
    #[arg(long)]
    seed: Option<u64>,
    /// Shots per measurement setting.
    #[arg(long)]
    shots: Option<u64>,
    /// Independent replications per cell.
    #[arg(long)]
    reps: Option<u32>,
    /// Preparation and detection error probabilities.
    #[arg(long, value_name = "P_PREP,P_DETECT")]
    spam: Option<String>,
    /// Preparation pulse phase (rad).
    #[arg(long, allow_negative_numbers = true)]
    phi0: Option<f64>,
    /// Evolution pulse phase (rad).
    #[arg(long, allow_negative_numbers = true)]
    phi1: Option<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also run the reproduction checks; exit 3 if any fails.
    #[arg(long)]
    check: bool,
    /// custom: amplitude of |↓⟩ in the pure input.
    #[arg(long)]
    alpha: Option<f64>,
    /// custom: βE of a Gibbs input.
    #[arg(long = "beta-e")]
    beta_e: Option<f64>,
    /// custom: first-measurement axis (x, y, z, o or "a,b,c").
    #[arg(long = "p-axis", allow_hyphen_values = true)]
    p_axis: Option<String>,
    /// custom: second-measurement axis.
    #[arg(long = "q-axis", allow_hyphen_values = true)]
    q_axis: Option<String>,
    /// custom: evolution angle Ωt (rad).
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
}

impl RunArgs {
    fn settings(&self) -> Settings {
        Settings {
            suite: self.suite,
            mode: self.mode,
            seed: self.seed,
            shots: self.shots,
            reps: self.reps,
            spam: self.spam.clone().map(SpamSetting::Text),
            phi0: self.phi0,
            phi1: self.phi1,
            out: self.out.clone(),
            format: self.format,
            check: self.check.then_some(true),
            alpha: self.alpha,
            beta_e: self.beta_e,
            p_axis: self.p_axis.clone(),
            q_axis: self.q_axis.clone(),
            theta: self.theta,
        }
    }
}

fn run(args: &RunArgs) -> Result<(), CliError> {
    let spec = load_config(args.config.as_deref(), args.settings())?;
    let rows = run_suite(&spec)?;
    emit(&rows, &spec.output)?;
    if spec.check {
        let outcomes = acceptance::run_all(spec.seed.unwrap_or(DEFAULT_SEED))?;
        for o in &outcomes {
            eprintln!("{o}");
        }
        let failed = outcomes.iter().filter(|o| !o.passed).count();
        if failed > 0 {
            return Err(CliError::CheckFailed(failed));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tpm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
