use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tswind::commands;
use tswind::design::GainDesign;

#[derive(Parser)]
#[command(name = "tswind", version, about = "TS wind speed observer: simulation and design tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    SharedLyapunov,
    PerVertex,
}

#[derive(Subcommand)]
enum Command {
    /// Run a closed-loop simulation from a TOML config
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize observer gains and write them as a gain file
    DesignGains {
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "shared-lyapunov")]
        strategy: Strategy,
    },
    /// Check closed-loop observer stability for a gain file
    VerifyStability {
        #[arg(long)]
        gains: Option<PathBuf>,
    },
    /// Tower eigenfrequency and equivalent stiffness
    TowerStiffness {
        #[arg(long)]
        tower: Option<PathBuf>,
    },
    /// TS decomposition of the pendulum
    DecomposeDemo,
}

fn exit_for(e: &tswind::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_numerical() { 2 } else { 1 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out } => commands::simulate(&config, out.as_deref()),
        Command::DesignGains { weights, out, strategy } => {
            let s = match strategy {
                Strategy::SharedLyapunov => GainDesign::SharedLyapunov,
                Strategy::PerVertex => GainDesign::PerVertex,
            };
            commands::design_gains(weights.as_deref(), &out, s)
        }
        Command::VerifyStability { gains } => match commands::verify_stability(gains.as_deref()) {
            Ok(v) => {
                print!("{}", v.report);
                return if v.hurwitz { ExitCode::SUCCESS } else { ExitCode::from(2) };
            }
            Err(e) => Err(e),
        },
        Command::TowerStiffness { tower } => commands::tower_report(tower.as_deref()),
        Command::DecomposeDemo => commands::decompose_demo(),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => exit_for(&e),
    }
}
