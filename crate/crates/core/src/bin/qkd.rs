use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdc_qkd::commands::{cmd_analyze, cmd_fluctuation, cmd_optimize, cmd_sweep, write_output, CommandError};
use pdc_qkd::scenario::{load_config, ScenarioConfig};

/// Key-rate sweeps for QKD with a triggered PDC source.
#[derive(Parser)]
#[command(name = "qkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimized key rate and supporting statistics per loss and protocol.
    Sweep(Common),
    /// Optimal mean photon-pair number per loss and protocol.
    Optimize(Common),
    /// Key rates with finite-size statistical fluctuations.
    Fluctuation(Common),
    /// Key rate from measured detection counts.
    Analyze(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; defaults to the config's `output` entry.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn output_path(common: &Common, cfg: &ScenarioConfig) -> Result<PathBuf, CommandError> {
    match (&common.out, &cfg.output) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(p)) => Ok(cfg.resolve(p)),
        (None, None) => Err(CommandError::Validation("no output path: pass --out or set `output`".into())),
    }
}

fn run(command: Command) -> Result<(), CommandError> {
    let (Command::Sweep(common) | Command::Optimize(common) | Command::Fluctuation(common) | Command::Analyze(common)) =
        &command;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CommandError::Runtime(e.to_string()))?;
    }
    let cfg = load_config(Path::new(&common.config)).map_err(|e| CommandError::Validation(e.to_string()))?;
    let out = output_path(common, &cfg)?;
    let text = match command {
        Command::Sweep(_) => cmd_sweep(&cfg)?,
        Command::Optimize(_) => cmd_optimize(&cfg)?,
        Command::Fluctuation(_) => cmd_fluctuation(&cfg)?,
        Command::Analyze(_) => {
            let analysis = cmd_analyze(&cfg)?;
            print!("{}", analysis.text_report());
            analysis.csv()?
        }
    };
    write_output(&out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
