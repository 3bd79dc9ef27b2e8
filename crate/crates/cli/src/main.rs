use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use deltaprime_cli::{load_config, run_scenario, write_csv, CliError, Scenario};

#[derive(Parser, Debug)]
#[command(name = "deltaprime", version, about = "Green's functions for δ and δ′ point interactions")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV; defaults to `output` in the config, else stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Log progress to stderr
    #[arg(long, short, global = true)]
    verbose: bool,

    /// Override Im ω (and the synthesis η of wave-packet runs)
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta: Option<f64>,

    /// Worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Tabulate G₀ on the grid
    G0,
    /// Tabulate the dressed G on the grid
    Dress,
    /// Transmission and reflection amplitudes
    Scatter,
    /// Propagate a Gaussian packet
    Wavepacket,
    /// Mollifier width scan
    Scan,
    /// Run the invariant suite
    Validate,
}

impl Command {
    fn scenario(self) -> Scenario {
        match self {
            Command::G0 => Scenario::G0,
            Command::Dress => Scenario::Dress,
            Command::Scatter => Scenario::Scatter,
            Command::Wavepacket => Scenario::Wavepacket,
            Command::Scan => Scenario::Scan,
            Command::Validate => Scenario::Validate,
        }
    }
}

fn run(args: &Args) -> anyhow::Result<()> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool")?;
    }
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config: required".into()))?;
    let mut config = load_config(path)?;
    let wanted = args.command.scenario();
    if config.scenario != wanted {
        return Err(CliError::Validation(format!(
            "scenario: config declares {} but the subcommand is {}",
            config.scenario.name(),
            wanted.name()
        ))
        .into());
    }
    if let Some(eta) = args.eta {
        config.override_eta(eta)?;
    }
    let table = run_scenario(&config).with_context(|| format!("scenario {}", wanted.name()))?;
    match args.out.clone().or_else(|| config.output.clone()) {
        Some(out) => write_csv(&table, &out)?,
        None => print!("{}", table.to_csv_string()),
    }
    Ok(())
}

/// `Class: message` on one line. The chain stops at the first [`CliError`],
/// whose message already carries its source.
fn describe(err: &anyhow::Error) -> (&'static str, u8, String) {
    let mut parts = Vec::new();
    for cause in err.chain() {
        parts.push(cause.to_string());
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return (e.class(), e.exit_code(), parts.join(": ").replace('\n', " "));
        }
    }
    ("InternalError", 3, parts.join(": ").replace('\n', " "))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("ParseError: {first}");
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new()
        .filter_level(if args.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .init();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (class, code, message) = describe(&err);
            eprintln!("{class}: {message}");
            ExitCode::from(code)
        }
    }
}
