use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qtomo_cli::{load, run_scenario, Command};

#[derive(Parser)]
#[command(name = "qtomo", version, about = "Tomograms, indicators and squeezing from scenario files")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve a state and report observables, density matrices or damping curves
    Evolve(Common),
    /// Optical tomograms at the requested instants
    Tomogram(Common),
    /// Tomographic entanglement indicators against density-matrix measures
    Indicators(Common),
    /// Hong-Mandel, Hillery and entropic squeezing
    Squeeze(Common),
    /// Spectra and level entanglement across a parameter sweep
    Sweep(Common),
    /// Delay, embedding and local Lyapunov exponents of a scalar series
    Timeseries(Common),
    /// Time-time slices of comb states and their ε_TEI
    Chrono(Common),
    /// Validate and summarize an external density matrix
    Ingest(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output root; each run gets its own directory below it
    #[arg(short, long, default_value = "runs")]
    out: PathBuf,
    /// Random seed (config key `seed`)
    #[arg(long)]
    seed: Option<u64>,
    /// Any config key, e.g. --set grid.n_x=401 or --set chrono.t_span_ps=400
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.cmd {
        Cmd::Evolve(a) => (Command::Evolve, a),
        Cmd::Tomogram(a) => (Command::Tomogram, a),
        Cmd::Indicators(a) => (Command::Indicators, a),
        Cmd::Squeeze(a) => (Command::Squeeze, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Timeseries(a) => (Command::Timeseries, a),
        Cmd::Chrono(a) => (Command::Chrono, a),
        Cmd::Ingest(a) => (Command::Ingest, a),
    };
    let mut overrides = args.set.clone();
    if let Some(s) = args.seed {
        overrides.push(format!("seed={s}"));
    }
    let result = load(args.config.as_deref(), command, &overrides).and_then(|loaded| {
        for w in &loaded.warnings {
            eprintln!("warning: {w}");
        }
        run_scenario(&loaded.config, &args.out)
    });
    match result {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
