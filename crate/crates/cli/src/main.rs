use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oscdecay_core::experiment::{parse_config_with, run, Command, Overrides};

#[derive(Parser, Debug)]
#[command(name = "oscdecay", version, about = "Oscillatory-integral decay and maximal-operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Degree, order, height, critical directions and factorizations of the phase.
    Analyze(Common),
    /// Decay-exponent sweep over a sigma grid.
    Decay(Common),
    /// Lower-bound growth experiment for the maximal operator.
    Sharpness(Common),
    /// Seeded property suite.
    Verify(Common),
    /// Oscillatory integrals for a JSON-lines request file.
    Batch(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default from the config, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for the parallel parts.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<bool, String> {
    let (command, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Decay(a) => (Command::Decay, a),
        Cmd::Sharpness(a) => (Command::Sharpness, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Batch(a) => (Command::Batch, a),
    };
    let text = std::fs::read(&args.config).map_err(|e| format!("reading {}: {e}", args.config.display()))?;
    let ov = Overrides { command: Some(command), seed: args.seed, tol: args.tol, out: args.out, threads: args.threads };
    let cfg = parse_config_with(&text, &ov).map_err(|e| format!("[{}] {e}", e.code()))?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    let summary = run(&cfg).map_err(|e| format!("[{}] {e}", e.code()))?;
    for f in &summary.files {
        println!("{}", f.display());
    }
    println!(
        "{} {} config_sha256={}",
        command.as_str(),
        if summary.pass { "pass" } else { "fail" },
        summary.config_sha256
    );
    Ok(summary.pass)
}
