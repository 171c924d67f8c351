use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use helix_cli::error::{Error, EXIT_OK};
use helix_cli::{parse_config, run_scenario, RunRequest};

/// Runs one topological-waveguide scenario described by a TOML file.
#[derive(Debug, Parser)]
#[command(name = "helix", version)]
struct Args {
    /// Scenario configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed; overrides `scenario.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also render SVG figures from the CSV outputs.
    #[arg(long)]
    plots: bool,
}

fn run(args: Args) -> Result<(), Error> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Threads("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Threads(e.to_string()))?;
    }
    let cfg = parse_config(&args.config)?;
    let text = std::fs::read_to_string(&args.config).map_err(|source| Error::ConfigRead {
        path: args.config.clone(),
        source,
    })?;
    let req = RunRequest::from_config(&cfg, args.out, args.seed, args.plots);
    let manifest = run_scenario(&cfg, &text, &req)?;
    println!(
        "{}: wrote {} file(s) to {}",
        manifest.scenario,
        manifest.files.len() + 1,
        req.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
