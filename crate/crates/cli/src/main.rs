use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use translocal_cli::{apply_override, describe, list, output_dir, run, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "translocal", version, about = "Run translocal-core experiments")]
struct Cli {
    /// Override a config key, e.g. `params.epsilon=0.05` or `seed=3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// List the experiment catalog.
    List,
    /// Show parameters and defaults of one experiment.
    Describe { name: String },
}

fn show(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:.6e}")
    } else {
        format!("{x}")
    }
}

fn run_command(cli: &Cli, path: &Path) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    for s in &cli.set {
        apply_override(&mut cfg, s)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    let dir = output_dir(&cfg);
    let record = run(&cfg, &dir)?;
    for note in &record.notes {
        eprintln!("{note}");
    }
    for v in &record.verdicts {
        let mark = if v.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {:<40} {:<24} expected {}", v.name, show(v.value), v.expected);
    }
    println!(
        "{} in {:.2}s, {} artifacts in {}",
        record.config.experiment,
        record.wall_clock_secs,
        record.artifacts.len(),
        dir.display()
    );
    Ok(record.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => {
            for e in list() {
                println!("{:<20} {}", e.name, e.summary);
            }
            Ok(true)
        }
        Command::Describe { name } => describe(name).map(|text| {
            print!("{text}");
            true
        }),
        Command::Run { config } => run_command(&cli, config),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
