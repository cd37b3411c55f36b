use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use goodput_core::experiment::{parse_config, run, Preset};

#[derive(Parser)]
#[command(name = "goodput-sim", version, about = "Outage and goodput simulator for robust multiuser beamforming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV results plus a metadata file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Parse and check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => parse_config(&config).map(|spec| {
            println!(
                "{}: ok (preset {}, {} channel sets, seed {})",
                config.display(),
                spec.preset.name(),
                spec.n_channel_sets,
                spec.seed
            );
        }),
        Command::Run {
            config,
            preset,
            seed,
            out,
            jobs,
        } => parse_config(&config).and_then(|mut spec| {
            if let Some(p) = preset {
                spec.preset = p;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(o) = out {
                spec.output_path = o;
            }
            let res = run(&spec, jobs)?;
            println!("wrote {} rows to {}", res.rows, res.csv_path.display());
            println!("metadata: {}", res.meta_path.display());
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
