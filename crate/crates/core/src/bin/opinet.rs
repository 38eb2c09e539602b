use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use opinet::experiment::{self, output_dir, ExperimentConfig, ExperimentError};
use opinet::topology::parse_topology_spec;

/// Opinion dynamics on networks of interacting Markov agents.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (default: config `output.dir`, then $OPINET_OUT, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset; one subdirectory per configuration.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Print the configurations instead of running them.
        #[arg(long)]
        dry_run: bool,
    },
    /// Write a generated graph as an edge list, e.g. `smallworld:100,k=1,p=0.2,seed=3`.
    Topo {
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), ExperimentError> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| output_dir(None));
            experiment::run_to_dir(&cfg, &dir)?;
            println!("{}", dir.display());
        }
        Command::Preset {
            name,
            out,
            seed,
            dry_run,
        } => {
            if dry_run {
                for r in experiment::preset(&name, seed)? {
                    println!("# {}\n{}", r.name, r.config.to_toml());
                }
                return Ok(());
            }
            let dir = output_dir(out.as_deref()).join(&name);
            for d in experiment::run_preset(&name, &dir, seed)? {
                println!("{}", d.display());
            }
        }
        Command::Topo { spec, out } => {
            let g = parse_topology_spec(&spec)
                .and_then(|s| s.generate())
                .map_err(|e| ExperimentError::Validation(format!("topology: {e}")))?;
            write(&out, &g.to_edge_list())?;
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let r = cfg.resolve()?;
            println!(
                "ok: {} agents, {} opinions, {} edges, solver {:?}",
                r.network.agent_count(),
                r.network.opinions(),
                r.network.graph().edge_count(),
                cfg.run.solver
            );
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<(), ExperimentError> {
    std::fs::write(path, text).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
