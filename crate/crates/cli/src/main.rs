use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holosim::config::{Format, Resolved};
use holosim::scenarios::SCENARIOS;
use holosim::CliError;

#[derive(Parser)]
#[command(name = "holosim", version, about = "Time-optimal holonomic gate scenarios on transmon pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts to <out>/<scenario>/.
    Run {
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output root (default: output.dir, then $HOLOSIM_OUT, then ./holosim-out).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<Format>>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// RK4 step in ps.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        no_decoherence: bool,
    },
    /// List scenarios with a one-line description and single-core runtime.
    List,
    /// Check a config file and print the resolved parameters with provenance.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn resolve(config: Option<&PathBuf>) -> Result<Resolved, CliError> {
    match config {
        Some(p) => Resolved::load(p),
        None => Ok(Resolved::defaults()),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::List => {
            for s in &SCENARIOS {
                println!("{:<22} {:>7}  {}", s.name, format!("~{}s", s.runtime_s), s.description);
            }
            Ok(())
        }
        Command::Validate { config } => {
            let resolved = Resolved::load(&config)?;
            println!("{}", serde_json::to_string_pretty(&resolved).expect("config serializes"));
            Ok(())
        }
        Command::Run { scenario, config, out, format, threads, dt, no_decoherence } => {
            let mut resolved = resolve(config.as_ref())?;
            if let Some(f) = format {
                resolved.config.output.formats = f;
                resolved.set_by_flag("output.formats");
            }
            if let Some(dt) = dt {
                resolved.config.simulation.dt_ps = dt;
                resolved.set_by_flag("simulation.dt_ps");
            }
            if no_decoherence {
                resolved.config.simulation.decoherence = false;
                resolved.set_by_flag("simulation.decoherence");
            }
            let problems = resolved.config.validate();
            if !problems.is_empty() {
                return Err(CliError::Config(problems.join("; ")));
            }
            if let Some(n) = threads {
                if n == 0 {
                    return Err(CliError::Config("--threads must be at least 1".into()));
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
            }
            let dir = holosim::output_dir(out, &resolved);
            let (target, manifest) = holosim::run(&scenario, &resolved, &dir)?;
            for f in &manifest.outputs {
                println!("{}", target.join(&f.file).display());
            }
            println!("{}", target.join("manifest.json").display());
            eprintln!("{scenario}: done in {:.1} s", manifest.wall_clock_s);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("holosim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
