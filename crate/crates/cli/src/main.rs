use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use onesided_lab::{describe, load_config, output, run, LabError, EXIT_ASSERTION, EXIT_PASS};

#[derive(Parser)]
#[command(name = "onesided-lab", version, about = "One-sided weights, operators and compactness experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; falls back to ONESIDED_LAB_THREADS.
        #[arg(long, env = "ONESIDED_LAB_THREADS")]
        threads: Option<usize>,
    },
    /// Print an experiment's inputs, outputs and CSV columns.
    Describe { experiment: String },
    /// Parse and validate a config without computing.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, threads } => run_command(&config, out, threads),
        Command::Describe { experiment } => match describe::lookup(&experiment) {
            Ok(d) => {
                print!("{}", describe::render(d));
                Ok(EXIT_PASS)
            }
            Err(e) => Err(e),
        },
        Command::Validate { config } => load_config(&config).map(|c| {
            println!("{}: valid {} config, hash {}", config.display(), c.experiment.name(), output::config_hash(&c));
            EXIT_PASS
        }),
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run_command(path: &PathBuf, out: Option<PathBuf>, threads: Option<usize>) -> Result<i32, LabError> {
    let config = load_config(path)?;
    if let Some(n) = threads {
        if n == 0 {
            return Err(LabError::invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Compute(e.to_string()))?;
    }
    let dir = output::output_dir(out.as_deref(), &config);
    let (outcome, manifest) = run(&config, &dir)?;
    for c in &outcome.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} files to {}", manifest.files.len(), dir.display());
    Ok(if outcome.passed() { EXIT_PASS } else { EXIT_ASSERTION })
}
