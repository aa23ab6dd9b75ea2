use std::path::PathBuf;
use std::process::ExitCode;

use adaprox_bench::bench::{data_dir, run_bench, BenchOptions, Scale, Suite};
use adaprox_bench::config::parse_synthetic;
use adaprox_bench::experiment::{load_config, solve, HarnessError};
use adaprox_bench::inspect::inspect;
use adaprox_bench::verify::{run_suites, Fault, Level};
use adaprox_core::problems::LabelRule;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adaprox", version, about = "Adaptive proximal gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its trace CSV and JSON sidecar.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=value`, applied after the config file; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a benchmark suite.
    Bench {
        suite: Suite,
        #[arg(long, value_enum, default_value_t = Scale::Desk)]
        scale: Scale,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Applied to every run of the suite; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check the numerical invariants.
    Verify {
        #[arg(value_enum, default_value_t = Level::Fast)]
        level: Level,
        /// Run with a deliberate defect; the affected suite must fail.
        #[arg(long, value_enum)]
        inject: Option<Fault>,
    },
    /// Dataset utilities.
    Data {
        #[command(subcommand)]
        command: DataCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Labels {
    Sign,
    Mnist,
}

impl From<Labels> for LabelRule {
    fn from(l: Labels) -> Self {
        match l {
            Labels::Sign => LabelRule::Sign,
            Labels::Mnist => LabelRule::Mnist,
        }
    }
}

#[derive(Subcommand)]
enum DataCommand {
    /// Print size, sparsity, label balance and row norms of a LIBSVM file.
    Inspect {
        path: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value_t = Labels::Sign)]
        labels: Labels,
    },
    /// Write a synthetic dataset as LIBSVM text.
    Synth {
        /// e.g. `n=200,d=20,margin=0.1,flip=0,seed=1`
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Solve { config, overrides } => {
            let cfg = load_config(config.as_deref(), &overrides)?;
            let outcome = solve(&cfg)?;
            let last = outcome.final_row();
            println!(
                "wrote {} ({} rows); k={} F={} gradmap={}",
                cfg.output.display(),
                outcome.records.len(),
                last.k,
                last.f,
                last.gradmap
            );
        }
        Command::Bench { suite, scale, out, jobs, overrides } => {
            let dir = data_dir();
            let summary = run_bench(&BenchOptions {
                suite,
                scale,
                out_dir: &out,
                jobs,
                overrides: &overrides,
                data_dir: &dir,
            })?;
            for job in &summary.jobs {
                let slope = job.slope.value.map_or("n/a".to_string(), |s| format!("{s:.3}"));
                println!(
                    "{:<28} k={:<6} F={:<12.6e} gradmap={:<10.3e} slope({})={}",
                    job.name, job.iterations, job.f, job.gradmap, job.slope.metric, slope
                );
            }
            println!("wrote {}", out.join("summary.json").display());
        }
        Command::Verify { level, inject } => {
            let results = run_suites(level, inject);
            for r in &results {
                println!("{r}");
            }
            if results.iter().any(|r| !r.passed()) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Data { command: DataCommand::Inspect { path, json, labels } } => {
            let info = inspect(&path, labels.into())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&info).expect("inspection serializes"));
            } else {
                println!("{info}");
            }
        }
        Command::Data { command: DataCommand::Synth { spec, out } } => {
            let spec = parse_synthetic(&spec)?;
            let ds = spec.generate().map_err(|e| HarnessError::Data(e.to_string()))?;
            std::fs::write(&out, ds.to_libsvm())
                .map_err(|e| HarnessError::Runtime(format!("{}: {e}", out.display())))?;
            println!("wrote {} ({} samples, {} features)", out.display(), ds.len(), ds.dim());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
