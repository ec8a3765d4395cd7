use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinflip_bench::config::ExperimentConfig;
use spinflip_bench::crossover::crossover;
use spinflip_bench::records::read_records;
use spinflip_bench::report::{write_report, ReportMode};
use spinflip_bench::runner::{self, RunOptions};
use spinflip_bench::{store, BenchError, Result};
use spinflip_core::oracle::{brute_force_minima, energy_histogram};

#[derive(Debug, Parser)]
#[command(name = "spinflip", version, about = "Compare SA, SAM and SAQ annealers on Ising models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write problem instances and their ground-state sets.
    Generate(Sweep),
    /// Run every cell of the sweep and append records to results.jsonl.
    Run {
        #[command(flatten)]
        sweep: Sweep,
        /// Worker threads (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Skip cells already present in results.jsonl.
        #[arg(long)]
        resume: bool,
        /// Record wall-clock seconds per cell (output is then machine-dependent).
        #[arg(long)]
        timing: bool,
        /// Print one line per finished cell to stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Emit a plot-data CSV.
    Report {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = clap::value_parser!(ModeArg))]
        mode: ModeArg,
    },
    /// Locate where SA and SAM success curves cross.
    Crossover {
        #[command(flatten)]
        input: Input,
    },
    /// Brute-force the ground states of a problem file.
    Oracle {
        #[arg(long)]
        problem: PathBuf,
        /// Also print the full energy histogram.
        #[arg(long)]
        histogram: bool,
    },
}

#[derive(Debug, Args)]
struct Sweep {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config's out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Input {
    /// Experiment directory holding results.jsonl; reports are written here.
    #[arg(long)]
    out: PathBuf,
    /// Read records from this file instead of <out>/results.jsonl.
    #[arg(long)]
    results: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
struct ModeArg(ReportMode);

impl std::str::FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.parse().map(ModeArg).map_err(|e: BenchError| e.to_string())
    }
}

impl Sweep {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        let out = self
            .out
            .clone()
            .or_else(|| config.out_dir.clone())
            .ok_or_else(|| BenchError::Config("no output directory: pass --out or set out_dir".into()))?;
        Ok((config, out))
    }
}

impl Input {
    fn records(&self) -> Result<Vec<spinflip_bench::ResultRecord>> {
        let path = self.results.clone().unwrap_or_else(|| store::results_path(&self.out));
        read_records(&path)
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    store::write_atomic(path, text.as_bytes())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(sweep) => {
            let (config, out) = sweep.load()?;
            let written = runner::generate(&config, &out)?;
            println!("wrote {} problem instances to {}", written.len(), store::problem_dir(&out).display());
        }
        Command::Run { sweep, workers, resume, timing, progress } => {
            let (config, out) = sweep.load()?;
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            if workers == 0 {
                return Err(BenchError::Config("--workers must be at least 1".into()));
            }
            let opts = RunOptions { workers, resume, timing, progress };
            let records = runner::run(&config, &out, &opts)?;
            println!("{} records in {}", records.len(), store::results_path(&out).display());
        }
        Command::Report { input, mode } => {
            let records = input.records()?;
            let path = input.out.join(format!("{}.csv", mode.0));
            let rows = write_report(&records, mode.0, &path)?;
            println!("wrote {rows} rows to {}", path.display());
        }
        Command::Crossover { input } => {
            let summaries = crossover(&input.records()?)?;
            for s in &summaries {
                println!("{} n={}: {}", s.family, s.n, s.message);
                for c in &s.crossings {
                    if c.ci_overlap {
                        println!("  [{}, {}]: confidence intervals overlap, not resolved", c.lower, c.upper);
                    }
                }
            }
            write_json(&input.out.join("crossover.json"), &summaries)?;
        }
        Command::Oracle { problem, histogram } => {
            let model = store::read_problem(&problem)?;
            let minima = brute_force_minima(&model)?;
            println!("{}", serde_json::to_string(&minima)?);
            if histogram {
                for (energy, count) in energy_histogram(&model)? {
                    println!("{energy}\t{count}");
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
