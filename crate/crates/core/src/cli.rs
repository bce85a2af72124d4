//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::report::{cmd_bench, cmd_impute, cmd_score, parse_methods, with_jobs, Experiment, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "imputekit", version, about = "Impute, score and benchmark missing-value methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Impute a CSV m times with one method.
    Impute(Flags),
    /// Rank methods by energy I-Score.
    Score(Flags),
    /// Run a simulation study.
    Bench {
        #[command(subcommand)]
        experiment: BenchCommand,
    },
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Slope bias in the bivariate Gaussian example.
    Gaussian(Flags),
    /// Quantile estimates under a missing-at-random mask.
    UniformQuantile(Flags),
    /// Coverage of bootstrap intervals.
    Coverage(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Flat key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated method names.
    #[arg(long, visible_alias = "method")]
    methods: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    /// Bootstrap replicates per interval.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Simulated datasets in the coverage study.
    #[arg(long = "B")]
    b: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Quantile level.
    #[arg(long)]
    alpha: Option<f64>,
    /// One minus the confidence level of bootstrap intervals.
    #[arg(long)]
    ci_alpha: Option<f64>,
    #[arg(long)]
    mask_fraction: Option<f64>,
    /// Imputations per method when scoring.
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Desk-scale presets: reps 10, B 25, L 15.
    #[arg(long)]
    fast: bool,
}

impl Flags {
    fn resolve(self) -> Result<RunConfig> {
        let file = self.config.as_deref().map(Overrides::from_file).transpose()?;
        let flags = Overrides {
            input: self.input,
            output_dir: self.output_dir,
            methods: self.methods.as_deref().map(parse_methods).transpose()?,
            seed: self.seed,
            m: self.m,
            max_iter: self.max_iter,
            k: self.k,
            trees: self.trees,
            l: self.l,
            b: self.b,
            reps: self.reps,
            n: self.n,
            d: self.d,
            alpha: self.alpha,
            ci_alpha: self.ci_alpha,
            mask_fraction: self.mask_fraction,
            big_n: self.big_n,
            jobs: self.jobs,
            fast: self.fast.then_some(true),
        };
        RunConfig::resolve(flags, file)
    }
}

fn dispatch(command: Command) -> Result<()> {
    let (flags, experiment) = match command {
        Command::Impute(f) => (f, None),
        Command::Score(f) => (f, Some(None)),
        Command::Bench { experiment } => match experiment {
            BenchCommand::Gaussian(f) => (f, Some(Some(Experiment::Gaussian))),
            BenchCommand::UniformQuantile(f) => (f, Some(Some(Experiment::UniformQuantile))),
            BenchCommand::Coverage(f) => (f, Some(Some(Experiment::Coverage))),
        },
    };
    let cfg = flags.resolve()?;
    match experiment {
        None => {
            let paths = with_jobs(cfg.jobs, || cmd_impute(&cfg))?;
            println!("wrote {} files to {}", paths.len(), cfg.output_dir.display());
        }
        Some(None) => {
            let (report, _) = with_jobs(cfg.jobs, || cmd_score(&cfg))?;
            print!("{}", report.ranking_table());
        }
        Some(Some(exp)) => {
            let paths = with_jobs(cfg.jobs, || cmd_bench(&cfg, exp))?;
            for p in paths {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        1
    }
}
