use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Experiment, RunConfig};
use super::svg;
use crate::bench::{
    complete_case_oracle, gen_uniform_example, run_coverage_bench, run_gaussian_bench, run_quantile_bench,
    CoverageBenchConfig, GaussianBenchConfig, QuantileBenchConfig, UniformExampleConfig,
};
use crate::data::{format_real, read_csv, write_csv_to, MaskedDataset, ReadOptions};
use crate::engines::{Imputer, Method, MethodConfig, MultipleImputation};
use crate::error::{Error, Result};
use crate::rng::SeedPath;
use crate::scoring::{iscore, IScoreConfig, ScoreReport};
use crate::uncertainty::{BootstrapConfig, CoverageConfig};

/// Draws used for the complete-case oracle line of the quantile plot.
pub const ORACLE_DRAWS: usize = 4_000_000;

/// Runs `f` on a pool of `jobs` threads (one per CPU when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs:?} worker threads: {e}")))?;
    pool.install(f)
}

/// Files rendered in memory, written together.
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new() -> Self {
        Outputs { files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn add_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    /// Writes every file into `dir`; on failure removes the ones already
    /// written.
    fn write(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let mut written = Vec::new();
        for (name, bytes) in self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, bytes) {
                let _ = std::fs::remove_file(&path);
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(Error::io(format!("writing {}", path.display()), e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

fn method_config(cfg: &RunConfig, method: Method) -> MethodConfig {
    let mut mc = MethodConfig::new(method);
    mc.max_iter = cfg.max_iter;
    mc.k = cfg.k;
    mc.forest.n_trees = cfg.trees;
    mc
}

fn method_configs(cfg: &RunConfig, fallback: Vec<Method>) -> Vec<MethodConfig> {
    let methods = cfg.methods.clone().unwrap_or(fallback);
    methods.into_iter().map(|m| method_config(cfg, m)).collect()
}

fn as_imputers(methods: &[MethodConfig]) -> Vec<&dyn Imputer> {
    methods.iter().map(|m| m as &dyn Imputer).collect()
}

fn read_input(cfg: &RunConfig) -> Result<MaskedDataset> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("an --input CSV is required".into()))?;
    read_csv(path, &ReadOptions::default())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Ingestion(format!("rendering csv: {e}"))
}

fn mask_csv(ds: &MaskedDataset, out: &mut Vec<u8>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ds.columns().iter().map(|c| c.name.as_str())).map_err(csv_err)?;
    for row in ds.mask_of() {
        w.write_record(row.iter().map(u8::to_string)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("rendering mask", e))
}

fn chains_csv(ds: &MaskedDataset, mi: &MultipleImputation, out: &mut Vec<u8>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["chain", "cycle", "column", "mean"]).map_err(csv_err)?;
    for (c, trace) in mi.chain_means.iter().enumerate() {
        for (t, means) in trace.iter().enumerate() {
            for (j, v) in means.iter().enumerate() {
                if let Some(v) = v {
                    w.write_record([(c + 1).to_string(), (t + 1).to_string(), ds.name(j).to_string(), format_real(*v)])
                        .map_err(csv_err)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io("rendering chains", e))
}

/// Imputes the input CSV `m` times with the single requested method and
/// writes `imp_1.csv … imp_m.csv`, `mask.csv` and `chains.csv`.
pub fn cmd_impute(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let method = match cfg.methods.as_deref() {
        Some([m]) => *m,
        Some(_) => return Err(Error::Config("impute takes exactly one method".into())),
        None => return Err(Error::Config("impute needs --method".into())),
    };
    let ds = read_input(cfg)?;
    let mi = method_config(cfg, method).run(&ds, cfg.m, &SeedPath::new(cfg.seed))?;
    let mut out = Outputs::new();
    for (i, c) in mi.completions.iter().enumerate() {
        out.add_with(&format!("imp_{}.csv", i + 1), |buf| write_csv_to(c, buf, "NA"))?;
    }
    out.add_with("mask.csv", |buf| mask_csv(&ds, buf))?;
    out.add_with("chains.csv", |buf| chains_csv(&ds, &mi, buf))?;
    out.write(&cfg.output_dir)
}

/// The input CSV, or a simulated uniform example when none is given.
fn score_dataset(cfg: &RunConfig) -> Result<MaskedDataset> {
    if cfg.input.is_some() {
        return read_input(cfg);
    }
    let data = UniformExampleConfig {
        n: cfg.n.unwrap_or(Experiment::UniformQuantile.default_n()),
        d: cfg.d,
        seed: SeedPath::new(cfg.seed).child(0).derive_seed(),
        ..Default::default()
    };
    Ok(gen_uniform_example(&data)?.masked)
}

/// Scores each requested method (all of them by default) and writes
/// `scores.csv`. Every method sees the same test mask.
pub fn cmd_score(cfg: &RunConfig) -> Result<(ScoreReport, Vec<PathBuf>)> {
    let ds = score_dataset(cfg)?;
    let methods = method_configs(cfg, Method::ALL.to_vec());
    let icfg = IScoreConfig {
        n_imputations: cfg.big_n,
        mask_fraction: cfg.mask_fraction,
        ..Default::default()
    };
    let seed = SeedPath::new(cfg.seed).child(1);
    let entries = methods
        .par_iter()
        .map(|m| iscore(&ds, m, &icfg, &seed))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let report = ScoreReport::new(entries)?;
    let mut out = Outputs::new();
    out.add_with("scores.csv", |buf| report.write_csv_to(buf))?;
    let paths = out.write(&cfg.output_dir)?;
    Ok((report, paths))
}

fn uniform_data(cfg: &RunConfig, experiment: Experiment) -> UniformExampleConfig {
    UniformExampleConfig {
        n: cfg.n.unwrap_or(experiment.default_n()),
        d: cfg.d,
        seed: cfg.seed,
        ..Default::default()
    }
}

/// Runs one experiment and writes `<name>_reps.csv`, `<name>_summary.csv`
/// and `<name>.svg` (plus `quantile_oracle.csv` for the quantile study).
pub fn cmd_bench(cfg: &RunConfig, experiment: Experiment) -> Result<Vec<PathBuf>> {
    let methods = method_configs(cfg, experiment.default_methods());
    let imputers = as_imputers(&methods);
    let seed = SeedPath::new(cfg.seed);
    let mut out = Outputs::new();
    match experiment {
        Experiment::Gaussian => {
            let bcfg = GaussianBenchConfig {
                n: cfg.n.unwrap_or(experiment.default_n()),
                reps: cfg.reps,
                m: cfg.m,
                ..Default::default()
            };
            let bench = run_gaussian_bench(&imputers, &bcfg, &seed)?;
            out.add_with("gaussian_reps.csv", |b| bench.table.write_rows_to(b))?;
            out.add_with("gaussian_summary.csv", |b| bench.table.write_summary_to(b))?;
            out.add("gaussian.svg", svg::scatter_panels(&bench.panels, 0, 1)?.into_bytes());
        }
        Experiment::UniformQuantile => {
            let qcfg = QuantileBenchConfig {
                data: uniform_data(cfg, experiment),
                reps: cfg.reps,
                alpha: cfg.alpha,
                m: cfg.m,
            };
            let table = run_quantile_bench(&imputers, &qcfg, &seed)?;
            let oracle = complete_case_oracle(&qcfg.data, cfg.alpha, ORACLE_DRAWS)?;
            out.add_with("quantile_reps.csv", |b| table.write_rows_to(b))?;
            out.add_with("quantile_summary.csv", |b| table.write_summary_to(b))?;
            out.add(
                "quantile_oracle.csv",
                format!(
                    "alpha,oracle,std_error,draws\n{},{},{},{}\n",
                    format_real(cfg.alpha),
                    format_real(oracle.value),
                    format_real(oracle.std_error),
                    ORACLE_DRAWS
                )
                .into_bytes(),
            );
            out.add("quantile.svg", svg::quantile_strip(&table, cfg.alpha, Some(oracle.value))?.into_bytes());
        }
        Experiment::Coverage => {
            let ccfg = CoverageBenchConfig {
                data: uniform_data(cfg, experiment),
                alpha: cfg.alpha,
                coverage: CoverageConfig {
                    simulations: cfg.b,
                    bootstrap: BootstrapConfig {
                        replicates: cfg.l,
                        alpha: cfg.ci_alpha,
                        m: cfg.m,
                    },
                    ..Default::default()
                },
            };
            let table = run_coverage_bench(&imputers, &ccfg, &seed)?;
            out.add_with("coverage_reps.csv", |b| table.write_rows_to(b))?;
            out.add_with("coverage_summary.csv", |b| table.write_summary_to(b))?;
            out.add("coverage.svg", svg::coverage_segments(&table)?.into_bytes());
        }
    }
    out.write(&cfg.output_dir)
}
