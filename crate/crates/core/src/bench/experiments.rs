use std::io::Write;

use rayon::prelude::*;

use super::estimators::{quantile_est, slope_est};
use super::generators::{gen_gaussian_example, gen_uniform_example, GaussianExampleConfig, Simulated, UniformExampleConfig};
use crate::data::{format_real, CompletedDataset};
use crate::engines::Imputer;
use crate::error::{Error, Result};
use crate::rng::SeedPath;
use crate::uncertainty::{coverage_experiment, pooled, CoverageConfig, CoverageTable, Estimator};

pub const FULL_DATA: &str = "full-data";
pub const COMPLETE_CASE: &str = "complete-case";

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    /// 1-based replication index.
    pub rep: usize,
    pub method: String,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSummary {
    pub method: String,
    pub mean: f64,
    /// Sample standard deviation over replications (0 for a single one).
    pub sd: f64,
    /// `|mean - target|`.
    pub abs_error: f64,
    pub reps: usize,
}

/// Per-replication estimates and their per-method summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTable {
    pub target: f64,
    /// Ordered by replication, then method.
    pub rows: Vec<EstimateRow>,
    pub summary: Vec<EstimateSummary>,
}

impl EstimateTable {
    fn new(target: f64, methods: &[String], rows: Vec<EstimateRow>) -> Self {
        let summary = methods
            .iter()
            .map(|m| {
                let v: Vec<f64> = rows.iter().filter(|r| &r.method == m).map(|r| r.estimate).collect();
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                let sd = if v.len() > 1 {
                    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
                } else {
                    0.0
                };
                EstimateSummary {
                    method: m.clone(),
                    mean,
                    sd,
                    abs_error: (mean - target).abs(),
                    reps: v.len(),
                }
            })
            .collect();
        EstimateTable { target, rows, summary }
    }

    /// Sorts the summary by distance to the target, ties by name.
    fn order_by_error(mut self) -> Self {
        self.summary
            .sort_by(|a, b| a.abs_error.total_cmp(&b.abs_error).then_with(|| a.method.cmp(&b.method)));
        self
    }

    pub fn summary_for(&self, method: &str) -> Option<&EstimateSummary> {
        self.summary.iter().find(|s| s.method == method)
    }

    pub fn write_rows_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Ingestion(format!("writing estimates: {e}"));
        w.write_record(["rep", "method", "estimate"]).map_err(err)?;
        for r in &self.rows {
            w.write_record([r.rep.to_string(), r.method.clone(), format_real(r.estimate)])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("writing estimates", e))
    }

    pub fn write_summary_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Ingestion(format!("writing summary: {e}"));
        w.write_record(["method", "mean", "sd", "abs_error", "reps"]).map_err(err)?;
        for s in &self.summary {
            w.write_record([
                s.method.clone(),
                format_real(s.mean),
                format_real(s.sd),
                format_real(s.abs_error),
                s.reps.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("writing summary", e))
    }
}

/// Runs every `(replication, method)` job and assembles rows by index.
fn run_grid(
    sims: &[Simulated],
    imputers: &[&dyn Imputer],
    seed: &SeedPath,
    estimate: &(dyn Fn(&[CompletedDataset]) -> Result<f64> + Sync),
    m: usize,
) -> Result<Vec<Vec<f64>>> {
    let jobs: Vec<(usize, usize)> = (0..sims.len()).flat_map(|r| (0..imputers.len()).map(move |k| (r, k))).collect();
    let out: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(r, k)| {
            let imp = imputers[k];
            let m = if imp.is_stochastic() { m } else { 1 };
            imp.impute(&sims[r].masked, m, &seed.child(r as u64).child(1 + k as u64))
                .and_then(|c| estimate(&c))
                .map_err(|e| Error::Method {
                    method: imp.name().to_string(),
                    source: Box::new(Error::Replication {
                        replication: r + 1,
                        source: Box::new(e),
                    }),
                })
        })
        .collect();
    let mut grid = vec![Vec::with_capacity(imputers.len()); sims.len()];
    for ((r, _), v) in jobs.into_iter().zip(out) {
        grid[r].push(v?);
    }
    Ok(grid)
}

fn simulate(reps: usize, seed: &SeedPath, gen: impl Fn(u64) -> Result<Simulated> + Sync) -> Result<Vec<Simulated>> {
    (0..reps)
        .into_par_iter()
        .map(|r| gen(seed.child(r as u64).child(0).derive_seed()))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBenchConfig {
    pub n: usize,
    pub miss_prob: f64,
    pub reps: usize,
    pub m: usize,
}

impl Default for GaussianBenchConfig {
    fn default() -> Self {
        GaussianBenchConfig {
            n: 5000,
            miss_prob: 0.5,
            reps: 10,
            m: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBench {
    /// Slope of `X2` on `X1`; the target is the true slope 1.
    pub table: EstimateTable,
    /// First replication: the full data, then one completion per method.
    pub panels: Vec<(String, CompletedDataset)>,
}

/// Slope of `X2` on (imputed) `X1` in the Gaussian example, per method,
/// pooled over `m` completions, plus the full-data slope.
pub fn run_gaussian_bench(imputers: &[&dyn Imputer], cfg: &GaussianBenchConfig, seed: &SeedPath) -> Result<GaussianBench> {
    if cfg.reps == 0 || cfg.m == 0 {
        return Err(Error::Config("reps and m must be at least 1".into()));
    }
    let sims = simulate(cfg.reps, seed, |s| {
        gen_gaussian_example(&GaussianExampleConfig {
            n: cfg.n,
            miss_prob: cfg.miss_prob,
            seed: s,
        })
    })?;
    let slope = Estimator::slope(1, 0);
    let grid = run_grid(&sims, imputers, seed, &|c| pooled(&slope, c), cfg.m)?;

    let mut methods = vec![FULL_DATA.to_string()];
    methods.extend(imputers.iter().map(|i| i.name().to_string()));
    let mut rows = Vec::new();
    for (r, sim) in sims.iter().enumerate() {
        let full = CompletedDataset::from_complete(&sim.full)?;
        rows.push(EstimateRow {
            rep: r + 1,
            method: FULL_DATA.into(),
            estimate: slope_est(&full, 1, 0)?,
        });
        for (k, imp) in imputers.iter().enumerate() {
            rows.push(EstimateRow {
                rep: r + 1,
                method: imp.name().into(),
                estimate: grid[r][k],
            });
        }
    }

    let mut panels = vec![(FULL_DATA.to_string(), CompletedDataset::from_complete(&sims[0].full)?)];
    for (k, imp) in imputers.iter().enumerate() {
        let c = imp.impute(&sims[0].masked, 1, &seed.child(0).child(1 + k as u64))?;
        panels.push((imp.name().to_string(), c.into_iter().next().expect("one completion")));
    }
    Ok(GaussianBench {
        table: EstimateTable::new(1.0, &methods, rows),
        panels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileBenchConfig {
    /// Simulation settings; `seed` is ignored in favour of the bench seed.
    pub data: UniformExampleConfig,
    pub reps: usize,
    pub alpha: f64,
    pub m: usize,
}

impl Default for QuantileBenchConfig {
    fn default() -> Self {
        QuantileBenchConfig {
            data: UniformExampleConfig::default(),
            reps: 50,
            alpha: 0.1,
            m: 5,
        }
    }
}

/// `alpha`-quantile of `X1` in the uniform example, per method, plus the
/// full-data and complete-case references. The summary is ordered by
/// distance of the mean estimate to `alpha`.
pub fn run_quantile_bench(imputers: &[&dyn Imputer], cfg: &QuantileBenchConfig, seed: &SeedPath) -> Result<EstimateTable> {
    if cfg.reps < 5 {
        return Err(Error::Config(format!("reps = {} is below the minimum of 5", cfg.reps)));
    }
    if cfg.m == 0 {
        return Err(Error::Config("m must be at least 1".into()));
    }
    cfg.data.validate()?;
    let sims = simulate(cfg.reps, seed, |s| gen_uniform_example(&UniformExampleConfig { seed: s, ..cfg.data }))?;
    let q = Estimator::quantile(0, cfg.alpha);
    let grid = run_grid(&sims, imputers, seed, &|c| pooled(&q, c), cfg.m)?;

    let mut methods = vec![FULL_DATA.to_string(), COMPLETE_CASE.to_string()];
    methods.extend(imputers.iter().map(|i| i.name().to_string()));
    let mut rows = Vec::new();
    for (r, sim) in sims.iter().enumerate() {
        let reference = [
            (FULL_DATA, quantile_est(sim.full.column_values(0), cfg.alpha)?),
            (COMPLETE_CASE, quantile_est(&sim.masked.observed(0), cfg.alpha)?),
        ];
        for (name, estimate) in reference {
            rows.push(EstimateRow {
                rep: r + 1,
                method: name.into(),
                estimate,
            });
        }
        for (k, imp) in imputers.iter().enumerate() {
            rows.push(EstimateRow {
                rep: r + 1,
                method: imp.name().into(),
                estimate: grid[r][k],
            });
        }
    }
    Ok(EstimateTable::new(cfg.alpha, &methods, rows).order_by_error())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageBenchConfig {
    /// Simulation settings; `seed` is ignored in favour of the bench seed.
    pub data: UniformExampleConfig,
    /// Quantile level of `X1` whose true value (`alpha` itself) is covered.
    pub alpha: f64,
    pub coverage: CoverageConfig,
}

impl Default for CoverageBenchConfig {
    fn default() -> Self {
        CoverageBenchConfig {
            data: UniformExampleConfig {
                n: 1000,
                ..Default::default()
            },
            alpha: 0.1,
            coverage: CoverageConfig::default(),
        }
    }
}

/// Coverage of bootstrap intervals for the `alpha`-quantile of `X1`, whose
/// true value is `alpha` because `X1` is uniform.
pub fn run_coverage_bench(imputers: &[&dyn Imputer], cfg: &CoverageBenchConfig, seed: &SeedPath) -> Result<CoverageTable> {
    cfg.data.validate()?;
    let data = cfg.data;
    let gen = move |s: &SeedPath| {
        gen_uniform_example(&UniformExampleConfig {
            seed: s.derive_seed(),
            ..data
        })
        .map(|sim| sim.masked)
    };
    coverage_experiment(&gen, cfg.alpha, imputers, &Estimator::quantile(0, cfg.alpha), &cfg.coverage, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{Method, MethodConfig};
    use crate::uncertainty::BootstrapConfig;

    #[test]
    fn quantile_smoke_shape_and_order() {
        let imps = [MethodConfig::new(Method::MiceCart), MethodConfig::new(Method::Knn)];
        let refs: Vec<&dyn Imputer> = imps.iter().map(|i| i as &dyn Imputer).collect();
        let cfg = QuantileBenchConfig {
            data: UniformExampleConfig { n: 600, ..Default::default() },
            reps: 5,
            ..Default::default()
        };
        let t = run_quantile_bench(&refs, &cfg, &SeedPath::new(1)).unwrap();
        assert_eq!(t.rows.len(), 5 * 4);
        assert_eq!(t.rows.iter().filter(|r| r.method == "knn").count(), 5);
        assert!(t.summary.windows(2).all(|w| w[0].abs_error <= w[1].abs_error));
        let again = run_quantile_bench(&refs, &cfg, &SeedPath::new(1)).unwrap();
        assert_eq!(t, again);
        assert!(run_quantile_bench(&refs, &QuantileBenchConfig { reps: 4, ..cfg }, &SeedPath::new(1)).is_err());
    }

    #[test]
    fn full_data_control_recovers_alpha() {
        let cfg = QuantileBenchConfig {
            data: UniformExampleConfig { n: 5000, ..Default::default() },
            reps: 20,
            ..Default::default()
        };
        let t = run_quantile_bench(&[], &cfg, &SeedPath::new(2)).unwrap();
        let full = t.summary_for(FULL_DATA).unwrap();
        // sd of the sample 0.1-quantile of U(0,1) at n = 5000 is 0.0042
        let se = 0.3 / 5000f64.sqrt() / (20f64).sqrt();
        assert!(full.abs_error < 4.0 * se, "{full:?}");
        assert!(t.summary_for(COMPLETE_CASE).unwrap().mean > 0.1);
    }

    #[test]
    fn gaussian_panels_and_rows() {
        let imps = [MethodConfig::new(Method::MiceNormPredict), MethodConfig::new(Method::MiceNormNob)];
        let refs: Vec<&dyn Imputer> = imps.iter().map(|i| i as &dyn Imputer).collect();
        let cfg = GaussianBenchConfig { n: 400, reps: 2, m: 2, ..Default::default() };
        let b = run_gaussian_bench(&refs, &cfg, &SeedPath::new(3)).unwrap();
        assert_eq!(b.table.rows.len(), 6);
        assert_eq!(b.panels.len(), 3);
        assert_eq!(b.panels[0].0, FULL_DATA);
        assert!(b.panels.iter().all(|(_, c)| c.n_rows() == 400));
    }

    #[test]
    fn coverage_smoke() {
        let imps = [MethodConfig::new(Method::Knn)];
        let refs: Vec<&dyn Imputer> = imps.iter().map(|i| i as &dyn Imputer).collect();
        let cfg = CoverageBenchConfig {
            data: UniformExampleConfig { n: 300, ..Default::default() },
            alpha: 0.1,
            coverage: CoverageConfig {
                simulations: 10,
                bootstrap: BootstrapConfig { replicates: 5, ..Default::default() },
                ..Default::default()
            },
        };
        let t = run_coverage_bench(&refs, &cfg, &SeedPath::new(4)).unwrap();
        assert_eq!(t.rows.len(), 10);
        assert_eq!(t.true_value, 0.1);
    }
}
