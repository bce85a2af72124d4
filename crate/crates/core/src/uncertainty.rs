//! Bootstrap confidence intervals around imputation-based estimators and
//! the coverage experiment that checks them.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bench::{quantile_est, slope_est};
use crate::data::{format_real, CompletedDataset, MaskedDataset};
use crate::engines::Imputer;
use crate::error::{Error, Result};
use crate::rng::SeedPath;

type EstimatorFn = dyn Fn(&CompletedDataset) -> Result<f64> + Send + Sync;

/// A named statistic of a completed dataset.
#[derive(Clone)]
pub struct Estimator {
    name: String,
    f: Arc<EstimatorFn>,
}

impl fmt::Debug for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Estimator").field("name", &self.name).finish_non_exhaustive()
    }
}

impl Estimator {
    pub fn new(name: impl Into<String>, f: impl Fn(&CompletedDataset) -> Result<f64> + Send + Sync + 'static) -> Self {
        Estimator {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, ds: &CompletedDataset) -> Result<f64> {
        (self.f)(ds)
    }

    /// Mean of a numeric column.
    pub fn mean(col: usize) -> Self {
        Estimator::new(format!("mean(col{col})"), move |ds| {
            numeric_column(ds, col).map(|v| v.iter().sum::<f64>() / v.len() as f64)
        })
    }

    /// Linear-interpolation `alpha`-quantile of a numeric column.
    pub fn quantile(col: usize, alpha: f64) -> Self {
        Estimator::new(format!("quantile(col{col}, {alpha})"), move |ds| {
            quantile_est(numeric_column(ds, col)?, alpha)
        })
    }

    /// OLS slope of `y_col` on `x_col`.
    pub fn slope(y_col: usize, x_col: usize) -> Self {
        Estimator::new(format!("slope(col{y_col} ~ col{x_col})"), move |ds| slope_est(ds, y_col, x_col))
    }
}

fn numeric_column(ds: &CompletedDataset, col: usize) -> Result<&[f64]> {
    if col >= ds.n_cols() || !ds.kind(col).is_numeric() {
        return Err(Error::Estimator(format!("column {col} is not a numeric column")));
    }
    Ok(ds.column(col))
}

/// Mean of the estimator over completions.
pub fn pooled(estimator: &Estimator, completions: &[CompletedDataset]) -> Result<f64> {
    if completions.is_empty() {
        return Err(Error::Estimator("no completions to pool".into()));
    }
    let total = completions.iter().map(|c| estimator.eval(c)).sum::<Result<f64>>()?;
    let mean = total / completions.len() as f64;
    if !mean.is_finite() {
        return Err(Error::Estimator(format!("{} is not finite", estimator.name())));
    }
    Ok(mean)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// Bootstrap replicates `L`.
    pub replicates: usize,
    /// The interval has level `1 - alpha`.
    pub alpha: f64,
    /// Completions per imputation of a stochastic imputer.
    pub m: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 30,
            alpha: 0.05,
            m: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub theta_hat: f64,
    pub replicates: Vec<f64>,
    pub sigma_star: f64,
    pub ci: (f64, f64),
}

/// Standard-normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Normal-approximation interval from fixed replicates:
/// `sigma* = sqrt(mean((theta_hat - theta*_l)^2))` and
/// `theta_hat -/+ z_{1 - alpha/2} sigma*`.
pub fn normal_interval(theta_hat: f64, replicates: &[f64], alpha: f64) -> Result<BootstrapResult> {
    if replicates.len() < 2 {
        return Err(Error::Config("at least 2 bootstrap replicates are needed".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} is not in (0, 1)")));
    }
    let l = replicates.len() as f64;
    let sigma_star = (replicates.iter().map(|t| (theta_hat - t).powi(2)).sum::<f64>() / l).sqrt();
    let half = normal_quantile(1.0 - alpha / 2.0) * sigma_star;
    Ok(BootstrapResult {
        theta_hat,
        replicates: replicates.to_vec(),
        sigma_star,
        ci: (theta_hat - half, theta_hat + half),
    })
}

/// Bootstrap interval for `estimator` under `imputer`.
///
/// Rows are resampled with replacement together with their mask, and each
/// resample is imputed afresh on its own seed stream.
pub fn bootstrap_ci(
    ds: &MaskedDataset,
    imputer: &dyn Imputer,
    estimator: &Estimator,
    cfg: &BootstrapConfig,
    seed: &SeedPath,
) -> Result<BootstrapResult> {
    if cfg.replicates < 2 {
        return Err(Error::Config("at least 2 bootstrap replicates are needed".into()));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::Config(format!("alpha {} is not in (0, 1)", cfg.alpha)));
    }
    let m = if imputer.is_stochastic() { cfg.m.max(1) } else { 1 };
    let theta_hat = pooled(estimator, &imputer.impute(ds, m, &seed.child(0))?)?;

    let n = ds.n_rows();
    let replicates: Vec<f64> = (0..cfg.replicates)
        .into_par_iter()
        .map(|l| {
            let path = seed.child(1).child(l as u64);
            let run = || -> Result<f64> {
                let mut rng = path.child(0).rng();
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let resampled = ds.select_rows(&rows)?;
                pooled(estimator, &imputer.impute(&resampled, m, &path.child(1))?)
            };
            run().map_err(|e| Error::Replicate {
                replicate: l + 1,
                source: Box::new(e),
            })
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    normal_interval(theta_hat, &replicates, cfg.alpha)
}

/// Produces the masked dataset of one simulation from its seed.
pub type Generator = dyn Fn(&SeedPath) -> Result<MaskedDataset> + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageConfig {
    /// Simulations `B`.
    pub simulations: usize,
    pub bootstrap: BootstrapConfig,
    /// Largest tolerated fraction of failed simulations per method.
    pub max_exclusion_rate: f64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            simulations: 200,
            bootstrap: BootstrapConfig::default(),
            max_exclusion_rate: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub method: String,
    /// 1-based simulation index.
    pub replication: usize,
    pub theta_hat: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub covered: bool,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSummary {
    pub method: String,
    pub coverage: f64,
    pub mean_width: f64,
    pub exclusions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    pub true_value: f64,
    /// Ordered by method (as given), then replication.
    pub rows: Vec<CoverageRow>,
    pub summary: Vec<CoverageSummary>,
    /// Messages of excluded simulations, `(method, replication, error)`.
    pub failures: Vec<(String, usize, String)>,
}

/// Runs `B` simulations: each draws a fresh dataset and builds a bootstrap
/// interval per imputer. Failed simulations are excluded and counted; more
/// than `max_exclusion_rate * B` exclusions for a method fail the run.
pub fn coverage_experiment(
    gen: &Generator,
    true_value: f64,
    imputers: &[&dyn Imputer],
    estimator: &Estimator,
    cfg: &CoverageConfig,
    seed: &SeedPath,
) -> Result<CoverageTable> {
    let b_count = cfg.simulations;
    if b_count < 10 {
        return Err(Error::Config(format!("B = {b_count} is below the minimum of 10")));
    }
    if imputers.is_empty() {
        return Err(Error::Config("no imputers to evaluate".into()));
    }
    let datasets: Vec<std::result::Result<MaskedDataset, String>> = (0..b_count)
        .into_par_iter()
        .map(|b| gen(&seed.child(b as u64).child(0)).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..imputers.len()).flat_map(|k| (0..b_count).map(move |b| (k, b))).collect();
    let results: Vec<std::result::Result<BootstrapResult, String>> = jobs
        .par_iter()
        .map(|&(k, b)| {
            let ds = datasets[b].as_ref().map_err(|e| format!("generator: {e}"))?;
            let path = seed.child(b as u64).child(1 + k as u64);
            bootstrap_ci(ds, imputers[k], estimator, &cfg.bootstrap, &path).map_err(|e| e.to_string())
        })
        .collect();

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for (k, imputer) in imputers.iter().enumerate() {
        let method = imputer.name().to_string();
        let mut covered = 0usize;
        let mut width = 0.0;
        let mut ok = 0usize;
        for b in 0..b_count {
            match &results[k * b_count + b] {
                Ok(r) => {
                    let row = CoverageRow {
                        method: method.clone(),
                        replication: b + 1,
                        theta_hat: r.theta_hat,
                        ci_lower: r.ci.0,
                        ci_upper: r.ci.1,
                        covered: r.ci.0 <= true_value && true_value <= r.ci.1,
                        width: r.ci.1 - r.ci.0,
                    };
                    ok += 1;
                    covered += usize::from(row.covered);
                    width += row.width;
                    rows.push(row);
                }
                Err(msg) => failures.push((method.clone(), b + 1, msg.clone())),
            }
        }
        let exclusions = b_count - ok;
        if exclusions as f64 > cfg.max_exclusion_rate * b_count as f64 {
            let first = failures.iter().find(|f| f.0 == method).map_or("", |f| f.2.as_str());
            return Err(Error::Method {
                method,
                source: Box::new(Error::Estimator(format!(
                    "{exclusions} of {b_count} simulations failed (first: {first})"
                ))),
            });
        }
        summary.push(CoverageSummary {
            method,
            coverage: covered as f64 / ok as f64,
            mean_width: width / ok as f64,
            exclusions,
        });
    }
    Ok(CoverageTable {
        true_value,
        rows,
        summary,
        failures,
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Ingestion(format!("writing coverage table: {e}"))
}

impl CoverageTable {
    pub fn write_rows_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "replication", "theta_hat", "ci_lower", "ci_upper", "covered", "width"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.method.clone(),
                r.replication.to_string(),
                format_real(r.theta_hat),
                format_real(r.ci_lower),
                format_real(r.ci_upper),
                u8::from(r.covered).to_string(),
                format_real(r.width),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("writing coverage table", e))
    }

    pub fn write_summary_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "coverage", "mean_width", "exclusions"]).map_err(csv_err)?;
        for s in &self.summary {
            w.write_record([
                s.method.clone(),
                format_real(s.coverage),
                format_real(s.mean_width),
                s.exclusions.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("writing coverage summary", e))
    }

    pub fn write_csv(&self, rows_path: &Path, summary_path: &Path) -> Result<()> {
        let create = |p: &Path| {
            std::fs::File::create(p)
                .map(std::io::BufWriter::new)
                .map_err(|e| Error::io(format!("creating {}", p.display()), e))
        };
        self.write_rows_to(create(rows_path)?)?;
        self.write_summary_to(create(summary_path)?)
    }

    pub fn summary_for(&self, method: &str) -> Option<&CoverageSummary> {
        self.summary.iter().find(|s| s.method == method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{IdentityImputer, Method, MethodConfig};
    use crate::rng::seed_tree;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn equal_replicates_give_zero_width() {
        let r = normal_interval(2.5, &[2.5; 10], 0.05).unwrap();
        assert_eq!(r.sigma_star, 0.0);
        assert_eq!(r.ci, (2.5, 2.5));
    }

    #[test]
    fn plus_minus_one_gives_unit_sigma() {
        let r = normal_interval(0.0, &[1.0, -1.0], 0.05).unwrap();
        assert_eq!(r.sigma_star, 1.0);
        assert!((r.ci.0 + 1.959964).abs() < 1e-6 && (r.ci.1 - 1.959964).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(normal_interval(0.0, &[1.0], 0.05).unwrap_err().is_config());
        assert!(normal_interval(0.0, &[1.0, 2.0], 1.0).unwrap_err().is_config());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 128, rng_seed: proptest::test_runner::RngSeed::Fixed(2), ..ProptestConfig::default() })]

        #[test]
        fn sigma_matches_formula_and_interval_is_symmetric(
            theta in -10.0f64..10.0,
            reps in prop::collection::vec(-10.0f64..10.0, 2..40),
            alpha in 0.01f64..0.5,
        ) {
            let r = normal_interval(theta, &reps, alpha).unwrap();
            let direct = (reps.iter().map(|t| (theta - t) * (theta - t)).sum::<f64>() / reps.len() as f64).sqrt();
            prop_assert!((r.sigma_star - direct).abs() <= 1e-12 * (1.0 + direct));
            prop_assert!(r.ci.0 <= theta && theta <= r.ci.1);
            prop_assert!(((theta - r.ci.0) - (r.ci.1 - theta)).abs() < 1e-9);
            // width is linear in the normal quantile
            let other = normal_interval(theta, &reps, alpha / 2.0).unwrap();
            let ratio = normal_quantile(1.0 - alpha / 4.0) / normal_quantile(1.0 - alpha / 2.0);
            prop_assert!(((other.ci.1 - other.ci.0) - ratio * (r.ci.1 - r.ci.0)).abs() < 1e-9 * (1.0 + r.ci.1 - r.ci.0));
        }
    }

    fn complete_normal(n: usize, seed: &SeedPath) -> MaskedDataset {
        let mut rng = seed.rng();
        let x: Vec<Option<f64>> = (0..n).map(|_| Some(StandardNormal.sample(&mut rng))).collect();
        MaskedDataset::numeric(&["x"], vec![x]).unwrap()
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = complete_normal(200, &SeedPath::new(1));
        let cfg = BootstrapConfig { replicates: 20, ..Default::default() };
        let a = bootstrap_ci(&ds, &IdentityImputer, &Estimator::mean(0), &cfg, &SeedPath::new(3)).unwrap();
        let b = bootstrap_ci(&ds, &IdentityImputer, &Estimator::mean(0), &cfg, &SeedPath::new(3)).unwrap();
        assert_eq!(a, b);
        // the bootstrap sd of a mean is close to s / sqrt(n)
        assert!((a.sigma_star - 1.0 / 200f64.sqrt()).abs() < 0.03);
    }

    #[test]
    fn resampling_carries_mask() {
        // estimator reporting the missing fraction of the resample it sees
        let mut rng = seed_tree(5, &[]);
        let x: Vec<Option<f64>> = (0..300).map(|i| Some(i as f64)).collect();
        let y: Vec<Option<f64>> = (0..300).map(|i| (rng.random::<f64>() > 0.3 || i == 0).then_some(i as f64)).collect();
        let ds = MaskedDataset::numeric(&["x", "y"], vec![x, y]).unwrap();
        let frac = Estimator::new("missing fraction", |c: &CompletedDataset| {
            Ok(c.imputed_mask().iter().filter(|r| r[1] == 1).count() as f64 / c.n_rows() as f64)
        });
        let knn = MethodConfig::new(Method::Knn);
        let r = bootstrap_ci(&ds, &knn, &frac, &BootstrapConfig { replicates: 10, ..Default::default() }, &SeedPath::new(0))
            .unwrap();
        let own = ds.missing_count(1) as f64 / 300.0;
        assert_eq!(r.theta_hat, own);
        // the resampled rows bring their own holes: fractions scatter around the source's
        for t in &r.replicates {
            assert!((t - own).abs() < 0.1);
        }
    }

    #[test]
    fn replicate_failure_carries_index() {
        let ds = complete_normal(50, &SeedPath::new(1));
        let failing = Estimator::new("fails", |_: &CompletedDataset| Err(Error::Estimator("boom".into())));
        let err = bootstrap_ci(&ds, &IdentityImputer, &failing, &BootstrapConfig::default(), &SeedPath::new(0));
        // theta_hat itself fails first
        assert!(matches!(err, Err(Error::Estimator(_))));

        let only_original = Estimator::new("nonfinite on resamples", |c: &CompletedDataset| {
            let mut v = c.column(0).to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            if v.len() == c.n_rows() {
                Ok(0.0)
            } else {
                Err(Error::Estimator("duplicate rows".into()))
            }
        });
        let err = bootstrap_ci(&ds, &IdentityImputer, &only_original, &BootstrapConfig::default(), &SeedPath::new(0))
            .unwrap_err();
        assert!(matches!(err, Error::Replicate { replicate: 1, .. }), "{err}");
    }

    #[test]
    fn smoke_run_shape_and_exclusions() {
        let gen = |s: &SeedPath| Ok(complete_normal(100, s));
        let cfg = CoverageConfig {
            simulations: 10,
            bootstrap: BootstrapConfig { replicates: 10, ..Default::default() },
            ..Default::default()
        };
        let imputers: [&dyn Imputer; 2] = [&IdentityImputer, &MethodConfig::new(Method::Knn)];
        let t = coverage_experiment(&gen, 0.0, &imputers, &Estimator::mean(0), &cfg, &SeedPath::new(1)).unwrap();
        assert_eq!(t.rows.len(), 20);
        assert_eq!(t.summary.len(), 2);
        assert!(t.summary.iter().all(|s| s.exclusions == 0));
        // knn is the identity on complete data
        assert_eq!(t.rows[0].theta_hat, t.rows[10].theta_hat);

        let mut buf = Vec::new();
        t.write_rows_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,replication,theta_hat,ci_lower,ci_upper,covered,width\nidentity,1,"));
        assert_eq!(text.lines().count(), 21);

        let flaky = |s: &SeedPath| {
            if s.path()[0] == 3 {
                Err(Error::Estimator("generator hiccup".into()))
            } else {
                Ok(complete_normal(100, s))
            }
        };
        let err = coverage_experiment(&flaky, 0.0, &imputers[..1], &Estimator::mean(0), &cfg, &SeedPath::new(1));
        assert!(err.is_err(), "1 of 10 is above the 5% exclusion limit");
        let cfg = CoverageConfig { max_exclusion_rate: 0.1, ..cfg };
        let t = coverage_experiment(&flaky, 0.0, &imputers[..1], &Estimator::mean(0), &cfg, &SeedPath::new(1)).unwrap();
        assert_eq!(t.summary[0].exclusions, 1);
        assert_eq!(t.rows.len(), 9);
        assert_eq!(t.failures[0].1, 4);
    }
}
