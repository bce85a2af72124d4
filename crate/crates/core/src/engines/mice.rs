//! Chained-equations (mice) imputation.
//!
//! Each chain initializes missing cells with observed means/modes, then
//! cycles over the incomplete columns: fit the configured conditional model
//! of the column on all other columns using the rows where the column was
//! originally observed, and refill its originally-missing cells by drawing
//! (or predicting) from that model. Predictors always carry their current
//! values, so a column visited later in a cycle sees the updates made
//! earlier in the same cycle.

use rayon::prelude::*;

use super::working::WorkingFrame;
use crate::data::{CompletedDataset, MaskedDataset};
use crate::error::{Error, Result};
use crate::models::{CartParams, Completion, ConditionalModel, ForestParams, ModelFamily};
use crate::rng::SeedPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MiceMethod {
    /// Bayesian linear-Gaussian draw.
    Norm,
    /// Linear-Gaussian draw with fixed coefficients.
    NormNob,
    /// Linear prediction (deterministic).
    NormPredict,
    Cart,
    Rf,
}

impl MiceMethod {
    pub fn is_stochastic(self) -> bool {
        !matches!(self, MiceMethod::NormPredict)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitOrder {
    /// Increasing count of missing cells, ties by column index.
    IncreasingMissing,
    /// Left to right.
    Natural,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiceConfig {
    pub method: MiceMethod,
    pub m: usize,
    pub max_iter: usize,
    pub visit_order: VisitOrder,
    pub cart: CartParams,
    pub forest: ForestParams,
    /// Floor on observed rows per incomplete column; the effective minimum
    /// is `max(min_fit_rows, q + 2)` with `q` the design width.
    pub min_fit_rows: usize,
    pub seed: u64,
}

impl Default for MiceConfig {
    fn default() -> Self {
        MiceConfig {
            method: MiceMethod::Cart,
            m: 5,
            max_iter: 10,
            visit_order: VisitOrder::IncreasingMissing,
            cart: CartParams::default(),
            forest: ForestParams::default(),
            min_fit_rows: 10,
            seed: 0,
        }
    }
}

impl MiceConfig {
    pub fn new(method: MiceMethod) -> Self {
        MiceConfig {
            method,
            ..Default::default()
        }
    }

    fn family(&self) -> ModelFamily {
        match self.method {
            MiceMethod::Norm => ModelFamily::Linear { bayes: true },
            MiceMethod::NormNob | MiceMethod::NormPredict => ModelFamily::Linear { bayes: false },
            MiceMethod::Cart => ModelFamily::Cart(self.cart),
            MiceMethod::Rf => ModelFamily::Forest(self.forest),
        }
    }

    fn completion(&self) -> Completion {
        if self.method.is_stochastic() {
            Completion::Draw
        } else {
            Completion::Predict
        }
    }
}

/// Mean of the imputed cells of each column after each cycle of one chain.
/// Entries are `None` for complete or categorical columns.
pub type ChainTrace = Vec<Vec<Option<f64>>>;

#[derive(Debug, Clone, PartialEq)]
pub struct MultipleImputation {
    pub completions: Vec<CompletedDataset>,
    /// Row-major source mask.
    pub source_mask: Vec<Vec<u8>>,
    /// `chain_means[chain][cycle][column]`.
    pub chain_means: Vec<ChainTrace>,
}

/// Columns with missing cells, in visiting order.
pub fn visit_sequence(ds: &MaskedDataset, order: VisitOrder) -> Vec<usize> {
    let mut cols: Vec<usize> = (0..ds.n_cols()).filter(|&j| ds.missing_count(j) > 0).collect();
    if order == VisitOrder::IncreasingMissing {
        cols.sort_by_key(|&j| (ds.missing_count(j), j));
    }
    cols
}

pub(crate) fn check_fit_sets(ds: &MaskedDataset, cols: &[usize], floor: usize) -> Result<()> {
    for &j in cols {
        let q = WorkingFrame::design_width_without(ds, j);
        let need = floor.max(q + 2);
        let have = ds.observed_count(j);
        if have < need {
            return Err(Error::Config(format!(
                "column `{}` has {have} observed rows; at least {need} are needed to fit its model",
                ds.name(j)
            )));
        }
    }
    Ok(())
}

pub fn mice_impute(ds: &MaskedDataset, cfg: &MiceConfig) -> Result<MultipleImputation> {
    if cfg.m == 0 || cfg.max_iter == 0 {
        return Err(Error::Config("m and max_iter must be at least 1".into()));
    }
    let order = visit_sequence(ds, cfg.visit_order);
    check_fit_sets(ds, &order, cfg.min_fit_rows)?;

    let root = SeedPath::new(cfg.seed);
    let chains: Vec<(CompletedDataset, ChainTrace)> = (0..cfg.m)
        .into_par_iter()
        .map(|c| run_chain(ds, cfg, &order, &root.child(c as u64)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let (completions, chain_means) = chains.into_iter().unzip();
    Ok(MultipleImputation {
        completions,
        source_mask: ds.mask_of(),
        chain_means,
    })
}

fn run_chain(
    ds: &MaskedDataset,
    cfg: &MiceConfig,
    order: &[usize],
    seed: &SeedPath,
) -> Result<(CompletedDataset, ChainTrace)> {
    let mut frame = WorkingFrame::initialize(ds)?;
    let mut trace = Vec::with_capacity(cfg.max_iter);
    if order.is_empty() {
        return Ok((frame.finish(ds)?, trace));
    }
    let mut rng = seed.rng();
    let family = cfg.family();
    let how = cfg.completion();

    for cycle in 0..cfg.max_iter {
        for &j in order {
            let mut step = || -> Result<()> {
                let (x_fit, y_fit) = frame.fitting_set(j);
                let model = ConditionalModel::fit(family, &x_fit, &y_fit, &mut rng)?;
                let x_new = frame.predictors_at(j, frame.missing_rows(j));
                let filled = model.complete(&x_new, how, &mut rng)?;
                frame.fill(j, &filled);
                Ok(())
            };
            step().map_err(|e| Error::Column {
                column: ds.name(j).to_string(),
                cycle: cycle + 1,
                source: Box::new(e),
            })?;
        }
        trace.push(frame.imputed_means());
    }
    Ok((frame.finish(ds)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{read_csv_from, Cell, ColumnKind, ReadOptions};
    use crate::rng::seed_tree;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    const TINY: &str = "Age,Income,Gender\n33,NA,F\n18,12000,NA\nNA,13542,M\n";

    fn tiny() -> MaskedDataset {
        read_csv_from(TINY.as_bytes(), &ReadOptions::default()).unwrap()
    }

    fn mixed(n: usize, seed: u64) -> MaskedDataset {
        let mut rng = seed_tree(seed, &[]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut g = Vec::new();
        for _ in 0..n {
            let x: f64 = StandardNormal.sample(&mut rng);
            let e: f64 = StandardNormal.sample(&mut rng);
            let level = if x + 0.5 * e > 0.0 { 1.0 } else { 0.0 };
            a.push((rng.random::<f64>() > 0.2).then_some(x));
            b.push((rng.random::<f64>() > 0.15).then_some(2.0 * x + e));
            g.push((rng.random::<f64>() > 0.1).then_some(level));
        }
        // keep at least one fully observed row
        a[0] = a[0].or(Some(0.0));
        b[0] = b[0].or(Some(0.0));
        g[0] = g[0].or(Some(0.0));
        MaskedDataset::from_columns(
            vec![
                crate::data::ColumnSpec::numeric("a"),
                crate::data::ColumnSpec::numeric("b"),
                crate::data::ColumnSpec::categorical("g", ["no", "yes"]),
            ],
            vec![a, b, g],
        )
        .unwrap()
    }

    #[test]
    fn figure_one_initialization() {
        let ds = tiny();
        let frame = WorkingFrame::initialize(&ds).unwrap();
        let done = frame.finish(&ds).unwrap();
        assert_eq!(done.cell(2, 0), Cell::Num(25.5));
        assert_eq!(done.cell(0, 1), Cell::Num(12771.0));
        assert_eq!(done.cell(1, 2), Cell::Level(0));
        assert_eq!(visit_sequence(&ds, VisitOrder::IncreasingMissing), vec![0, 1, 2]);
    }

    #[test]
    fn figure_one_table_is_too_small_for_linear_fit() {
        let cfg = MiceConfig {
            m: 1,
            max_iter: 1,
            ..MiceConfig::new(MiceMethod::NormNob)
        };
        let err = mice_impute(&tiny(), &cfg).unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("Age"), "{err}");
    }

    #[test]
    fn figure_one_table_rejected_even_with_relaxed_floor() {
        let cfg = MiceConfig {
            m: 1,
            max_iter: 1,
            min_fit_rows: 1,
            cart: CartParams { min_leaf: 1, ..Default::default() },
            ..MiceConfig::new(MiceMethod::Cart)
        };
        // the q + 2 floor still applies: Age ~ Income + Gender needs 5 rows
        assert!(mice_impute(&tiny(), &cfg).is_err());
    }

    #[test]
    fn complete_dataset_is_returned_unchanged() {
        let ds = MaskedDataset::numeric(&["a", "b"], vec![vec![Some(1.0), Some(2.0)], vec![Some(3.0), Some(4.0)]])
            .unwrap();
        for method in [MiceMethod::Norm, MiceMethod::NormNob, MiceMethod::NormPredict, MiceMethod::Cart, MiceMethod::Rf]
        {
            let out = mice_impute(&ds, &MiceConfig { m: 2, ..MiceConfig::new(method) }).unwrap();
            assert_eq!(out.completions.len(), 2);
            for c in &out.completions {
                assert_eq!(c.column(0), &[1.0, 2.0]);
                assert_eq!(c.column(1), &[3.0, 4.0]);
            }
            assert!(out.chain_means.iter().all(Vec::is_empty));
        }
    }

    #[test]
    fn observed_cells_and_levels_preserved() {
        let ds = mixed(150, 1);
        for method in [MiceMethod::Norm, MiceMethod::NormNob, MiceMethod::NormPredict, MiceMethod::Cart, MiceMethod::Rf]
        {
            let out = mice_impute(&ds, &MiceConfig { m: 2, max_iter: 3, ..MiceConfig::new(method) }).unwrap();
            for c in &out.completions {
                for j in 0..ds.n_cols() {
                    for i in 0..ds.n_rows() {
                        match ds.cell(i, j) {
                            Cell::Missing => {
                                let v = c.cell(i, j);
                                if let ColumnKind::Categorical(levels) = ds.kind(j) {
                                    assert!(matches!(v, Cell::Level(l) if l < levels.len()));
                                } else {
                                    assert!(v.as_f64().unwrap().is_finite());
                                }
                            }
                            observed => assert_eq!(c.cell(i, j), observed),
                        }
                    }
                }
                assert_eq!(c.imputed_mask(), ds.mask_of());
            }
            assert_eq!(out.chain_means.len(), 2);
            assert_eq!(out.chain_means[0].len(), 3);
        }
    }

    #[test]
    fn norm_predict_completions_identical() {
        let ds = mixed(120, 2);
        let out = mice_impute(&ds, &MiceConfig { m: 3, max_iter: 4, ..MiceConfig::new(MiceMethod::NormPredict) })
            .unwrap();
        assert_eq!(out.completions[0], out.completions[1]);
        assert_eq!(out.completions[1], out.completions[2]);
        let other = mice_impute(
            &ds,
            &MiceConfig { m: 3, max_iter: 4, seed: 99, ..MiceConfig::new(MiceMethod::NormPredict) },
        )
        .unwrap();
        assert_eq!(other.completions[0], out.completions[0]);
    }

    #[test]
    fn cart_completions_differ() {
        for seed in 0..5 {
            let ds = mixed(200, 10 + seed);
            let out =
                mice_impute(&ds, &MiceConfig { m: 3, max_iter: 3, seed, ..MiceConfig::new(MiceMethod::Cart) }).unwrap();
            assert!(out.completions[0] != out.completions[1] || out.completions[1] != out.completions[2]);
        }
    }

    #[test]
    fn stochastic_methods_vary_with_seed() {
        let ds = mixed(120, 3);
        for method in [MiceMethod::Norm, MiceMethod::NormNob, MiceMethod::Cart, MiceMethod::Rf] {
            let runs: Vec<_> = (0..5)
                .map(|seed| {
                    mice_impute(&ds, &MiceConfig { m: 1, max_iter: 2, seed, ..MiceConfig::new(method) })
                        .unwrap()
                        .completions
                        .remove(0)
                })
                .collect();
            for a in 0..5 {
                for b in a + 1..5 {
                    assert_ne!(runs[a], runs[b], "{method:?} seeds {a} {b}");
                }
            }
        }
    }

    #[test]
    fn rerun_is_reproducible() {
        let ds = mixed(100, 4);
        let cfg = MiceConfig { m: 3, max_iter: 2, seed: 7, ..MiceConfig::new(MiceMethod::Rf) };
        assert_eq!(mice_impute(&ds, &cfg).unwrap(), mice_impute(&ds, &cfg).unwrap());
    }

    #[test]
    fn donor_chain_means_within_observed_range() {
        let ds = mixed(200, 5);
        for method in [MiceMethod::Cart, MiceMethod::Rf] {
            let out = mice_impute(&ds, &MiceConfig { m: 2, max_iter: 4, ..MiceConfig::new(method) }).unwrap();
            for j in 0..2 {
                let obs = ds.observed(j);
                let lo = obs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = obs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for chain in &out.chain_means {
                    for cycle in chain {
                        let m = cycle[j].unwrap();
                        assert!(m >= lo && m <= hi);
                    }
                }
                // categorical columns are not traced
                assert!(out.chain_means[0][0][2].is_none());
            }
        }
    }

    #[test]
    fn thin_column_is_rejected_with_its_name() {
        let mut x = vec![Some(1.0); 30];
        let mut y: Vec<Option<f64>> = (0..30).map(|i| Some(i as f64)).collect();
        for v in x.iter_mut().skip(5) {
            *v = None;
        }
        y[0] = None;
        let ds = MaskedDataset::numeric(&["thin", "full"], vec![x, y]).unwrap();
        let err = mice_impute(&ds, &MiceConfig::new(MiceMethod::Cart)).unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("thin"));
    }
}
