use super::mice::{check_fit_sets, visit_sequence, VisitOrder};
use super::working::WorkingFrame;
use crate::data::{CompletedDataset, MaskedDataset};
use crate::error::{Error, Result};
use crate::models::{fit_forest, ForestParams};
use crate::rng::SeedPath;

#[derive(Debug, Clone, PartialEq)]
pub struct MissForestConfig {
    pub forest: ForestParams,
    pub max_iter: usize,
    pub min_fit_rows: usize,
    pub seed: u64,
}

impl Default for MissForestConfig {
    fn default() -> Self {
        MissForestConfig {
            forest: ForestParams::default(),
            max_iter: 10,
            min_fit_rows: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissForestResult {
    pub completed: CompletedDataset,
    /// Iterations whose fills were computed, including a rejected last one.
    pub iterations: usize,
    /// `(numeric, categorical)` change per iteration; `None` when the
    /// dataset has no incomplete column of that type.
    pub changes: Vec<(Option<f64>, Option<f64>)>,
}

/// Iterative forest imputation with deterministic (aggregated) fills.
///
/// Each iteration refits a forest per incomplete column, in increasing
/// missingness order, and overwrites the column's missing cells with the
/// forest prediction. The change between iterations is
/// `sum((new - old)^2) / sum(new^2)` over numeric imputed cells and the
/// fraction of changed categorical imputed cells. Iteration stops once no
/// change measure decreased, returning the iterate before that one; it also
/// stops on a zero change or after `max_iter` iterations.
pub fn missforest_impute(ds: &MaskedDataset, cfg: &MissForestConfig) -> Result<MissForestResult> {
    if cfg.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    let order = visit_sequence(ds, VisitOrder::IncreasingMissing);
    check_fit_sets(ds, &order, cfg.min_fit_rows)?;

    let mut frame = WorkingFrame::initialize(ds)?;
    let mut changes = Vec::new();
    if order.is_empty() {
        return Ok(MissForestResult {
            completed: frame.finish(ds)?,
            iterations: 0,
            changes,
        });
    }
    let root = SeedPath::new(cfg.seed);
    let mut previous: Option<(Option<f64>, Option<f64>)> = None;

    for iter in 0..cfg.max_iter {
        let before = frame.clone();
        let mut rng = root.child(iter as u64).rng();
        for &j in &order {
            let mut step = || -> Result<Vec<f64>> {
                let (x_fit, y_fit) = frame.fitting_set(j);
                let forest = fit_forest(&x_fit, &y_fit, &cfg.forest, &mut rng)?;
                let x_new = frame.predictors_at(j, frame.missing_rows(j));
                Ok((0..x_new.n_rows()).map(|i| forest.predict(x_new.row(i))).collect())
            };
            let filled = step().map_err(|e| Error::Column {
                column: ds.name(j).to_string(),
                cycle: iter + 1,
                source: Box::new(e),
            })?;
            frame.fill(j, &filled);
        }

        let change = change_between(&before, &frame, ds, &order);
        changes.push(change);
        if let Some(prev) = previous {
            if !decreased(prev.0, change.0) && !decreased(prev.1, change.1) {
                return Ok(MissForestResult {
                    completed: before.finish(ds)?,
                    iterations: iter + 1,
                    changes,
                });
            }
        }
        let settled = [change.0, change.1].iter().flatten().all(|&c| c == 0.0);
        if settled {
            break;
        }
        previous = Some(change);
    }
    Ok(MissForestResult {
        completed: frame.finish(ds)?,
        iterations: changes.len(),
        changes,
    })
}

fn decreased(prev: Option<f64>, now: Option<f64>) -> bool {
    matches!((prev, now), (Some(p), Some(n)) if n < p)
}

fn change_between(
    old: &WorkingFrame,
    new: &WorkingFrame,
    ds: &MaskedDataset,
    cols: &[usize],
) -> (Option<f64>, Option<f64>) {
    let (mut num, mut den) = (0.0, 0.0);
    let (mut changed, mut total) = (0usize, 0usize);
    let mut has_numeric = false;
    for &j in cols {
        let numeric = ds.kind(j).is_numeric();
        has_numeric |= numeric;
        for &i in new.missing_rows(j) {
            let (a, b) = (old.column(j)[i], new.column(j)[i]);
            if numeric {
                num += (b - a) * (b - a);
                den += b * b;
            } else {
                total += 1;
                changed += usize::from(a != b);
            }
        }
    }
    let numeric = has_numeric.then(|| if num == 0.0 { 0.0 } else { num / den.max(f64::MIN_POSITIVE) });
    let categorical = (total > 0).then(|| changed as f64 / total as f64);
    (numeric, categorical)
}
