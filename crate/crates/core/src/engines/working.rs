use crate::data::{ColumnKind, CompletedDataset, MaskedDataset};
use crate::error::Result;
use crate::models::features::design_width;
use crate::models::{FeatureKind, FeatureMatrix, Target};

fn feature_kind(kind: &ColumnKind) -> FeatureKind {
    match kind {
        ColumnKind::Numeric => FeatureKind::Numeric,
        ColumnKind::Categorical(levels) => FeatureKind::Categorical { n_levels: levels.len() },
    }
}

/// Current values of every cell during an iterative imputation, starting
/// from mean/mode initialization.
#[derive(Debug, Clone)]
pub(crate) struct WorkingFrame {
    values: Vec<Vec<f64>>,
    kinds: Vec<FeatureKind>,
    observed_rows: Vec<Vec<usize>>,
    missing_rows: Vec<Vec<usize>>,
}

impl WorkingFrame {
    pub fn initialize(ds: &MaskedDataset) -> Result<Self> {
        let mut values = Vec::with_capacity(ds.n_cols());
        let mut observed_rows = Vec::with_capacity(ds.n_cols());
        let mut missing_rows = Vec::with_capacity(ds.n_cols());
        for j in 0..ds.n_cols() {
            let fill = ds.column_stats(j)?.center();
            let mask = ds.column_missing(j);
            values.push(
                ds.column_values(j)
                    .iter()
                    .zip(mask)
                    .map(|(&x, &m)| if m { fill } else { x })
                    .collect(),
            );
            observed_rows.push((0..ds.n_rows()).filter(|&i| !mask[i]).collect());
            missing_rows.push((0..ds.n_rows()).filter(|&i| mask[i]).collect());
        }
        Ok(WorkingFrame {
            values,
            kinds: ds.columns().iter().map(|c| feature_kind(&c.kind)).collect(),
            observed_rows,
            missing_rows,
        })
    }

    /// Coefficient count of a linear model of column `j` on all others.
    pub fn design_width_without(ds: &MaskedDataset, j: usize) -> usize {
        let kinds: Vec<FeatureKind> = (0..ds.n_cols())
            .filter(|&k| k != j)
            .map(|k| feature_kind(ds.kind(k)))
            .collect();
        design_width(&kinds)
    }

    pub fn missing_rows(&self, j: usize) -> &[usize] {
        &self.missing_rows[j]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    /// Predictors (all columns but `j`) at the given rows.
    pub fn predictors_at(&self, j: usize, rows: &[usize]) -> FeatureMatrix {
        let d = self.values.len();
        if d == 1 {
            return FeatureMatrix::intercept_only(rows.len());
        }
        let kinds: Vec<FeatureKind> = (0..d).filter(|&k| k != j).map(|k| self.kinds[k]).collect();
        let mut data = Vec::with_capacity(rows.len() * (d - 1));
        for &i in rows {
            for k in (0..d).filter(|&k| k != j) {
                data.push(self.values[k][i]);
            }
        }
        FeatureMatrix::from_flat(kinds, data).expect("working values are finite")
    }

    /// Predictors and target over the rows where `j` was originally observed.
    pub fn fitting_set(&self, j: usize) -> (FeatureMatrix, Target) {
        let rows = &self.observed_rows[j];
        let x = self.predictors_at(j, rows);
        let y = match self.kinds[j] {
            FeatureKind::Numeric => Target::Numeric(rows.iter().map(|&i| self.values[j][i]).collect()),
            FeatureKind::Categorical { n_levels } => Target::Categorical {
                levels: rows.iter().map(|&i| self.values[j][i] as usize).collect(),
                n_levels,
            },
        };
        (x, y)
    }

    /// Overwrites the originally-missing cells of column `j`, in row order.
    pub fn fill(&mut self, j: usize, filled: &[f64]) {
        debug_assert_eq!(filled.len(), self.missing_rows[j].len());
        for (&i, &v) in self.missing_rows[j].iter().zip(filled) {
            self.values[j][i] = v;
        }
    }

    pub fn imputed_means(&self) -> Vec<Option<f64>> {
        (0..self.values.len())
            .map(|j| {
                let rows = &self.missing_rows[j];
                (self.kinds[j] == FeatureKind::Numeric && !rows.is_empty())
                    .then(|| rows.iter().map(|&i| self.values[j][i]).sum::<f64>() / rows.len() as f64)
            })
            .collect()
    }

    pub fn finish(self, ds: &MaskedDataset) -> Result<CompletedDataset> {
        CompletedDataset::from_filled(ds, self.values)
    }
}
