use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Kind of a column. Categorical level lists are fixed at ingestion and
/// cells hold indices into them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical(Vec<String>),
}

impl ColumnKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, ColumnKind::Numeric)
    }

    pub fn n_levels(&self) -> usize {
        match self {
            ColumnKind::Numeric => 0,
            ColumnKind::Categorical(levels) => levels.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Categorical(levels.into_iter().map(Into::into).collect()),
        }
    }
}

/// One cell of a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Missing,
    Num(f64),
    Level(usize),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Numeric payload, with level indices widened to `f64`.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Missing => None,
            Cell::Num(x) => Some(x),
            Cell::Level(l) => Some(l as f64),
        }
    }
}

fn validate_specs(columns: &[ColumnSpec]) -> Result<()> {
    if columns.is_empty() {
        return Err(Error::Ingestion("dataset has no columns".into()));
    }
    for c in columns {
        if let ColumnKind::Categorical(levels) = &c.kind {
            if levels.is_empty() {
                return Err(Error::Ingestion(format!("categorical column `{}` has no levels", c.name)));
            }
            let mut seen = std::collections::HashSet::new();
            for l in levels {
                if !seen.insert(l) {
                    return Err(Error::Ingestion(format!(
                        "categorical column `{}` repeats level `{l}`",
                        c.name
                    )));
                }
            }
        }
    }
    Ok(())
}

fn check_payload(spec: &ColumnSpec, x: f64, row: usize) -> Result<()> {
    match &spec.kind {
        ColumnKind::Numeric if !x.is_finite() => Err(Error::Ingestion(format!(
            "non-finite value in column `{}` at row {row}",
            spec.name
        ))),
        ColumnKind::Categorical(levels) if x < 0.0 || x.fract() != 0.0 || x as usize >= levels.len() => {
            Err(Error::Ingestion(format!(
                "invalid level index {x} in column `{}` at row {row}",
                spec.name
            )))
        }
        _ => Ok(()),
    }
}

/// Rectangular data with a per-cell missingness mask.
///
/// Storage is column-major. Missing cells hold `0.0` as a placeholder in the
/// value buffers; the mask is authoritative. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedDataset {
    columns: Vec<ColumnSpec>,
    values: Vec<Vec<f64>>,
    missing: Vec<Vec<bool>>,
    n_rows: usize,
}

impl MaskedDataset {
    /// Builds a dataset from row-major cells.
    pub fn from_rows(columns: Vec<ColumnSpec>, rows: &[Vec<Cell>]) -> Result<Self> {
        let d = columns.len();
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(rows.len()); d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Shape(format!("row {i} has {} cells, expected {d}", row.len())));
            }
            for (j, cell) in row.iter().enumerate() {
                cols[j].push(cell.as_f64());
            }
        }
        Self::from_columns(columns, cols)
    }

    /// Builds a dataset from column-major optional payloads (`None` = missing).
    /// Categorical payloads are level indices.
    pub fn from_columns(columns: Vec<ColumnSpec>, data: Vec<Vec<Option<f64>>>) -> Result<Self> {
        validate_specs(&columns)?;
        if data.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} data columns for {} column specs",
                data.len(),
                columns.len()
            )));
        }
        let n_rows = data[0].len();
        if n_rows == 0 {
            return Err(Error::Ingestion("dataset has no rows".into()));
        }
        let mut values = Vec::with_capacity(columns.len());
        let mut missing = Vec::with_capacity(columns.len());
        for (spec, col) in columns.iter().zip(&data) {
            if col.len() != n_rows {
                return Err(Error::Shape(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    spec.name,
                    col.len()
                )));
            }
            let mut v = Vec::with_capacity(n_rows);
            let mut m = Vec::with_capacity(n_rows);
            for (i, cell) in col.iter().enumerate() {
                match cell {
                    Some(x) => {
                        check_payload(spec, *x, i)?;
                        v.push(*x);
                        m.push(false);
                    }
                    None => {
                        v.push(0.0);
                        m.push(true);
                    }
                }
            }
            values.push(v);
            missing.push(m);
        }
        let ds = MaskedDataset {
            columns,
            values,
            missing,
            n_rows,
        };
        ds.reject_empty_columns()?;
        Ok(ds)
    }

    /// All-numeric convenience constructor.
    pub fn numeric(names: &[&str], data: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let specs = names.iter().map(|n| ColumnSpec::numeric(*n)).collect();
        Self::from_columns(specs, data)
    }

    fn reject_empty_columns(&self) -> Result<()> {
        for (j, m) in self.missing.iter().enumerate() {
            if m.iter().all(|&b| b) {
                return Err(Error::Ingestion(format!(
                    "column `{}` is entirely missing",
                    self.columns[j].name
                )));
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn name(&self, j: usize) -> &str {
        &self.columns[j].name
    }

    pub fn kind(&self, j: usize) -> &ColumnKind {
        &self.columns[j].kind
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        if self.missing[j][i] {
            Cell::Missing
        } else if self.columns[j].kind.is_numeric() {
            Cell::Num(self.values[j][i])
        } else {
            Cell::Level(self.values[j][i] as usize)
        }
    }

    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.missing[j][i]
    }

    /// Raw column buffer; entries at missing cells are placeholders.
    pub fn column_values(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn column_missing(&self, j: usize) -> &[bool] {
        &self.missing[j]
    }

    pub fn missing_count(&self, j: usize) -> usize {
        self.missing[j].iter().filter(|&&b| b).count()
    }

    pub fn observed_count(&self, j: usize) -> usize {
        self.n_rows - self.missing_count(j)
    }

    pub fn total_missing(&self) -> usize {
        (0..self.n_cols()).map(|j| self.missing_count(j)).sum()
    }

    /// Observed payloads of column `j`, in row order.
    pub fn observed(&self, j: usize) -> Vec<f64> {
        self.values[j]
            .iter()
            .zip(&self.missing[j])
            .filter(|(_, &m)| !m)
            .map(|(&x, _)| x)
            .collect()
    }

    /// Row-major mask: 1 at missing cells, 0 elsewhere.
    pub fn mask_of(&self) -> Vec<Vec<u8>> {
        (0..self.n_rows)
            .map(|i| self.missing.iter().map(|col| col[i] as u8).collect())
            .collect()
    }

    pub fn mask_row(&self, i: usize) -> Vec<u8> {
        self.missing.iter().map(|col| col[i] as u8).collect()
    }

    /// Groups rows by identical mask rows, ordered lexicographically by pattern.
    pub fn patterns(&self) -> PatternTable {
        let mut groups: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
        for i in 0..self.n_rows {
            groups.entry(self.mask_row(i)).or_default().push(i);
        }
        PatternTable {
            groups: groups
                .into_iter()
                .map(|(pattern, rows)| PatternGroup { pattern, rows })
                .collect(),
        }
    }

    pub fn column_stats(&self, j: usize) -> Result<ColumnStats> {
        let obs = self.observed(j);
        column_stats_of(&self.columns[j].kind, &obs).ok_or_else(|| {
            Error::Ingestion(format!("column `{}` has no observed cells", self.columns[j].name))
        })
    }

    /// New dataset made of the given rows (repeats allowed), masks carried along.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|col| rows.iter().map(|&i| col[i]).collect())
            .collect();
        let missing = self
            .missing
            .iter()
            .map(|col| rows.iter().map(|&i| col[i]).collect())
            .collect();
        let ds = MaskedDataset {
            columns: self.columns.clone(),
            values,
            missing,
            n_rows: rows.len(),
        };
        if ds.n_rows == 0 {
            return Err(Error::Ingestion("row selection is empty".into()));
        }
        ds.reject_empty_columns()?;
        Ok(ds)
    }

    /// Copy with the listed `(row, column)` cells additionally masked.
    pub fn with_masked_cells(&self, cells: &[(usize, usize)]) -> Result<Self> {
        let mut out = self.clone();
        for &(i, j) in cells {
            out.missing[j][i] = true;
            out.values[j][i] = 0.0;
        }
        out.reject_empty_columns()?;
        Ok(out)
    }

    /// Copy with observed numeric payloads of column `j` transformed by `f`.
    pub fn map_numeric(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !self.columns[j].kind.is_numeric() {
            return Err(Error::Config(format!("column `{}` is not numeric", self.columns[j].name)));
        }
        let mut out = self.clone();
        for (x, &m) in out.values[j].iter_mut().zip(&self.missing[j]) {
            if !m {
                *x = f(*x);
            }
        }
        Ok(out)
    }
}

/// Rows grouped by missingness pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    pub groups: Vec<PatternGroup>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGroup {
    pub pattern: Vec<u8>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnStats {
    /// `sd` is `None` with a single observation.
    Numeric { mean: f64, sd: Option<f64>, n_obs: usize },
    Categorical { mode: usize, n_obs: usize },
}

impl ColumnStats {
    /// Mean for numeric columns, modal level index for categorical ones.
    pub fn center(&self) -> f64 {
        match *self {
            ColumnStats::Numeric { mean, .. } => mean,
            ColumnStats::Categorical { mode, .. } => mode as f64,
        }
    }

    pub fn n_obs(&self) -> usize {
        match *self {
            ColumnStats::Numeric { n_obs, .. } | ColumnStats::Categorical { n_obs, .. } => n_obs,
        }
    }
}

pub(crate) fn column_stats_of(kind: &ColumnKind, obs: &[f64]) -> Option<ColumnStats> {
    if obs.is_empty() {
        return None;
    }
    let n = obs.len();
    Some(match kind {
        ColumnKind::Numeric => {
            let mean = obs.iter().sum::<f64>() / n as f64;
            let sd = (n > 1).then(|| {
                (obs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            });
            ColumnStats::Numeric { mean, sd, n_obs: n }
        }
        ColumnKind::Categorical(levels) => ColumnStats::Categorical {
            mode: mode_of(obs.iter().map(|&x| x as usize), levels.len()),
            n_obs: n,
        },
    })
}

/// Most frequent level; ties go to the lowest level index.
pub(crate) fn mode_of(levels: impl IntoIterator<Item = usize>, n_levels: usize) -> usize {
    let mut counts = vec![0usize; n_levels.max(1)];
    for l in levels {
        counts[l] += 1;
    }
    let mut best = 0;
    for (l, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = l;
        }
    }
    best
}

/// A dataset with every cell filled, remembering which cells were imputed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedDataset {
    columns: Vec<ColumnSpec>,
    values: Vec<Vec<f64>>,
    imputed: Vec<Vec<bool>>,
}

impl CompletedDataset {
    /// Combines a source dataset with filled column buffers. Observed cells
    /// are taken from `source`, so they can never drift.
    pub fn from_filled(source: &MaskedDataset, mut filled: Vec<Vec<f64>>) -> Result<Self> {
        if filled.len() != source.n_cols() || filled.iter().any(|c| c.len() != source.n_rows()) {
            return Err(Error::Shape("filled buffers do not match the source dataset".into()));
        }
        for (j, col) in filled.iter_mut().enumerate() {
            let spec = &source.columns[j];
            for (i, x) in col.iter_mut().enumerate() {
                if source.missing[j][i] {
                    check_payload(spec, *x, i).map_err(|_| {
                        Error::Fit(format!("invalid imputed value {x} in column `{}` row {i}", spec.name))
                    })?;
                } else {
                    *x = source.values[j][i];
                }
            }
        }
        Ok(CompletedDataset {
            columns: source.columns.clone(),
            values: filled,
            imputed: source.missing.clone(),
        })
    }

    /// A complete source dataset viewed as completed (nothing imputed).
    pub fn from_complete(source: &MaskedDataset) -> Result<Self> {
        if source.total_missing() > 0 {
            return Err(Error::Config("dataset has missing cells".into()));
        }
        Self::from_filled(source, source.values.clone())
    }

    pub fn n_rows(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn kind(&self, j: usize) -> &ColumnKind {
        &self.columns[j].kind
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        if self.columns[j].kind.is_numeric() {
            Cell::Num(self.values[j][i])
        } else {
            Cell::Level(self.values[j][i] as usize)
        }
    }

    pub fn is_imputed(&self, i: usize, j: usize) -> bool {
        self.imputed[j][i]
    }

    /// Row-major copy of the source mask.
    pub fn imputed_mask(&self) -> Vec<Vec<u8>> {
        (0..self.n_rows())
            .map(|i| self.imputed.iter().map(|col| col[i] as u8).collect())
            .collect()
    }

    /// Values of column `j` at its imputed cells, in row order.
    pub fn imputed_values(&self, j: usize) -> Vec<f64> {
        self.values[j]
            .iter()
            .zip(&self.imputed[j])
            .filter(|(_, &m)| m)
            .map(|(&x, _)| x)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> MaskedDataset {
        MaskedDataset::numeric(
            &["x1", "x2", "x3"],
            vec![
                vec![Some(1.0), None, None],
                vec![Some(2.0), Some(3.0), None],
                vec![Some(4.0), Some(5.0), Some(6.0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn mask_matches_figure_two() {
        assert_eq!(fig2().mask_of(), vec![vec![0, 0, 0], vec![1, 0, 0], vec![1, 1, 0]]);
    }

    #[test]
    fn patterns_of_figure_two() {
        let table = fig2().patterns();
        let pats: Vec<_> = table.groups.iter().map(|g| (g.pattern.clone(), g.rows.clone())).collect();
        assert_eq!(
            pats,
            vec![
                (vec![0, 0, 0], vec![0]),
                (vec![1, 0, 0], vec![1]),
                (vec![1, 1, 0], vec![2])
            ]
        );
    }

    #[test]
    fn complete_dataset_has_one_zero_pattern() {
        let ds = MaskedDataset::numeric(&["a", "b"], vec![vec![Some(1.0), Some(2.0)], vec![Some(3.0), Some(4.0)]])
            .unwrap();
        assert!(ds.mask_of().iter().flatten().all(|&b| b == 0));
        let t = ds.patterns();
        assert_eq!(t.groups.len(), 1);
        assert_eq!(t.groups[0].pattern, vec![0, 0]);
        assert_eq!(t.groups[0].rows, vec![0, 1]);
    }

    #[test]
    fn shared_patterns_group_together() {
        // rows 0 and 2 share mask (0,1)
        let ds = MaskedDataset::numeric(
            &["a", "b"],
            vec![vec![Some(1.0), None, Some(3.0)], vec![None, Some(1.0), None]],
        )
        .unwrap();
        let t = ds.patterns();
        let g = t.groups.iter().find(|g| g.pattern == vec![0, 1]).unwrap();
        assert_eq!(g.rows, vec![0, 2]);
        assert_eq!(t.groups.iter().map(|g| g.rows.len()).sum::<usize>(), 3);
    }

    #[test]
    fn all_missing_row_is_row_of_ones() {
        let ds = MaskedDataset::numeric(&["a", "b"], vec![vec![Some(1.0), None], vec![Some(2.0), None]]).unwrap();
        assert_eq!(ds.mask_of()[1], vec![1, 1]);
    }

    #[test]
    fn stats_of_age_column() {
        let ds = MaskedDataset::numeric(&["age"], vec![vec![Some(33.0), Some(18.0), None]]).unwrap();
        match ds.column_stats(0).unwrap() {
            ColumnStats::Numeric { mean, n_obs, .. } => {
                assert_eq!(mean, 25.5);
                assert_eq!(n_obs, 2);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn stats_mode_and_singleton() {
        let ds = MaskedDataset::from_columns(
            vec![ColumnSpec::categorical("g", ["a", "c"]), ColumnSpec::numeric("x")],
            vec![
                vec![Some(1.0), Some(1.0), Some(0.0)],
                vec![Some(7.0), None, None],
            ],
        )
        .unwrap();
        assert_eq!(ds.column_stats(0).unwrap(), ColumnStats::Categorical { mode: 1, n_obs: 3 });
        assert_eq!(
            ds.column_stats(1).unwrap(),
            ColumnStats::Numeric { mean: 7.0, sd: None, n_obs: 1 }
        );
    }

    #[test]
    fn mode_ties_go_to_lowest_level() {
        assert_eq!(mode_of([1, 0, 2, 1, 0], 3), 0);
    }

    #[test]
    fn fully_missing_column_rejected() {
        let err = MaskedDataset::numeric(&["a", "b"], vec![vec![Some(1.0), Some(2.0)], vec![None, None]]).unwrap_err();
        assert!(matches!(err, Error::Ingestion(_)));
    }

    #[test]
    fn invalid_level_rejected() {
        let err = MaskedDataset::from_columns(vec![ColumnSpec::categorical("g", ["a"])], vec![vec![Some(1.0)]])
            .unwrap_err();
        assert!(matches!(err, Error::Ingestion(_)));
    }

    #[test]
    fn completed_dataset_keeps_observed_cells() {
        let ds = fig2();
        let filled = vec![vec![9.0; 3], vec![9.0; 3], vec![9.0; 3]];
        let c = CompletedDataset::from_filled(&ds, filled).unwrap();
        assert_eq!(c.column(0), &[1.0, 9.0, 9.0]);
        assert_eq!(c.column(2), &[4.0, 5.0, 6.0]);
        assert_eq!(c.imputed_mask(), ds.mask_of());
    }

    #[test]
    fn select_rows_carries_mask() {
        let ds = fig2();
        let r = ds.select_rows(&[2, 2, 0]).unwrap();
        assert_eq!(r.mask_of(), vec![vec![1, 1, 0], vec![1, 1, 0], vec![0, 0, 0]]);
        assert!(ds.select_rows(&[1, 2]).is_err());
    }
}
