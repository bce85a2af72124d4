//! Ranking imputation methods with the energy-I-Score: hide extra observed
//! cells, impute them several times, and score the imputation samples
//! against the hidden truths with the energy score (lower is better).

use std::io::Write;
use std::path::Path;

use rand::RngCore;
use rayon::prelude::*;

use crate::data::{format_real, ColumnStats, CompletedDataset, MaskedDataset};
use crate::engines::Imputer;
use crate::error::{Error, Result};
use crate::rng::{seed_tree, SeedPath};

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Energy score of a sample of `N` vectors against one truth:
/// `mean_i |x_i - y| - 1/(2 N^2) sum_ij |x_i - x_j|`.
pub fn energy_score(sample: &[Vec<f64>], truth: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n == 0 || truth.is_empty() {
        return Err(Error::Shape("energy score needs a non-empty sample and truth".into()));
    }
    if let Some(bad) = sample.iter().position(|x| x.len() != truth.len()) {
        return Err(Error::Shape(format!(
            "sample vector {bad} has dimension {}, truth has {}",
            sample[bad].len(),
            truth.len()
        )));
    }
    if sample.iter().flatten().chain(truth).any(|x| !x.is_finite()) {
        return Err(Error::Shape("energy score input is not finite".into()));
    }
    let to_truth = sample.iter().map(|x| euclidean(x, truth)).sum::<f64>() / n as f64;
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pairs += euclidean(&sample[i], &sample[j]);
        }
    }
    // each unordered pair appears twice in the double sum
    Ok(to_truth - pairs / (n * n) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IScoreConfig {
    /// Independent single imputations per method.
    pub n_imputations: usize,
    pub mask_fraction: f64,
    /// Observed-cell floor for every numeric column with missing cells.
    pub min_observed: usize,
}

impl Default for IScoreConfig {
    fn default() -> Self {
        IScoreConfig {
            n_imputations: 20,
            mask_fraction: 0.2,
            min_observed: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnScore {
    pub column: String,
    pub score: f64,
    pub n_test_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodScore {
    pub method: String,
    /// Column scores weighted by their test-cell counts.
    pub overall: f64,
    pub columns: Vec<ColumnScore>,
    pub n_imputations: usize,
    pub n_test_cells: usize,
}

/// The cells hidden from the imputer, and the standardized dataset they
/// were hidden in.
#[derive(Debug, Clone, PartialEq)]
pub struct TestMask {
    pub standardized: MaskedDataset,
    pub augmented: MaskedDataset,
    /// `(row, column)` pairs, sorted.
    pub cells: Vec<(usize, usize)>,
}

/// Standardizes numeric columns with observed statistics and hides
/// `ceil(mask_fraction * n_obs)` observed cells of every numeric column that
/// has missing cells.
///
/// Cells are chosen by a pseudo-random priority keyed on the seed, the
/// column name and the row's observed content, which is uniform over rows
/// but does not depend on row or column order. Rows are never left without
/// an observed cell.
pub fn select_test_cells(ds: &MaskedDataset, cfg: &IScoreConfig, seed: u64) -> Result<TestMask> {
    if !(cfg.mask_fraction > 0.0 && cfg.mask_fraction < 1.0) {
        return Err(Error::Config(format!("mask_fraction {} is not in (0, 1)", cfg.mask_fraction)));
    }
    if ds.total_missing() == 0 {
        return Err(Error::Config("dataset has no missing cells to mimic".into()));
    }
    let mut standardized = ds.clone();
    for j in 0..ds.n_cols() {
        if let ColumnStats::Numeric { mean, sd, .. } = ds.column_stats(j)? {
            let sd = sd.filter(|&s| s > 0.0).unwrap_or(1.0);
            standardized = standardized.map_numeric(j, |x| (x - mean) / sd)?;
        }
    }

    let targets: Vec<usize> = (0..ds.n_cols())
        .filter(|&j| ds.kind(j).is_numeric() && ds.missing_count(j) > 0)
        .collect();
    if targets.is_empty() {
        return Err(Error::Config("no numeric column has missing cells".into()));
    }
    let row_keys: Vec<u64> = (0..ds.n_rows()).map(|i| row_fingerprint(ds, i)).collect();
    let mut observed_left: Vec<usize> = (0..ds.n_rows())
        .map(|i| (0..ds.n_cols()).filter(|&j| !ds.is_missing(i, j)).count())
        .collect();

    let mut cells = Vec::new();
    for &j in &targets {
        let n_obs = ds.observed_count(j);
        if n_obs < cfg.min_observed {
            return Err(Error::Config(format!(
                "column `{}` has {n_obs} observed cells; at least {} are needed",
                ds.name(j),
                cfg.min_observed
            )));
        }
        let want = (cfg.mask_fraction * n_obs as f64).ceil() as usize;
        let col_key = fnv1a(ds.name(j).as_bytes());
        let mut eligible: Vec<(u64, usize)> = (0..ds.n_rows())
            .filter(|&i| !ds.is_missing(i, j) && observed_left[i] >= 2)
            .map(|i| (seed_tree(seed, &[col_key, row_keys[i]]).next_u64(), i))
            .collect();
        if eligible.len() < want {
            return Err(Error::Config(format!(
                "column `{}`: only {} cells can be hidden, {want} requested",
                ds.name(j),
                eligible.len()
            )));
        }
        eligible.sort_unstable();
        for &(_, i) in &eligible[..want] {
            observed_left[i] -= 1;
            cells.push((i, j));
        }
    }
    cells.sort_unstable();
    let augmented = standardized.with_masked_cells(&cells)?;
    Ok(TestMask {
        standardized,
        augmented,
        cells,
    })
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Hash of a row's observed cells keyed by column name, independent of
/// column order.
fn row_fingerprint(ds: &MaskedDataset, i: usize) -> u64 {
    (0..ds.n_cols())
        .filter(|&j| !ds.is_missing(i, j))
        .map(|j| {
            let mut bytes = ds.name(j).as_bytes().to_vec();
            bytes.extend_from_slice(&ds.column_values(j)[i].to_bits().to_le_bytes());
            fnv1a(&bytes)
        })
        .fold(0u64, u64::wrapping_add)
}

/// Energy-I-Score of one imputer on `ds`.
pub fn iscore(ds: &MaskedDataset, imputer: &dyn Imputer, cfg: &IScoreConfig, seed: &SeedPath) -> Result<MethodScore> {
    if cfg.n_imputations < 5 {
        return Err(Error::Config(format!("N = {} is below the minimum of 5", cfg.n_imputations)));
    }
    let mask = select_test_cells(ds, cfg, seed.child(0).derive_seed())?;
    let runs: Vec<CompletedDataset> = (0..cfg.n_imputations)
        .into_par_iter()
        .map(|r| {
            let mut out = imputer.impute(&mask.augmented, 1, &seed.child(1).child(r as u64))?;
            out.pop().ok_or_else(|| Error::Fit("imputer returned no completion".into()))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()
        .map_err(|e| e.in_method(imputer.name()))?;
    score_runs(imputer.name(), &mask, &runs)
}

/// Scores completions of `mask.augmented` against the hidden cells.
pub fn score_runs(method: &str, mask: &TestMask, runs: &[CompletedDataset]) -> Result<MethodScore> {
    let d = mask.standardized.n_cols();
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    // cells are sorted by row, so each row's test cells are contiguous
    for group in mask.cells.chunk_by(|a, b| a.0 == b.0) {
        let i = group[0].0;
        let truth: Vec<f64> = group.iter().map(|&(_, j)| mask.standardized.column_values(j)[i]).collect();
        let sample: Vec<Vec<f64>> = runs
            .iter()
            .map(|run| group.iter().map(|&(_, j)| run.column(j)[i]).collect())
            .collect();
        let s = energy_score(&sample, &truth)?;
        for &(_, j) in group {
            sums[j] += s;
            counts[j] += 1;
        }
    }
    let columns: Vec<ColumnScore> = (0..d)
        .filter(|&j| counts[j] > 0)
        .map(|j| ColumnScore {
            column: mask.standardized.name(j).to_string(),
            score: sums[j] / counts[j] as f64,
            n_test_cells: counts[j],
        })
        .collect();
    let n_test_cells: usize = counts.iter().sum();
    let overall = columns.iter().map(|c| c.score * c.n_test_cells as f64).sum::<f64>() / n_test_cells as f64;
    Ok(MethodScore {
        method: method.to_string(),
        overall,
        columns,
        n_imputations: runs.len(),
        n_test_cells,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Method names, best (lowest score) first.
    pub order: Vec<String>,
    /// Groups of methods with exactly equal scores, each in alphabetical order.
    pub ties: Vec<Vec<String>>,
}

impl Ranking {
    pub fn has_ties(&self) -> bool {
        !self.ties.is_empty()
    }
}

pub fn rank_methods(entries: &[MethodScore]) -> Result<Ranking> {
    if entries.is_empty() {
        return Err(Error::Config("nothing to rank".into()));
    }
    let mut sorted: Vec<&MethodScore> = entries.iter().collect();
    sorted.sort_by(|a, b| a.overall.total_cmp(&b.overall).then_with(|| a.method.cmp(&b.method)));
    let ties = sorted
        .chunk_by(|a, b| a.overall == b.overall)
        .filter(|g| g.len() > 1)
        .map(|g| g.iter().map(|e| e.method.clone()).collect())
        .collect();
    Ok(Ranking {
        order: sorted.into_iter().map(|e| e.method.clone()).collect(),
        ties,
    })
}

/// Scores of several methods plus their ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub entries: Vec<MethodScore>,
    pub ranking: Ranking,
}

impl ScoreReport {
    pub fn new(entries: Vec<MethodScore>) -> Result<Self> {
        let ranking = rank_methods(&entries)?;
        Ok(ScoreReport { entries, ranking })
    }

    fn entry(&self, method: &str) -> Option<&MethodScore> {
        self.entries.iter().find(|e| e.method == method)
    }

    /// One row per (method, column), methods in ranking order.
    pub fn write_csv_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Ingestion(format!("writing score report: {e}"));
        w.write_record(["method", "overall_score", "column", "column_score", "n_test_cells"])
            .map_err(io)?;
        for name in &self.ranking.order {
            let e = self.entry(name).expect("ranked methods come from the entries");
            for c in &e.columns {
                w.write_record([
                    e.method.as_str(),
                    &format_real(e.overall),
                    &c.column,
                    &format_real(c.score),
                    &c.n_test_cells.to_string(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::io("writing score report", e))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }

    /// Plain-text ranking table, best method first.
    pub fn ranking_table(&self) -> String {
        let mut s = format!("{:<4} {:<20} {:>12} {:>8}\n", "rank", "method", "score", "cells");
        for (r, name) in self.ranking.order.iter().enumerate() {
            let e = self.entry(name).expect("ranked methods come from the entries");
            let tied = self.ranking.ties.iter().any(|g| g.contains(name));
            s.push_str(&format!(
                "{:<4} {:<20} {:>12.7} {:>8}{}\n",
                r + 1,
                name,
                e.overall,
                e.n_test_cells,
                if tied { "  (tie)" } else { "" }
            ));
        }
        s
    }
}
