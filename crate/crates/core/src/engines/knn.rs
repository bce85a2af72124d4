use crate::data::{ColumnKind, ColumnStats, CompletedDataset, MaskedDataset};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnImputation {
    pub completed: CompletedDataset,
    /// Cells filled with the column mean/mode because no row had both the
    /// target observed and a coordinate in common with the query row.
    pub fallbacks: Vec<(usize, usize)>,
}

/// Nearest-neighbour imputation over the originally observed cells.
///
/// Distances use the coordinates observed in both rows: numeric ones are
/// scaled by the column's observed sd, categorical ones count a mismatch as
/// one. The squared sum is rescaled by `d / shared` so that rows sharing
/// fewer coordinates are not artificially close. Numeric cells take the mean
/// of the `k` nearest donors, categorical cells their mode (ties resolved in
/// favour of the nearer donor). Ties in distance go to the lower row index.
#[allow(clippy::needless_range_loop)] // `i` is a row index into the dataset and `filled` alike
pub fn knn_impute(ds: &MaskedDataset, k: usize) -> Result<KnnImputation> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let n = ds.n_rows();
    let d = ds.n_cols();
    for i in 0..n {
        if (0..d).all(|j| ds.is_missing(i, j)) {
            return Err(Error::Config(format!("row {i} has no observed cell")));
        }
    }

    let stats: Vec<ColumnStats> = (0..d).map(|j| ds.column_stats(j)).collect::<Result<_>>()?;
    let scale: Vec<f64> = stats
        .iter()
        .map(|s| match *s {
            ColumnStats::Numeric { sd: Some(sd), .. } if sd > 0.0 => 1.0 / sd,
            _ => 1.0,
        })
        .collect();
    let numeric: Vec<bool> = (0..d).map(|j| ds.kind(j).is_numeric()).collect();

    let mut filled: Vec<Vec<f64>> = (0..d).map(|j| ds.column_values(j).to_vec()).collect();
    let mut fallbacks = Vec::new();
    let mut dist = vec![f64::INFINITY; n];
    let mut candidates: Vec<usize> = Vec::with_capacity(n);

    for i in 0..n {
        let targets: Vec<usize> = (0..d).filter(|&j| ds.is_missing(i, j)).collect();
        if targets.is_empty() {
            continue;
        }
        for (r, slot) in dist.iter_mut().enumerate() {
            *slot = if r == i { f64::INFINITY } else { distance(ds, &numeric, &scale, i, r) };
        }
        for &j in &targets {
            candidates.clear();
            candidates.extend((0..n).filter(|&r| !ds.is_missing(r, j) && dist[r].is_finite()));
            if candidates.is_empty() {
                filled[j][i] = stats[j].center();
                fallbacks.push((i, j));
                continue;
            }
            let take = k.min(candidates.len());
            let by_distance = |a: &usize, b: &usize| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b));
            if take < candidates.len() {
                candidates.select_nth_unstable_by(take - 1, by_distance);
                candidates.truncate(take);
            }
            candidates.sort_by(by_distance);
            let values = ds.column_values(j);
            filled[j][i] = match ds.kind(j) {
                ColumnKind::Numeric => candidates.iter().map(|&r| values[r]).sum::<f64>() / take as f64,
                ColumnKind::Categorical(levels) => {
                    let mut counts = vec![0usize; levels.len()];
                    for &r in candidates.iter() {
                        counts[values[r] as usize] += 1;
                    }
                    let top = *counts.iter().max().unwrap_or(&0);
                    // nearest donor among the tied levels
                    candidates
                        .iter()
                        .map(|&r| values[r] as usize)
                        .find(|&l| counts[l] == top)
                        .unwrap_or(0) as f64
                }
            };
        }
    }

    Ok(KnnImputation {
        completed: CompletedDataset::from_filled(ds, filled)?,
        fallbacks,
    })
}

fn distance(ds: &MaskedDataset, numeric: &[bool], scale: &[f64], a: usize, b: usize) -> f64 {
    let d = numeric.len();
    let mut sum = 0.0;
    let mut shared = 0usize;
    for j in 0..d {
        if ds.is_missing(a, j) || ds.is_missing(b, j) {
            continue;
        }
        shared += 1;
        let (x, y) = (ds.column_values(j)[a], ds.column_values(j)[b]);
        sum += if numeric[j] {
            ((x - y) * scale[j]).powi(2)
        } else if x != y {
            1.0
        } else {
            0.0
        };
    }
    if shared == 0 {
        f64::INFINITY
    } else {
        (sum * d as f64 / shared as f64).sqrt()
    }
}
