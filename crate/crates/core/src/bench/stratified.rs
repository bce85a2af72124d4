//! Chi-square checks of missingness mechanisms on simulated data.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Row indices split into `strata` equal-count groups by `key`.
fn strata_of(key: &[f64], strata: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..key.len()).collect();
    order.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let n = key.len();
    (0..strata).map(|s| order[s * n / strata..(s + 1) * n / strata].to_vec()).collect()
}

/// Pearson statistic of an r x 2 table; rows or columns with zero totals
/// are dropped. Returns `(statistic, degrees of freedom)`.
fn pearson(table: &[[f64; 2]]) -> (f64, usize) {
    let rows: Vec<&[f64; 2]> = table.iter().filter(|r| r[0] + r[1] > 0.0).collect();
    let total: f64 = rows.iter().map(|r| r[0] + r[1]).sum();
    let cols = [rows.iter().map(|r| r[0]).sum::<f64>(), rows.iter().map(|r| r[1]).sum::<f64>()];
    if rows.len() < 2 || cols.contains(&0.0) {
        return (0.0, 0);
    }
    let mut stat = 0.0;
    for r in &rows {
        let rt = r[0] + r[1];
        for c in 0..2 {
            let e = rt * cols[c] / total;
            stat += (r[c] - e).powi(2) / e;
        }
    }
    (stat, rows.len() - 1)
}

fn p_value(stat: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::Estimator("degenerate contingency table".into()));
    }
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Estimator(e.to_string()))?;
    Ok(chi.sf(stat))
}

/// Tests that the missingness rate does not vary across `strata` groups of
/// an always-observed variable (a completely-at-random mask). Returns the
/// p-value.
pub fn mcar_pvalue(stratifier: &[f64], missing: &[bool], strata: usize) -> Result<f64> {
    if stratifier.len() != missing.len() || strata < 2 {
        return Err(Error::Shape("stratifier and mask must align, with at least 2 strata".into()));
    }
    let table: Vec<[f64; 2]> = strata_of(stratifier, strata)
        .iter()
        .map(|rows| {
            let miss = rows.iter().filter(|&&i| missing[i]).count() as f64;
            [rows.len() as f64 - miss, miss]
        })
        .collect();
    let (stat, df) = pearson(&table);
    p_value(stat, df)
}

/// Tests that, within thin strata of the always-observed `stratifier`, the
/// missingness of `target` does not depend on whether the (true) target
/// value is below or above its stratum median (a missing-at-random mask
/// given the stratifier). Sums one 2 x 2 statistic per stratum.
pub fn mar_pvalue(stratifier: &[f64], target: &[f64], missing: &[bool], strata: usize) -> Result<f64> {
    if stratifier.len() != missing.len() || target.len() != missing.len() || strata < 2 {
        return Err(Error::Shape("stratifier, target and mask must align, with at least 2 strata".into()));
    }
    let (mut stat, mut df) = (0.0, 0);
    for rows in strata_of(stratifier, strata) {
        let values: Vec<f64> = rows.iter().map(|&i| target[i]).collect();
        let halves = strata_of(&values, 2);
        let table: Vec<[f64; 2]> = halves
            .iter()
            .map(|half| {
                let miss = half.iter().filter(|&&k| missing[rows[k]]).count() as f64;
                [half.len() as f64 - miss, miss]
            })
            .collect();
        let (s, d) = pearson(&table);
        stat += s;
        df += d;
    }
    p_value(stat, df)
}
