use crate::data::CompletedDataset;
use crate::error::{Error, Result};

/// Linear-interpolation sample quantile: with sorted `v_1..v_k` and
/// `h = (k - 1) alpha + 1`, returns `v_floor(h) + (h - floor(h)) (v_ceil(h) - v_floor(h))`.
pub fn quantile_est(values: &[f64], alpha: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Estimator("quantile of an empty vector".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Estimator(format!("quantile level {alpha} is not in (0, 1)")));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Estimator("quantile of non-finite values".into()));
    }
    let mut v = values.to_vec();
    let k = v.len();
    let h = (k - 1) as f64 * alpha;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(k - 1);
    // order statistics lo and hi without a full sort
    let (_, &mut a, rest) = v.select_nth_unstable_by(lo, f64::total_cmp);
    let b = if hi == lo { a } else { rest.iter().copied().fold(f64::INFINITY, f64::min) };
    Ok(a + (h - lo as f64) * (b - a))
}

/// OLS slope (with intercept) of column `y_col` on column `x_col`.
pub fn slope_est(ds: &CompletedDataset, y_col: usize, x_col: usize) -> Result<f64> {
    for c in [y_col, x_col] {
        if c >= ds.n_cols() || !ds.kind(c).is_numeric() {
            return Err(Error::Estimator(format!("column {c} is not a numeric column")));
        }
    }
    slope_of(ds.column(x_col), ds.column(y_col))
}

pub(crate) fn slope_of(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Estimator("regressor has zero variance".into()));
    }
    Ok(sxy / sxx)
}
