//! Linear-Gaussian conditional model with three completion rules:
//! plain prediction, a draw around the fitted line, and a Bayesian draw
//! that also samples the coefficients and residual variance.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::features::DesignMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianModel {
    pub beta: Vec<f64>,
    /// Residual variance `RSS / dof`.
    pub sigma2: f64,
    pub rss: f64,
    pub xtx_inv: DMatrix<f64>,
    /// Lower Cholesky factor of `xtx_inv`.
    xtx_inv_chol: DMatrix<f64>,
    pub dof: usize,
    /// Set when the Gram matrix needed the ridge fallback.
    pub ridged: bool,
}

/// Relative pivot below which the Gram matrix is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

pub fn fit_linear(x: &DesignMatrix, y: &[f64]) -> Result<LinearGaussianModel> {
    let n = x.n_rows();
    let q = x.width();
    if y.len() != n {
        return Err(Error::Shape(format!("{} targets for {n} design rows", y.len())));
    }
    if n <= q {
        return Err(Error::Fit(format!("{n} rows cannot fit {q} coefficients")));
    }

    let mut gram = DMatrix::<f64>::zeros(q, q);
    let mut xty = DVector::<f64>::zeros(q);
    for (i, &yi) in y.iter().enumerate().take(n) {
        let r = x.row(i);
        for a in 0..q {
            xty[a] += r[a] * yi;
            for b in 0..=a {
                gram[(a, b)] += r[a] * r[b];
            }
        }
    }
    for a in 0..q {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }

    let full_rank = |g: &DMatrix<f64>| {
        g.clone().cholesky().filter(|c| {
            let l = c.l_dirty();
            (0..q).all(|k| g[(k, k)] > 0.0 && l[(k, k)] * l[(k, k)] > RANK_TOL * g[(k, k)])
        })
    };
    let (chol, ridged) = match full_rank(&gram) {
        Some(c) => (c, false),
        None => {
            let jitter = 1e-8 * gram.trace() / q as f64;
            let mut g = gram.clone();
            for k in 0..q {
                g[(k, k)] += jitter.max(f64::MIN_POSITIVE);
            }
            let c = g
                .cholesky()
                .ok_or_else(|| Error::Fit("Gram matrix is singular even after ridge".into()))?;
            (c, true)
        }
    };

    let beta = chol.solve(&xty);
    let rss: f64 = (0..n)
        .map(|i| {
            let fit: f64 = x.row(i).iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
            (y[i] - fit).powi(2)
        })
        .sum();
    let dof = n - q;
    let xtx_inv = chol.inverse();
    let xtx_inv_chol = xtx_inv
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Fit("inverse Gram matrix is not positive definite".into()))?
        .unpack();

    Ok(LinearGaussianModel {
        beta: beta.iter().copied().collect(),
        sigma2: rss / dof as f64,
        rss,
        xtx_inv,
        xtx_inv_chol,
        dof,
        ridged,
    })
}

fn check_width(model: &LinearGaussianModel, x: &DesignMatrix) -> Result<()> {
    if x.width() != model.beta.len() {
        return Err(Error::Shape(format!(
            "design has {} columns, model has {} coefficients",
            x.width(),
            model.beta.len()
        )));
    }
    Ok(())
}

fn linear_predictor(beta: &[f64], x: &DesignMatrix) -> Vec<f64> {
    (0..x.n_rows())
        .map(|i| x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum())
        .collect()
}

/// Deterministic completion `Xβ`.
pub fn predict_norm(model: &LinearGaussianModel, x_new: &DesignMatrix) -> Result<Vec<f64>> {
    check_width(model, x_new)?;
    Ok(linear_predictor(&model.beta, x_new))
}

/// `Xβ + ε`, `ε ~ N(0, σ²)` with the fitted coefficients held fixed.
pub fn draw_norm_nob<R: Rng + ?Sized>(
    model: &LinearGaussianModel,
    x_new: &DesignMatrix,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_width(model, x_new)?;
    let sd = model.sigma2.sqrt();
    let mut out = linear_predictor(&model.beta, x_new);
    for v in &mut out {
        let z: f64 = StandardNormal.sample(rng);
        *v += sd * z;
    }
    Ok(out)
}

/// Normal / inverse-chi-square posterior draw:
/// `σ*² = RSS / g` with `g ~ χ²(dof)`, `β* ~ N(β, σ*² (XᵀX)⁻¹)`, then
/// `Xβ* + ε` with `ε ~ N(0, σ*²)`.
pub fn draw_norm_bayes<R: Rng + ?Sized>(
    model: &LinearGaussianModel,
    x_new: &DesignMatrix,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_width(model, x_new)?;
    if model.dof < 1 {
        return Err(Error::Fit("Bayesian draw needs at least one residual degree of freedom".into()));
    }
    let chi = ChiSquared::new(model.dof as f64).map_err(|e| Error::Fit(e.to_string()))?;
    let g: f64 = chi.sample(rng);
    let sigma_star = (model.rss / g).sqrt();

    let q = model.beta.len();
    let z = DVector::<f64>::from_fn(q, |_, _| StandardNormal.sample(rng));
    let shift = &model.xtx_inv_chol * z;
    let beta_star: Vec<f64> = model
        .beta
        .iter()
        .zip(shift.iter())
        .map(|(b, s)| b + sigma_star * s)
        .collect();

    let mut out = linear_predictor(&beta_star, x_new);
    for v in &mut out {
        let e: f64 = StandardNormal.sample(rng);
        *v += sigma_star * e;
    }
    Ok(out)
}
