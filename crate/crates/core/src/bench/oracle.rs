use rayon::prelude::*;

use super::estimators::quantile_est;
use super::generators::{PairSampler, UniformExampleConfig};
use crate::error::{Error, Result};
use crate::rng::SeedPath;

const CHUNK: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub value: f64,
    /// Asymptotic standard error of the sample quantile.
    pub std_error: f64,
    pub n_observed: usize,
}

/// Monte Carlo `alpha`-quantile of `X1` among rows where it is observed,
/// under the uniform example's mechanism. Only `(X1, X2)` are simulated;
/// the noise columns do not affect it.
pub fn complete_case_oracle(cfg: &UniformExampleConfig, alpha: f64, n_oracle: usize) -> Result<OracleEstimate> {
    cfg.validate()?;
    if n_oracle < 1_000_000 {
        return Err(Error::Config(format!("n_oracle = {n_oracle} is below 10^6")));
    }
    let sampler = PairSampler::new(cfg);
    let root = SeedPath::new(cfg.seed).child(u64::MAX);
    let chunks = n_oracle.div_ceil(CHUNK);
    let observed: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = root.child(c as u64).rng();
            let len = CHUNK.min(n_oracle - c * CHUNK);
            (0..len)
                .filter_map(|_| {
                    let (x1, _, hidden) = sampler.sample(&mut rng);
                    (!hidden).then_some(x1)
                })
                .collect::<Vec<f64>>()
        })
        .flatten()
        .collect();
    let value = quantile_est(&observed, alpha)?;
    // density of observed X1 at the quantile, from the share of points nearby
    let band = 2e-3;
    let near = observed.iter().filter(|&&x| (x - value).abs() <= band).count() as f64;
    let density = near / (2.0 * band * observed.len() as f64);
    let std_error = (alpha * (1.0 - alpha) / observed.len() as f64).sqrt() / density;
    Ok(OracleEstimate {
        value,
        std_error,
        n_observed: observed.len(),
    })
}
