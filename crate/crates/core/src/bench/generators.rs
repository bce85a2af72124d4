use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::MaskedDataset;
use crate::error::{Error, Result};
use crate::rng::SeedPath;

/// A simulated dataset before and after masking.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub full: MaskedDataset,
    pub masked: MaskedDataset,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianExampleConfig {
    pub n: usize,
    /// MCAR probability of hiding `X1`.
    pub miss_prob: f64,
    pub seed: u64,
}

impl Default for GaussianExampleConfig {
    fn default() -> Self {
        GaussianExampleConfig {
            n: 5000,
            miss_prob: 0.5,
            seed: 0,
        }
    }
}

fn column_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("X{j}")).collect()
}

fn build(names: &[String], full: Vec<Vec<f64>>, hide: &[bool]) -> Result<Simulated> {
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let masked_cols = full
        .iter()
        .enumerate()
        .map(|(j, col)| {
            col.iter()
                .zip(hide)
                .map(|(&x, &h)| (j != 0 || !h).then_some(x))
                .collect()
        })
        .collect();
    let full_cols = full.into_iter().map(|c| c.into_iter().map(Some).collect()).collect();
    Ok(Simulated {
        full: MaskedDataset::numeric(&refs, full_cols)?,
        masked: MaskedDataset::numeric(&refs, masked_cols)?,
    })
}

/// `X1 ~ N(0, 1)`, `X2 = X1 + N(0, 2)`, with `X1` hidden completely at
/// random.
pub fn gen_gaussian_example(cfg: &GaussianExampleConfig) -> Result<Simulated> {
    if !(cfg.miss_prob > 0.0 && cfg.miss_prob < 1.0) {
        return Err(Error::Config(format!("miss_prob {} is not in (0, 1)", cfg.miss_prob)));
    }
    if cfg.n < 2 {
        return Err(Error::Config("n must be at least 2".into()));
    }
    let mut rng = SeedPath::new(cfg.seed).rng();
    let mut x1 = Vec::with_capacity(cfg.n);
    let mut x2 = Vec::with_capacity(cfg.n);
    let mut hide = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        x1.push(a);
        x2.push(a + std::f64::consts::SQRT_2 * e);
        hide.push(rng.random::<f64>() < cfg.miss_prob);
    }
    // keep X1 fittable in degenerate draws
    if hide.iter().all(|&h| h) {
        hide[0] = false;
    }
    build(&column_names(2), vec![x1, x2], &hide)
}

/// Probability that `X1` is missing given `X2 = x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propensity {
    /// `1 - (2 x2 + 14) / 16`.
    Linear,
    /// MCAR with the given probability.
    Constant(f64),
}

impl Propensity {
    pub fn at(self, x2: f64) -> f64 {
        match self {
            Propensity::Linear => 1.0 - (2.0 * x2 + 14.0) / 16.0,
            Propensity::Constant(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformExampleConfig {
    pub n: usize,
    /// Total columns; the first two are dependent, the rest independent noise.
    pub d: usize,
    /// Correlation of the Gaussian copula linking `X1` and `X2`.
    pub copula_rho: f64,
    pub propensity: Propensity,
    pub seed: u64,
}

impl Default for UniformExampleConfig {
    fn default() -> Self {
        UniformExampleConfig {
            n: 5000,
            d: 5,
            copula_rho: 0.95,
            propensity: Propensity::Linear,
            seed: 0,
        }
    }
}

impl UniformExampleConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("d = {} must be at least 2", self.d)));
        }
        if !(self.copula_rho > -1.0 && self.copula_rho < 1.0) {
            return Err(Error::Config(format!("copula_rho {} is not in (-1, 1)", self.copula_rho)));
        }
        if let Propensity::Constant(p) = self.propensity {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Config(format!("constant propensity {p} is not in [0, 1)")));
            }
        }
        if self.n < 2 {
            return Err(Error::Config("n must be at least 2".into()));
        }
        Ok(())
    }
}

/// One draw of `(X1, X2, hidden)` from the uniform example.
pub(crate) struct PairSampler {
    rho: f64,
    tail: f64,
    phi: Normal,
    propensity: Propensity,
}

impl PairSampler {
    pub fn new(cfg: &UniformExampleConfig) -> Self {
        PairSampler {
            rho: cfg.copula_rho,
            tail: (1.0 - cfg.copula_rho * cfg.copula_rho).sqrt(),
            phi: Normal::standard(),
            propensity: cfg.propensity,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> (f64, f64, bool) {
        let z1: f64 = StandardNormal.sample(rng);
        let e: f64 = StandardNormal.sample(rng);
        let x1 = self.phi.cdf(z1);
        let x2 = self.phi.cdf(self.rho * z1 + self.tail * e);
        let hidden = rng.random::<f64>() < self.propensity.at(x2);
        (x1, x2, hidden)
    }
}

/// Uniform marginals linked by a Gaussian copula, `d - 2` independent
/// uniform columns, and `X1` hidden with a propensity depending on `X2`
/// only (missing at random).
pub fn gen_uniform_example(cfg: &UniformExampleConfig) -> Result<Simulated> {
    cfg.validate()?;
    let mut rng = SeedPath::new(cfg.seed).rng();
    let sampler = PairSampler::new(cfg);
    let mut cols = vec![Vec::with_capacity(cfg.n); cfg.d];
    let mut hide = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let (x1, x2, h) = sampler.sample(&mut rng);
        cols[0].push(x1);
        cols[1].push(x2);
        for col in cols.iter_mut().skip(2) {
            col.push(rng.random::<f64>());
        }
        hide.push(h);
    }
    if hide.iter().all(|&h| h) {
        hide[0] = false;
    }
    build(&column_names(cfg.d), cols, &hide)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let g = GaussianExampleConfig { n: 300, seed: 4, ..Default::default() };
        assert_eq!(gen_gaussian_example(&g).unwrap(), gen_gaussian_example(&g).unwrap());
        let u = UniformExampleConfig { n: 300, seed: 4, ..Default::default() };
        assert_eq!(gen_uniform_example(&u).unwrap(), gen_uniform_example(&u).unwrap());
        let other = UniformExampleConfig { seed: 5, ..u };
        assert_ne!(gen_uniform_example(&u).unwrap(), gen_uniform_example(&other).unwrap());
    }

    #[test]
    fn only_first_column_masked() {
        let s = gen_uniform_example(&UniformExampleConfig { n: 2000, ..Default::default() }).unwrap();
        assert_eq!(s.full.total_missing(), 0);
        assert!(s.masked.missing_count(0) > 0);
        assert!((1..5).all(|j| s.masked.missing_count(j) == 0));
        for i in 0..2000 {
            if !s.masked.is_missing(i, 0) {
                assert_eq!(s.masked.column_values(0)[i], s.full.column_values(0)[i]);
            }
        }
    }

    #[test]
    fn uniform_marginals_and_missing_rate() {
        let s = gen_uniform_example(&UniformExampleConfig { n: 5000, seed: 1, ..Default::default() }).unwrap();
        for j in 0..5 {
            let below = s.full.column_values(j).iter().filter(|&&x| x <= 0.5).count() as f64 / 5000.0;
            assert!((below - 0.5).abs() < 0.02, "column {j}: {below}");
        }
        let rate = s.masked.missing_count(0) as f64 / 5000.0;
        assert!((rate - 1.0 / 16.0).abs() < 0.01, "{rate}");
    }

    #[test]
    fn gaussian_missing_rate() {
        let s = gen_gaussian_example(&GaussianExampleConfig { seed: 2, ..Default::default() }).unwrap();
        let rate = s.masked.missing_count(0) as f64 / 5000.0;
        assert!((rate - 0.5).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = GaussianExampleConfig { miss_prob: 1.0, ..Default::default() };
        assert!(gen_gaussian_example(&bad).unwrap_err().is_config());
        let bad = UniformExampleConfig { d: 1, ..Default::default() };
        assert!(gen_uniform_example(&bad).unwrap_err().is_config());
        let bad = UniformExampleConfig { copula_rho: 1.0, ..Default::default() };
        assert!(gen_uniform_example(&bad).unwrap_err().is_config());
    }

    #[test]
    fn propensity_values() {
        assert_eq!(Propensity::Linear.at(0.0), 0.125);
        assert_eq!(Propensity::Linear.at(1.0), 0.0);
        assert_eq!(Propensity::Constant(0.3).at(0.7), 0.3);
    }
}
