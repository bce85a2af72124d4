//! Full-dataset imputation: the chained-equations loop and two deterministic
//! foils (knn, missForest), behind a common [`Imputer`] interface.

pub mod knn;
pub mod mice;
pub mod missforest;
mod working;

use std::fmt;
use std::str::FromStr;

pub use knn::{knn_impute, KnnImputation, DEFAULT_K};
pub use mice::{mice_impute, visit_sequence, ChainTrace, MiceConfig, MiceMethod, MultipleImputation, VisitOrder};
pub use missforest::{missforest_impute, MissForestConfig, MissForestResult};

use crate::data::{CompletedDataset, MaskedDataset};
use crate::error::{Error, Result};
use crate::models::{CartParams, ForestParams};
use crate::rng::SeedPath;

/// Anything that turns a masked dataset into `m` completions.
///
/// Implementations must be pure functions of `(ds, m, seed)`.
pub trait Imputer: Sync {
    fn name(&self) -> &str;

    /// Whether different seeds give different completions.
    fn is_stochastic(&self) -> bool;

    fn impute(&self, ds: &MaskedDataset, m: usize, seed: &SeedPath) -> Result<Vec<CompletedDataset>>;
}

/// Registered imputation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    MiceNorm,
    MiceNormNob,
    MiceNormPredict,
    MiceCart,
    MiceRf,
    Knn,
    MissForest,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::MiceNorm,
        Method::MiceNormNob,
        Method::MiceNormPredict,
        Method::MiceCart,
        Method::MiceRf,
        Method::Knn,
        Method::MissForest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MiceNorm => "mice-norm",
            Method::MiceNormNob => "mice-norm-nob",
            Method::MiceNormPredict => "mice-norm-predict",
            Method::MiceCart => "mice-cart",
            Method::MiceRf => "mice-rf",
            Method::Knn => "knn",
            Method::MissForest => "missforest",
        }
    }

    pub fn is_stochastic(self) -> bool {
        match self.mice_method() {
            Some(m) => m.is_stochastic(),
            None => false,
        }
    }

    fn mice_method(self) -> Option<MiceMethod> {
        Some(match self {
            Method::MiceNorm => MiceMethod::Norm,
            Method::MiceNormNob => MiceMethod::NormNob,
            Method::MiceNormPredict => MiceMethod::NormPredict,
            Method::MiceCart => MiceMethod::Cart,
            Method::MiceRf => MiceMethod::Rf,
            Method::Knn | Method::MissForest => return None,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let known: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
            Error::Config(format!("unknown method `{s}` (expected one of {})", known.join(", ")))
        })
    }
}

/// A method together with every hyperparameter it may need.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub max_iter: usize,
    pub k: usize,
    pub cart: CartParams,
    pub forest: ForestParams,
    pub min_fit_rows: usize,
    pub visit_order: VisitOrder,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        MethodConfig {
            method,
            max_iter: 10,
            k: DEFAULT_K,
            cart: CartParams::default(),
            forest: ForestParams::default(),
            min_fit_rows: 10,
            visit_order: VisitOrder::IncreasingMissing,
        }
    }

    fn mice_config(&self, method: MiceMethod, m: usize, seed: u64) -> MiceConfig {
        MiceConfig {
            method,
            m,
            max_iter: self.max_iter,
            visit_order: self.visit_order,
            cart: self.cart,
            forest: self.forest,
            min_fit_rows: self.min_fit_rows,
            seed,
        }
    }

    /// Runs the full mice loop, keeping the chain diagnostics. Deterministic
    /// foils return `m` copies and an empty trace.
    pub fn run(&self, ds: &MaskedDataset, m: usize, seed: &SeedPath) -> Result<MultipleImputation> {
        if m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        let seed = seed.derive_seed();
        match self.method.mice_method() {
            Some(mm) => mice_impute(ds, &self.mice_config(mm, m, seed)),
            None => {
                let completed = match self.method {
                    Method::Knn => knn_impute(ds, self.k)?.completed,
                    _ => {
                        let cfg = MissForestConfig {
                            forest: self.forest,
                            max_iter: self.max_iter,
                            min_fit_rows: self.min_fit_rows,
                            seed,
                        };
                        missforest_impute(ds, &cfg)?.completed
                    }
                };
                Ok(MultipleImputation {
                    completions: vec![completed; m],
                    source_mask: ds.mask_of(),
                    chain_means: Vec::new(),
                })
            }
        }
    }
}

impl Imputer for MethodConfig {
    fn name(&self) -> &str {
        self.method.name()
    }

    fn is_stochastic(&self) -> bool {
        self.method.is_stochastic()
    }

    fn impute(&self, ds: &MaskedDataset, m: usize, seed: &SeedPath) -> Result<Vec<CompletedDataset>> {
        Ok(self.run(ds, m, seed)?.completions)
    }
}

/// Accepts only complete datasets and returns them unchanged; the control
/// arm of experiments without missingness.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityImputer;

impl Imputer for IdentityImputer {
    fn name(&self) -> &str {
        "identity"
    }

    fn is_stochastic(&self) -> bool {
        false
    }

    fn impute(&self, ds: &MaskedDataset, m: usize, _seed: &SeedPath) -> Result<Vec<CompletedDataset>> {
        Ok(vec![CompletedDataset::from_complete(ds)?; m.max(1)])
    }
}
