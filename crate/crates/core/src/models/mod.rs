//! Per-variable conditional models used as the regression step of the
//! chained-equations loop. Every model supports a stochastic `draw` and a
//! deterministic `predict` completion.

pub mod cart;
pub mod features;
pub mod forest;
pub mod linear;

use rand::Rng;

pub use cart::{draw_cart, fit_cart, CartParams, CartTree, Leaf, Node, SplitRule};
pub use features::{DesignMatrix, FeatureKind, FeatureMatrix, Target};
pub use forest::{draw_forest, fit_forest, DonorForest, ForestParams};
pub use linear::{draw_norm_bayes, draw_norm_nob, fit_linear, predict_norm, LinearGaussianModel};

use crate::error::Result;

/// Model family used to fill one target column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelFamily {
    /// Linear-Gaussian regression; `bayes` selects the posterior draw.
    Linear { bayes: bool },
    Cart(CartParams),
    Forest(ForestParams),
}

/// How fitted models fill cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Draw,
    Predict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalModel {
    Linear { model: LinearGaussianModel, bayes: bool },
    Cart(CartTree),
    Forest(DonorForest),
}

impl ConditionalModel {
    /// Linear families require a numeric target; categorical targets under
    /// a linear family fall back to a single CART with default parameters,
    /// which keeps draws inside the observed level set.
    pub fn fit<R: Rng>(family: ModelFamily, x: &FeatureMatrix, y: &Target, rng: &mut R) -> Result<Self> {
        match (family, y) {
            (ModelFamily::Linear { bayes }, Target::Numeric(v)) => Ok(ConditionalModel::Linear {
                model: fit_linear(&DesignMatrix::from_features(x), v)?,
                bayes,
            }),
            (ModelFamily::Linear { .. }, Target::Categorical { .. }) => {
                let params = CartParams::default();
                let params = CartParams {
                    min_leaf: params.min_leaf.min((y.len() / 2).max(1)),
                    ..params
                };
                Ok(ConditionalModel::Cart(fit_cart(x, y, &params)?))
            }
            (ModelFamily::Cart(params), _) => Ok(ConditionalModel::Cart(fit_cart(x, y, &params)?)),
            (ModelFamily::Forest(params), _) => Ok(ConditionalModel::Forest(fit_forest(x, y, &params, rng)?)),
        }
    }

    /// Fills one value per row of `x_new`.
    pub fn complete<R: Rng>(&self, x_new: &FeatureMatrix, how: Completion, rng: &mut R) -> Result<Vec<f64>> {
        let rows = 0..x_new.n_rows();
        match (self, how) {
            (ConditionalModel::Linear { model, .. }, Completion::Predict) => {
                predict_norm(model, &DesignMatrix::from_features(x_new))
            }
            (ConditionalModel::Linear { model, bayes: false }, Completion::Draw) => {
                draw_norm_nob(model, &DesignMatrix::from_features(x_new), rng)
            }
            (ConditionalModel::Linear { model, bayes: true }, Completion::Draw) => {
                draw_norm_bayes(model, &DesignMatrix::from_features(x_new), rng)
            }
            (ConditionalModel::Cart(tree), Completion::Draw) => {
                rows.map(|i| draw_cart(tree, x_new.row(i), rng)).collect()
            }
            (ConditionalModel::Cart(tree), Completion::Predict) => {
                let categorical = tree.is_categorical();
                Ok(rows
                    .map(|i| {
                        let leaf = tree.leaf_for(x_new.row(i));
                        if categorical {
                            leaf.majority as f64
                        } else {
                            leaf.mean
                        }
                    })
                    .collect())
            }
            (ConditionalModel::Forest(forest), Completion::Draw) => {
                Ok(rows.map(|i| draw_forest(forest, x_new.row(i), rng)).collect())
            }
            (ConditionalModel::Forest(forest), Completion::Predict) => {
                Ok(rows.map(|i| forest.predict(x_new.row(i))).collect())
            }
        }
    }
}
