use rand::Rng;

use super::cart::{grow, CartParams, CartTree};
use super::features::{FeatureMatrix, Target};
use crate::data::mode_of;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `ceil(sqrt(p))`.
    pub mtry: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 10,
            min_leaf: 5,
            mtry: None,
        }
    }
}

impl ForestParams {
    pub fn mtry_for(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p.max(1))
    }
}

/// Trees grown on bootstrap resamples of the fitting rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DonorForest {
    trees: Vec<CartTree>,
    categorical: Option<usize>,
}

pub fn fit_forest<R: Rng>(x: &FeatureMatrix, y: &Target, params: &ForestParams, rng: &mut R) -> Result<DonorForest> {
    if params.n_trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    let n = x.n_rows();
    if n == 0 {
        return Err(Error::Fit("empty fitting set".into()));
    }
    let cart = CartParams {
        min_leaf: params.min_leaf,
        ..CartParams::default()
    };
    let mtry = params.mtry_for(x.n_features());
    let trees = (0..params.n_trees)
        .map(|_| {
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow(x, y, rows, &cart, Some((&mut *rng, mtry)))
        })
        .collect::<Result<Vec<_>>>()?;
    let categorical = match y {
        Target::Categorical { n_levels, .. } => Some(*n_levels),
        Target::Numeric(_) => None,
    };
    Ok(DonorForest { trees, categorical })
}

impl DonorForest {
    pub fn trees(&self) -> &[CartTree] {
        &self.trees
    }

    /// Aggregated prediction: mean of leaf means, or majority vote of leaf majorities.
    pub fn predict(&self, x_new: &[f64]) -> f64 {
        match self.categorical {
            None => self.trees.iter().map(|t| t.leaf_for(x_new).mean).sum::<f64>() / self.trees.len() as f64,
            Some(n_levels) => mode_of(self.trees.iter().map(|t| t.leaf_for(x_new).majority), n_levels) as f64,
        }
    }
}

/// Picks one tree uniformly, routes `x_new`, and draws one donor from its leaf.
pub fn draw_forest<R: Rng + ?Sized>(forest: &DonorForest, x_new: &[f64], rng: &mut R) -> f64 {
    let tree = &forest.trees[rng.random_range(0..forest.trees.len())];
    tree.leaf_for(x_new).draw(rng)
}
