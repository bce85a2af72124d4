//! Rank imputation methods on data with real missing values using the
//! energy-I-Score.
//!
//! cargo run --release --example method_ranking -- [n]

use imputekit::bench::{gen_uniform_example, UniformExampleConfig};
use imputekit::engines::{Method, MethodConfig};
use imputekit::rng::SeedPath;
use imputekit::scoring::{iscore, IScoreConfig, ScoreReport};

fn main() -> imputekit::Result<()> {
    let n = std::env::args().nth(1).map_or(5000, |a| a.parse().expect("numeric n"));
    let data = gen_uniform_example(&UniformExampleConfig { n, seed: 7, ..Default::default() })?.masked;

    // one seed for every method: identical test cells, paired comparison
    let cfg = IScoreConfig::default();
    let methods = [Method::MiceCart, Method::MiceRf, Method::MiceNorm, Method::Knn, Method::MissForest];
    let entries = methods
        .iter()
        .map(|&m| iscore(&data, &MethodConfig::new(m), &cfg, &SeedPath::new(11)))
        .collect::<imputekit::Result<Vec<_>>>()?;
    let report = ScoreReport::new(entries)?;
    print!("{}", report.ranking_table());
    Ok(())
}
