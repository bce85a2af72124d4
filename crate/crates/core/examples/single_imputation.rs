//! The two deterministic foils: k-nearest-neighbour and iterative forest
//! imputation, with their diagnostics.
//!
//! cargo run --release --example single_imputation -- [n]

use imputekit::bench::{gen_uniform_example, UniformExampleConfig};
use imputekit::engines::{knn_impute, missforest_impute, MissForestConfig, DEFAULT_K};

fn main() -> imputekit::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(1000, |a| a.parse().expect("numeric n"));
    let sim = gen_uniform_example(&UniformExampleConfig { n, seed: 8, ..Default::default() })?;
    let truth = sim.full.column_values(0);

    let knn = knn_impute(&sim.masked, DEFAULT_K)?;
    let mf = missforest_impute(&sim.masked, &MissForestConfig { seed: 1, ..Default::default() })?;
    println!("knn: {} cells fell back to the column mean", knn.fallbacks.len());
    println!("missforest: {} iterations", mf.iterations);
    for (i, (num, _)) in mf.changes.iter().enumerate() {
        println!("  iteration {} numeric change {:.6}", i + 1, num.unwrap_or(f64::NAN));
    }

    let hidden: Vec<usize> = (0..n).filter(|&i| sim.masked.is_missing(i, 0)).collect();
    for (name, c) in [("knn", &knn.completed), ("missforest", &mf.completed)] {
        let x = c.column(0);
        let rmse = (hidden.iter().map(|&i| (x[i] - truth[i]).powi(2)).sum::<f64>() / hidden.len() as f64).sqrt();
        let lowest = hidden.iter().map(|&i| x[i]).fold(f64::INFINITY, f64::min);
        println!("{name:<11} rmse {rmse:.4} on {} hidden cells, smallest fill {lowest:.4}", hidden.len());
    }
    Ok(())
}
