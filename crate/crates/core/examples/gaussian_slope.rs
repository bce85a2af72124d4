//! Regression imputation versus stochastic imputation in the bivariate
//! Gaussian example: the slope of X2 on imputed X1, and a scatter figure.
//!
//! cargo run --release --example gaussian_slope -- [reps] [figure.svg]

use imputekit::bench::{run_gaussian_bench, GaussianBenchConfig};
use imputekit::engines::{Imputer, Method, MethodConfig};
use imputekit::report::svg::scatter_panels;
use imputekit::rng::SeedPath;

fn main() -> imputekit::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(10, |a| a.parse().expect("numeric reps"));
    let figure = args.next();

    let methods = [MethodConfig::new(Method::MiceNormPredict), MethodConfig::new(Method::MiceNormNob)];
    let imputers: Vec<&dyn Imputer> = methods.iter().map(|m| m as &dyn Imputer).collect();
    let cfg = GaussianBenchConfig { reps, ..Default::default() };
    let bench = run_gaussian_bench(&imputers, &cfg, &SeedPath::new(31))?;
    for s in &bench.table.summary {
        println!("{:<18} slope {:.4} (sd {:.4})", s.method, s.mean, s.sd);
    }
    if let Some(path) = figure {
        std::fs::write(&path, scatter_panels(&bench.panels, 0, 1)?).expect("writable figure path");
        println!("figure written to {path}");
    }
    Ok(())
}
