//! Coverage of bootstrap intervals for a quantile under several imputers.
//!
//! cargo run --release --example coverage -- [B] [L] [n]

use imputekit::bench::{run_coverage_bench, CoverageBenchConfig, UniformExampleConfig};
use imputekit::engines::{Imputer, Method, MethodConfig};
use imputekit::rng::SeedPath;
use imputekit::uncertainty::{BootstrapConfig, CoverageConfig};

fn main() -> imputekit::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let b = args.next().unwrap_or(10);
    let l = args.next().unwrap_or(15);
    let n = args.next().unwrap_or(1000);

    let methods: Vec<MethodConfig> = [Method::MiceCart, Method::MiceRf, Method::Knn]
        .into_iter()
        .map(MethodConfig::new)
        .collect();
    let imputers: Vec<&dyn Imputer> = methods.iter().map(|m| m as &dyn Imputer).collect();
    let cfg = CoverageBenchConfig {
        data: UniformExampleConfig { n, ..Default::default() },
        alpha: 0.1,
        coverage: CoverageConfig {
            simulations: b,
            bootstrap: BootstrapConfig { replicates: l, ..Default::default() },
            ..Default::default()
        },
    };
    let table = run_coverage_bench(&imputers, &cfg, &SeedPath::new(99))?;
    println!("{:<12} {:>9} {:>11} {:>11}", "method", "coverage", "mean width", "exclusions");
    for s in &table.summary {
        println!("{:<12} {:>9.3} {:>11.5} {:>11}", s.method, s.coverage, s.mean_width, s.exclusions);
    }
    Ok(())
}
