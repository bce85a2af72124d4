//! Quantile of a variable missing at random: stochastic imputers against
//! prediction imputers and the complete-case reference.
//!
//! cargo run --release --example uniform_quantile -- [reps] [n]

use imputekit::bench::{complete_case_oracle, run_quantile_bench, QuantileBenchConfig, UniformExampleConfig};
use imputekit::engines::{Imputer, Method, MethodConfig};
use imputekit::rng::SeedPath;

fn main() -> imputekit::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let reps = args.next().unwrap_or(10);
    let n = args.next().unwrap_or(5000);

    let methods: Vec<MethodConfig> = [Method::MiceCart, Method::MiceRf, Method::Knn, Method::MissForest]
        .into_iter()
        .map(MethodConfig::new)
        .collect();
    let imputers: Vec<&dyn Imputer> = methods.iter().map(|m| m as &dyn Imputer).collect();
    let cfg = QuantileBenchConfig {
        data: UniformExampleConfig { n, ..Default::default() },
        reps,
        ..Default::default()
    };
    let table = run_quantile_bench(&imputers, &cfg, &SeedPath::new(2024))?;
    let oracle = complete_case_oracle(&cfg.data, cfg.alpha, 10_000_000)?;

    println!("complete-case oracle: {:.5} (s.e. {:.1e})", oracle.value, oracle.std_error);
    println!("{:<16} {:>9} {:>9} {:>9}", "method", "mean", "sd", "|err|");
    for s in &table.summary {
        println!("{:<16} {:>9.5} {:>9.5} {:>9.5}", s.method, s.mean, s.sd, s.abs_error);
    }
    Ok(())
}
