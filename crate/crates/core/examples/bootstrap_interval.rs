//! One bootstrap confidence interval for the 0.1-quantile of an imputed
//! column: resample rows, re-impute, re-estimate.
//!
//! cargo run --release --example bootstrap_interval -- [method] [L]

use imputekit::bench::{gen_uniform_example, UniformExampleConfig};
use imputekit::engines::{Method, MethodConfig};
use imputekit::rng::SeedPath;
use imputekit::uncertainty::{bootstrap_ci, BootstrapConfig, Estimator};

fn main() -> imputekit::Result<()> {
    let mut args = std::env::args().skip(1);
    let method: Method = args.next().as_deref().unwrap_or("mice-cart").parse()?;
    let l: usize = args.next().map_or(30, |a| a.parse().expect("numeric L"));
    let ds = gen_uniform_example(&UniformExampleConfig { n: 2000, seed: 12, ..Default::default() })?.masked;

    let cfg = BootstrapConfig { replicates: l, ..Default::default() };
    let r = bootstrap_ci(&ds, &MethodConfig::new(method), &Estimator::quantile(0, 0.1), &cfg, &SeedPath::new(6))?;
    println!("{method}: estimate {:.4}, sigma* {:.4}", r.theta_hat, r.sigma_star);
    println!("{:.0}% interval [{:.4}, {:.4}] (true value 0.1)", 100.0 * (1.0 - cfg.alpha), r.ci.0, r.ci.1);
    Ok(())
}
