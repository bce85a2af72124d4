//! Per-cycle means of the imputed cells in each chain, the usual check
//! that chained equations have settled.
//!
//! cargo run --release --example chain_diagnostics -- [method] [n]

use imputekit::bench::{gen_uniform_example, UniformExampleConfig};
use imputekit::engines::{Method, MethodConfig};
use imputekit::rng::SeedPath;

fn main() -> imputekit::Result<()> {
    let mut args = std::env::args().skip(1);
    let method: Method = args.next().as_deref().unwrap_or("mice-rf").parse()?;
    let n: usize = args.next().map_or(2000, |a| a.parse().expect("numeric n"));
    let ds = gen_uniform_example(&UniformExampleConfig { n, seed: 3, ..Default::default() })?.masked;

    let mi = MethodConfig::new(method).run(&ds, 4, &SeedPath::new(5))?;
    if mi.chain_means.is_empty() {
        println!("{method} is not iterative; nothing to trace");
        return Ok(());
    }
    print!("cycle");
    for c in 0..mi.chain_means.len() {
        print!("  chain {}", c + 1);
    }
    println!();
    for t in 0..mi.chain_means[0].len() {
        print!("{:>5}", t + 1);
        for trace in &mi.chain_means {
            // X1 is the only incomplete column
            print!("  {:>7.4}", trace[t][0].unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
