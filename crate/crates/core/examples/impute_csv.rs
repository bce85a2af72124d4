//! Read a CSV with missing cells, inspect its patterns, impute it several
//! times with chained equations and print the completed tables.
//!
//! cargo run --release --example impute_csv -- [path.csv] [method] [m]

use imputekit::data::{read_csv, read_csv_from, write_csv_to, ReadOptions};
use imputekit::engines::{Method, MethodConfig};
use imputekit::rng::SeedPath;

const DEMO: &str = "\
age,income,owner
33,NA,yes
18,12000,NA
NA,13542,no
41,30500,yes
27,NA,no
55,41000,yes
NA,22000,no
38,26000,NA
45,35500,yes
23,15000,no
61,NA,yes
30,21000,no
";

fn main() -> imputekit::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next();
    let method: Method = args.next().as_deref().unwrap_or("mice-cart").parse()?;
    let m: usize = args.next().map_or(3, |a| a.parse().expect("numeric m"));

    let opts = ReadOptions::default();
    let ds = match &path {
        Some(p) => read_csv(p, &opts)?,
        None => read_csv_from(DEMO.as_bytes(), &opts)?,
    };
    println!("{} rows, {} columns, {} missing cells", ds.n_rows(), ds.n_cols(), ds.total_missing());
    for g in &ds.patterns().groups {
        println!("  pattern {:?}: {} rows", g.pattern, g.rows.len());
    }

    let mut cfg = MethodConfig::new(method);
    // the demo table is tiny; let the fits run on what is there
    cfg.min_fit_rows = 3;
    cfg.cart.min_leaf = 2;
    let mi = cfg.run(&ds, m, &SeedPath::new(2024))?;
    for (k, c) in mi.completions.iter().enumerate() {
        println!("\ncompletion {}:", k + 1);
        write_csv_to(c, std::io::stdout().lock(), "NA")?;
    }
    Ok(())
}
