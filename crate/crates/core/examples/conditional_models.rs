//! Fit the conditional models directly and compare draws with predictions:
//! draws keep the spread of the data, predictions collapse it.
//!
//! cargo run --release --example conditional_models

use imputekit::models::{CartParams, Completion, ConditionalModel, FeatureKind, FeatureMatrix, ForestParams, ModelFamily, Target};
use imputekit::rng::SeedPath;
use rand::Rng;

fn sd(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn main() -> imputekit::Result<()> {
    let mut rng = SeedPath::new(17).rng();
    let rows: Vec<Vec<f64>> = (0..2000).map(|_| vec![rng.random_range(-2.0..2.0)]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0] + rng.random_range(-1.0..1.0)).collect();
    let x = FeatureMatrix::new(vec![FeatureKind::Numeric], &rows)?;
    let target = Target::Numeric(y.clone());
    println!("observed sd {:.3}", sd(&y));

    let families = [
        ("linear", ModelFamily::Linear { bayes: true }),
        ("cart", ModelFamily::Cart(CartParams::default())),
        ("forest", ModelFamily::Forest(ForestParams::default())),
    ];
    for (name, family) in families {
        let model = ConditionalModel::fit(family, &x, &target, &mut rng)?;
        let drawn = model.complete(&x, Completion::Draw, &mut rng)?;
        let predicted = model.complete(&x, Completion::Predict, &mut rng)?;
        println!("{name:<7} draw sd {:.3}  prediction sd {:.3}", sd(&drawn), sd(&predicted));
    }
    Ok(())
}
