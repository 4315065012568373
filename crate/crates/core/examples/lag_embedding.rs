//! Simulates the order-three autoregression, embeds it into a regression
//! sample of lags, and maps the predictors onto the unit cube.
//!
//! cargo run --example lag_embedding

use spbk::sample::{lag_embed, normalize, DomainMap, LagSpec};
use spbk::simulation::{gen_example1, BURN_IN};

fn main() -> spbk::Result<()> {
    let series = gen_example1(200, 0.5, 7)?;
    println!(
        "raw series length {} including {BURN_IN} burn-in values",
        series.len()
    );

    let spec = LagSpec::new(vec![1, 2, 3], BURN_IN)?;
    let sample = lag_embed(&series, &spec)?;
    println!("embedded: n = {}, d = {}", sample.n(), sample.d());
    for i in 0..3 {
        println!("  Y = {:+.4}  X = {:+.4?}", sample.y()[i], sample.row(i));
    }

    let map = DomainMap::uniform(-2.58, 2.58, 3)?;
    let unit = normalize(&sample, &map)?;
    println!(
        "{} of {} rows fall outside [-2.58, 2.58]^3 and are left out of fitting",
        unit.out_of_range_count(),
        sample.n()
    );
    let fitting = unit.fitting_sample()?;
    println!("first unit-scale row: {:.4?}", fitting.row(0));
    Ok(())
}
